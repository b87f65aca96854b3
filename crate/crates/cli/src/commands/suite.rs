use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use lieb_towers::io::{report_json, ModelFile};
use lieb_towers::lattice::MAX_SITES;
use lieb_towers::mbgraph::{connectivity_census, find_path, verify_chain_product, ConfigNode};
use lieb_towers::random::{random_connected_lattice, seeded_rng, GraphOptions};
use lieb_towers::spectra::{analyze_filling, ground_state_report, AnalysisOptions};
use lieb_towers::srp::witness_for;
use lieb_towers::{ConfigBasis, HalfInt, LatticeSpec};

use super::{analysis_options, check_filling, require_complete};
use crate::args::RunConfig;
use crate::failure::Failure;
use crate::Output;

/// Smallest lattice drawn when `--max-sites` allows it.
const MIN_SITES: usize = 3;

#[derive(Serialize)]
struct CaseResult {
    case: usize,
    n_sites: usize,
    n_e: usize,
    ground_energy: f64,
    degeneracy: usize,
    s: Option<HalfInt>,
    unique_singlet: bool,
    witness_pass: bool,
    abs_psi_energy: f64,
    configuration_components: usize,
    path_moves: usize,
    chain_product: f64,
    pass: bool,
    failures: Vec<String>,
}

#[derive(Serialize)]
struct FailedCase {
    case: usize,
    failures: Vec<String>,
    /// The lattice as a model file, for replay with the other commands.
    model: ModelFile,
}

#[derive(Serialize)]
struct SuiteBody {
    seed: u64,
    cases: usize,
    max_sites: usize,
    passed: usize,
    failed: usize,
    pass: bool,
    failures: Vec<FailedCase>,
    results: Vec<CaseResult>,
}

/// Generator seed for one case; independent of the thread that runs it.
fn case_seed(seed: u64, case: usize) -> u64 {
    seed ^ (case as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn run_case(
    case: usize,
    cfg: &RunConfig,
    opts: &AnalysisOptions,
) -> Result<(CaseResult, LatticeSpec), Failure> {
    let mut rng = seeded_rng(case_seed(cfg.seed, case));
    let n = rng.random_range(MIN_SITES.min(cfg.max_sites)..=cfg.max_sites);
    let lat = random_connected_lattice(&mut rng, n, &GraphOptions::default());
    let k = rng.random_range(1..=n / 2);
    let n_e = 2 * k;
    check_filling(n, n_e)?;
    let mut failures = Vec::new();

    let spectra = analyze_filling(&lat, n_e, opts)?;
    require_complete(&spectra, cfg.dense_cap)?;
    let g = ground_state_report(&spectra, cfg.deg_tol);
    let unique_singlet = g.unique && g.s == Some(HalfInt::ZERO);
    if !unique_singlet {
        failures.push(format!(
            "ground state not a unique singlet (degeneracy {}, s {:?})",
            g.degeneracy, g.s
        ));
    }

    let w = witness_for(&lat, k, opts)?;
    if !w.pass_flags.all() {
        failures.push(format!("positivity witness failed: {:?}", w.pass_flags));
    }

    let census = connectivity_census(&lat, k, cfg.census_cap)?;
    if census.components != 1 {
        failures.push(format!(
            "configuration graph has {} components",
            census.components
        ));
    }
    let nodes: Vec<ConfigNode> = ConfigBasis::new(n, k)?
        .masks()
        .iter()
        .map(|&m| ConfigNode::from_mask(m))
        .collect();
    let x = *nodes.choose(&mut rng).expect("nonempty");
    let y = *nodes.choose(&mut rng).expect("nonempty");
    let (path_moves, chain_product) = match find_path(&lat, x, y)
        .and_then(|p| Ok((p.moves.len(), verify_chain_product(&lat, &p)?)))
    {
        Ok((m, c)) if c != 0.0 => (m, c),
        Ok((m, _)) => {
            failures.push(format!(
                "zero chain product from {:?} to {:?}",
                x.sites(),
                y.sites()
            ));
            (m, 0.0)
        }
        Err(e) => {
            failures.push(format!(
                "no path from {:?} to {:?}: {e}",
                x.sites(),
                y.sites()
            ));
            (0, 0.0)
        }
    };

    Ok((
        CaseResult {
            case,
            n_sites: n,
            n_e,
            ground_energy: g.energy,
            degeneracy: g.degeneracy,
            s: g.s,
            unique_singlet,
            witness_pass: w.pass_flags.all(),
            abs_psi_energy: w.e_abs_psi,
            configuration_components: census.components,
            path_moves,
            chain_product,
            pass: failures.is_empty(),
            failures,
        },
        lat,
    ))
}

pub fn run(cfg: &RunConfig) -> Result<Output, Failure> {
    if cfg.max_sites < 2 || cfg.max_sites > MAX_SITES {
        return Err(Failure::Parse(format!(
            "--max-sites must lie in 2..={MAX_SITES}"
        )));
    }
    let opts = analysis_options(cfg);
    let outcomes: Vec<(CaseResult, LatticeSpec)> = (0..cfg.cases)
        .into_par_iter()
        .map(|case| run_case(case, cfg, &opts))
        .collect::<Result<_, _>>()?;

    let mut results = Vec::with_capacity(outcomes.len());
    let mut failures = Vec::new();
    let mut table = String::new();
    for (r, lat) in outcomes {
        table.push_str(&format!(
            "{} case {:>4}: |Λ|={} N_e={} E0={:.10} s={} witness={} path={} moves\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.case,
            r.n_sites,
            r.n_e,
            r.ground_energy,
            crate::table::half(r.s),
            r.witness_pass,
            r.path_moves
        ));
        if !r.pass {
            failures.push(FailedCase {
                case: r.case,
                failures: r.failures.clone(),
                model: ModelFile::from_model(&lat, None),
            });
        }
        results.push(r);
    }
    let passed = results.iter().filter(|r| r.pass).count();
    table.push_str(&format!("{passed}/{} cases passed\n", results.len()));
    let body = SuiteBody {
        seed: cfg.seed,
        cases: cfg.cases,
        max_sites: cfg.max_sites,
        passed,
        failed: failures.len(),
        pass: failures.is_empty(),
        failures,
        results,
    };
    Ok(Output {
        json: report_json("suite", &body),
        table,
        pass: body.pass,
    })
}
