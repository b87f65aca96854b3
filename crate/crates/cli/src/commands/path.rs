use serde::Serialize;

use lieb_towers::io::{report_json, PathReport};
use lieb_towers::mbgraph::{
    connectivity_census, find_path, verify_chain_product, CensusReport, ConfigNode,
};

use super::load_model;
use crate::args::{RunConfig, Selector};
use crate::failure::Failure;
use crate::Output;

#[derive(Serialize)]
struct PathBody {
    n_sites: usize,
    path: Option<PathReport>,
    census: Vec<CensusReport>,
    pass: bool,
}

fn node(sites: &[usize], n: usize) -> Result<ConfigNode, Failure> {
    let zero_based = sites
        .iter()
        .map(|&s| {
            if s == 0 || s > n {
                Err(Failure::Parse(format!("site {s} outside 1..={n}")))
            } else {
                Ok(s - 1)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ConfigNode::from_sites(&zero_based, n)?)
}

pub fn run(
    cfg: &RunConfig,
    from: Option<&[usize]>,
    to: Option<&[usize]>,
) -> Result<Output, Failure> {
    let model = load_model(cfg)?;
    let lat = &model.lattice;
    let n = lat.n_sites();
    let mut table = String::new();

    let path = match (from, to) {
        (Some(from), Some(to)) => {
            if from.len() != to.len() {
                return Err(Failure::Parse(
                    "--from and --to need the same number of sites".into(),
                ));
            }
            let p = find_path(lat, node(from, n)?, node(to, n)?)?;
            let product = verify_chain_product(lat, &p)?;
            let report = PathReport::new(&p, product);
            for (k, sites) in report.nodes.iter().enumerate() {
                table.push_str(&format!("{k:>3}: {sites:?}\n"));
            }
            table.push_str(&format!("chain product {product}\n"));
            Some(report)
        }
        (None, None) => None,
        _ => return Err(Failure::Parse("--from and --to go together".into())),
    };

    let particles: Vec<usize> = match (cfg.selector, from) {
        (Selector::Filling(k), _) if k <= n => vec![k],
        (Selector::Filling(k), _) => {
            return Err(Failure::Parse(format!(
                "{k} particles do not fit on {n} sites"
            )))
        }
        (Selector::Sector(_), _) => {
            return Err(Failure::Parse(
                "path takes a particle number via --ne".into(),
            ))
        }
        (Selector::All, Some(from)) => vec![from.len()],
        (Selector::All, None) => (0..=n).collect(),
    };
    let census = particles
        .iter()
        .map(|&k| connectivity_census(lat, k, cfg.census_cap))
        .collect::<lieb_towers::Result<Vec<_>>>()?;
    for c in &census {
        table.push_str(&format!(
            "N={}: {} configurations, {} edges, {} components\n",
            c.n_particles, c.nodes, c.edges, c.components
        ));
    }
    let pass = path.as_ref().is_none_or(|p| p.chain_product != 0.0)
        && census.iter().all(|c| c.connectivity_inherited);
    let body = PathBody {
        n_sites: n,
        path,
        census,
        pass,
    };
    Ok(Output {
        json: report_json("path", &body),
        table,
        pass,
    })
}
