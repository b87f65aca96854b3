pub mod path;
pub mod pph;
pub mod spectrum;
pub mod suite;
pub mod verify;

use lieb_towers::fockspace::binomial;
use lieb_towers::io::{parse_model, Model};
use lieb_towers::lattice::is_connected;
use lieb_towers::spectra::{AnalysisOptions, SectorSpectrum};
use lieb_towers::{LatticeSpec, Sector};

use crate::args::{RunConfig, Selector};
use crate::failure::Failure;

/// Largest sector dimension any command will build.
pub const MAX_SECTOR_DIM: u64 = 1_000_000;

pub fn load_model(cfg: &RunConfig) -> Result<Model, Failure> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| Failure::Parse("--input is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("reading {}: {e}", path.display())))?;
    Ok(parse_model(&text)?)
}

pub fn analysis_options(cfg: &RunConfig) -> AnalysisOptions {
    AnalysisOptions {
        dense_cap: cfg.dense_cap,
        deg_tol: cfg.deg_tol,
        ..AnalysisOptions::default()
    }
}

pub fn check_sector(n_sites: usize, sector: Sector) -> Result<(), Failure> {
    if sector.n_up > n_sites || sector.n_down > n_sites {
        return Err(Failure::Parse(format!(
            "sector ({}, {}) does not fit on {n_sites} sites",
            sector.n_up, sector.n_down
        )));
    }
    let dim = binomial(n_sites, sector.n_up) * binomial(n_sites, sector.n_down);
    if dim > MAX_SECTOR_DIM {
        return Err(Failure::Cap(format!(
            "sector ({}, {}) has dimension {dim}, above {MAX_SECTOR_DIM}",
            sector.n_up, sector.n_down
        )));
    }
    Ok(())
}

pub fn check_filling(n_sites: usize, n_e: usize) -> Result<(), Failure> {
    if n_e > 2 * n_sites {
        return Err(Failure::Parse(format!(
            "{n_e} electrons do not fit on {n_sites} sites"
        )));
    }
    Sector::with_filling(n_sites, n_e)
        .into_iter()
        .try_for_each(|s| check_sector(n_sites, s))
}

/// Sectors picked by the selector, validated against the caps.
pub fn selected_sectors(selector: Selector, n_sites: usize) -> Result<Vec<Sector>, Failure> {
    let sectors = match selector {
        Selector::Sector(s) => vec![s],
        Selector::Filling(n_e) => {
            check_filling(n_sites, n_e)?;
            Sector::with_filling(n_sites, n_e)
        }
        Selector::All => Sector::all(n_sites),
    };
    for &s in &sectors {
        check_sector(n_sites, s)?;
    }
    Ok(sectors)
}

/// Electron numbers picked by the selector; `All` means every value in
/// `default`.
pub fn selected_fillings(
    selector: Selector,
    n_sites: usize,
    default: impl Iterator<Item = usize>,
) -> Result<Vec<usize>, Failure> {
    let fillings: Vec<usize> = match selector {
        Selector::Sector(s) => {
            check_sector(n_sites, s)?;
            vec![s.n_electrons()]
        }
        Selector::Filling(n_e) => vec![n_e],
        Selector::All => default.collect(),
    };
    for &n_e in &fillings {
        check_filling(n_sites, n_e)?;
    }
    Ok(fillings)
}

/// Verification needs complete spectra; a Lanczos fallback is a cap hit.
pub fn require_complete(spectra: &[SectorSpectrum], dense_cap: usize) -> Result<(), Failure> {
    match spectra.iter().find(|s| s.partial()) {
        Some(s) => Err(Failure::Cap(format!(
            "sector ({}, {}) exceeds the dense cap {dense_cap}; only the lowest levels were computed",
            s.sector.n_up, s.sector.n_down
        ))),
        None => Ok(()),
    }
}

pub fn require_attractive(spec: &LatticeSpec) -> Result<(), Failure> {
    if spec.interactions().iter().all(|&u| u < 0.0) {
        Ok(())
    } else {
        Err(Failure::hypothesis("U_x not strictly negative"))
    }
}

pub fn require_connected(spec: &LatticeSpec) -> Result<(), Failure> {
    if is_connected(spec).connected {
        Ok(())
    } else {
        Err(Failure::hypothesis("lattice not connected"))
    }
}

/// Whether some state within the degeneracy tolerance of the lowest level
/// is a spin singlet.
pub fn ground_has_singlet(spectra: &[SectorSpectrum], deg_tol: f64) -> bool {
    let records = lieb_towers::spectra::all_records(spectra);
    let e0 = records
        .iter()
        .map(|r| r.energy)
        .fold(f64::INFINITY, f64::min);
    let tol = deg_tol * (1.0 + e0.abs());
    records
        .iter()
        .any(|r| r.energy - e0 < tol && r.s == lieb_towers::HalfInt::ZERO)
}
