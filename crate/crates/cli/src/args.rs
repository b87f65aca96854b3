use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use lieb_towers::mbgraph::DEFAULT_CENSUS_CAP;
use lieb_towers::phonon::DEFAULT_EP_CAP;
use lieb_towers::spectra::{DEFAULT_DEGENERACY_TOL, DEFAULT_DENSE_CAP};
use lieb_towers::Sector;

use crate::failure::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "lieb-towers",
    version,
    about = "Symmetry-resolved exact diagonalization for Hubbard and Holstein models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Model file (JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Restrict to one sector.
    #[arg(long, global = true, num_args = 2, value_names = ["N_UP", "N_DOWN"], conflicts_with = "ne")]
    pub sector: Option<Vec<usize>>,

    /// Restrict to one electron number (particles per spin for `path`).
    #[arg(long, global = true)]
    pub ne: Option<usize>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, default_value_t = 50)]
    pub cases: usize,

    #[arg(long = "max-sites", global = true, default_value_t = 6)]
    pub max_sites: usize,

    /// Oscillator cutoff for every phonon mode, overriding the file.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,

    #[arg(long = "deg-tol", global = true, default_value_t = DEFAULT_DEGENERACY_TOL)]
    pub deg_tol: f64,

    #[arg(long = "dense-cap", global = true, default_value_t = DEFAULT_DENSE_CAP)]
    pub dense_cap: usize,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Labeled spectrum of the selected sectors.
    Spectrum,
    /// Run one named check on the input model.
    Verify {
        #[arg(value_enum)]
        which: Check,
    },
    /// Randomized attractive-lattice suite.
    Suite,
    /// Connecting path in the configuration lattice (1-based sites).
    Path {
        #[arg(long, num_args = 1..)]
        from: Option<Vec<usize>>,
        #[arg(long, num_args = 1..)]
        to: Option<Vec<usize>>,
    },
    /// Partial particle-hole correspondence, level by level.
    Pph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Theorem1,
    Theorem3,
    LiebSpin,
    Towers,
    Pph,
    Srp,
    Lemma1,
    HolsteinSinglet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    Sector(Sector),
    Filling(usize),
    All,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub selector: Selector,
    pub seed: u64,
    pub cases: usize,
    pub max_sites: usize,
    pub n_max: Option<usize>,
    pub deg_tol: f64,
    pub dense_cap: usize,
    pub census_cap: usize,
    pub ep_cap: usize,
}

impl Cli {
    pub fn config(&self) -> Result<RunConfig, Failure> {
        if !(self.deg_tol.is_finite() && self.deg_tol > 0.0) {
            return Err(Failure::Parse("--deg-tol must be positive".into()));
        }
        if self.dense_cap < 1 {
            return Err(Failure::Parse("--dense-cap must be at least 1".into()));
        }
        if self.nmax == Some(0) {
            return Err(Failure::Parse("--nmax must be at least 1".into()));
        }
        let selector = match (&self.sector, self.ne) {
            (Some(s), _) => Selector::Sector(Sector::new(s[0], s[1])),
            (None, Some(n)) => Selector::Filling(n),
            (None, None) => Selector::All,
        };
        Ok(RunConfig {
            input: self.input.clone(),
            selector,
            seed: self.seed,
            cases: self.cases,
            max_sites: self.max_sites,
            n_max: self.nmax,
            deg_tol: self.deg_tol,
            dense_cap: self.dense_cap,
            census_cap: DEFAULT_CENSUS_CAP,
            ep_cap: DEFAULT_EP_CAP,
        })
    }
}
