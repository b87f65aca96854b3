use thiserror::Error;

/// Errors produced while building or analysing a model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("site index {index} out of range for a lattice with {n_sites} sites")]
    SiteOutOfRange { index: usize, n_sites: usize },

    #[error("non-finite {what} value {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("lattice must have at least one site")]
    EmptyLattice,

    #[error("lattice with {0} sites exceeds the supported maximum of 16")]
    TooManySites(usize),

    #[error("expected {expected} {what}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("bond ({x}, {y}) listed twice with different hopping {first} and {second}")]
    ConflictingBond {
        x: usize,
        y: usize,
        first: f64,
        second: f64,
    },

    #[error("bipartition puts bonded sites {x} and {y} on the same sublattice")]
    InvalidBipartition { x: usize, y: usize },

    #[error("bipartition entries must be 0 or 1, found {0}")]
    InvalidSublatticeLabel(u8),

    #[error("occupation ({n_up}, {n_down}) exceeds {n_sites} sites")]
    OccupationExceedsSites {
        n_sites: usize,
        n_up: usize,
        n_down: usize,
    },

    #[error("operator dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("lattice is not bipartite")]
    NotBipartite,

    #[error("interaction U_x is not uniform across sites")]
    NonUniformInteraction,

    #[error("lattice has diagonal hopping t_xx, which breaks pseudospin symmetry")]
    DiagonalHopping,

    #[error("site {0} repeated in configuration")]
    RepeatedSite(usize),

    #[error("dimension {required} exceeds configured cap {cap}")]
    CapExceeded { required: usize, cap: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    #[error("iterative eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("labeling failed for cluster at E = {energy}: casimir residual {residual:e}")]
    LabelingFailure { energy: f64, residual: f64 },

    #[error("operator does not commute with the Hamiltonian (residual {0:e})")]
    NotConserved(f64),

    #[error("lattice is disconnected ({} components)", components.len())]
    Disconnected { components: Vec<Vec<usize>> },

    #[error("invalid configuration path: {0}")]
    InvalidPath(String),

    #[error("phonon parameter {what} must be positive and finite, found {value}")]
    InvalidPhonon { what: &'static str, value: f64 },

    #[error("sector ({n_up}, {n_down}) does not have equal up and down occupation")]
    NotBalancedSector { n_up: usize, n_down: usize },

    #[error("interaction U_x = {0} is not attractive")]
    NotAttractive(f64),

    #[error("energy functional disagrees with the quadratic form: {trace} vs {quadratic}")]
    EnergyMismatch { trace: f64, quadratic: f64 },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
