use std::fmt;

use lieb_towers::Error;

/// Reasons a command stops without a report.
#[derive(Debug)]
pub enum Failure {
    Parse(String),
    Cap(String),
    Labeling(String),
    Hypothesis(String),
    Other(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Cap(_) => 3,
            Failure::Labeling(_) => 4,
            Failure::Hypothesis(_) => 5,
        }
    }

    pub fn hypothesis(name: &str) -> Self {
        Failure::Hypothesis(name.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Parse(m) => write!(f, "parse error: {m}"),
            Failure::Cap(m) => write!(f, "cap exceeded: {m}"),
            Failure::Labeling(m) => write!(f, "labeling failure: {m}"),
            Failure::Hypothesis(m) => write!(f, "hypothesis violated: {m}"),
            Failure::Other(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Parse(m) => Failure::Parse(m),
            Error::Json(_)
            | Error::SiteOutOfRange { .. }
            | Error::NonFinite { .. }
            | Error::EmptyLattice
            | Error::TooManySites(_)
            | Error::LengthMismatch { .. }
            | Error::ConflictingBond { .. }
            | Error::InvalidBipartition { .. }
            | Error::InvalidSublatticeLabel(_)
            | Error::OccupationExceedsSites { .. }
            | Error::InvalidPhonon { .. }
            | Error::RepeatedSite(_) => Failure::Parse(msg),
            Error::CapExceeded { .. } => Failure::Cap(msg),
            Error::LabelingFailure { .. } | Error::NotConserved(_) => Failure::Labeling(msg),
            Error::NotBipartite => Failure::hypothesis("lattice not bipartite"),
            Error::NonUniformInteraction => Failure::hypothesis("U_x not uniform"),
            Error::DiagonalHopping => Failure::hypothesis("diagonal hopping t_xx present"),
            Error::Disconnected { .. } => Failure::hypothesis("lattice not connected"),
            Error::NotBalancedSector { .. } => {
                Failure::hypothesis("sector not balanced (N_up != N_down)")
            }
            Error::NotAttractive(_) => Failure::hypothesis("U_x not strictly negative"),
            Error::NoConvergence { .. }
            | Error::NonSymmetric(_)
            | Error::DimensionMismatch(_)
            | Error::EnergyMismatch { .. }
            | Error::InvalidPath(_) => Failure::Other(msg),
        }
    }
}
