//! Exact diagonalization toolkit for Hubbard-type lattice models: sector
//! bases, operator builders, spectra with spin and pseudospin labels,
//! electron-phonon models, and the checks built on them.

pub mod error;
pub mod fockspace;
pub mod halfint;
pub mod io;
pub mod lattice;
pub mod mbgraph;
pub mod operators;
pub mod phonon;
pub mod pph;
pub mod random;
pub mod sparse;
pub mod spectra;
pub mod srp;

pub use error::{Error, Result};
pub use fockspace::{ConfigBasis, FockState, Sector, SectorBasis, Spin};
pub use halfint::HalfInt;
pub use lattice::{LatticeSpec, Sublattice};
pub use sparse::SparseMatrix;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    pub mod overview {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    pub mod lattices {}
    #[doc = include_str!("../../../book/src/sectors.md")]
    pub mod sectors {}
    #[doc = include_str!("../../../book/src/towers.md")]
    pub mod towers {}
    #[doc = include_str!("../../../book/src/particle_hole.md")]
    pub mod particle_hole {}
    #[doc = include_str!("../../../book/src/positivity.md")]
    pub mod positivity {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    pub mod configuration {}
    #[doc = include_str!("../../../book/src/phonons.md")]
    pub mod phonons {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
