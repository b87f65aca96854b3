//! Partial particle-hole transformation on bipartite lattices.
//!
//! Up spins are exchanged for holes with a sublattice sign,
//! `c_x↑ → (-1)^ε(x) d†_x↑`, while down spins are untouched. On a bipartite
//! lattice with uniform `U` and no diagonal hopping this maps sector
//! `(N_↑, N_↓)` of `H(U)` onto sector `(|Λ| - N_↑, N_↓)` of `H(-U)`:
//!
//! ```text
//! P H(U) Pᵀ = H(-U) + U N_↓
//! ```
//!
//! so every level `E` of the source appears as `E - U N_↓` in the target,
//! and spin and pseudospin labels trade places.
//!
//! On basis states `P |X↑, Y↓⟩ = s(X) |X̄↑, Y↓⟩` with `X̄` the complement
//! of `X` and `s(X) = (-1)^{Σ_{x∈X} (x + ε(x))}` for 0-based sites `x`.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{FockState, Sector, SectorBasis};
use crate::halfint::HalfInt;
use crate::lattice::{detect_bipartition, LatticeSpec};
use crate::operators::build_hubbard;
use crate::sparse::SparseMatrix;
use crate::spectra::{SectorSpectrum, SpectrumRecord};

/// Largest entrywise deviation accepted for the conjugated Hamiltonian.
pub const CONJUGATION_TOL: f64 = 1e-12;
/// Largest level deviation accepted for the shifted spectra.
pub const SPECTRAL_TOL: f64 = 1e-9;
/// Overlap weight a source level must place on label-swapped partners.
pub const SWAP_WEIGHT_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct PphMap {
    pub source_spec: LatticeSpec,
    pub source_sector: Sector,
    pub target_spec: LatticeSpec,
    pub target_sector: Sector,
    /// `U N_↓`; target levels are source levels minus this.
    pub energy_shift: f64,
    /// Signed permutation, target rows by source columns.
    pub matrix: SparseMatrix,
}

/// Sign `s(X)` of the up configuration `mask`.
pub fn configuration_sign(mask: u32, epsilon: &[u8]) -> f64 {
    let mut parity = 0usize;
    for (x, &e) in epsilon.iter().enumerate() {
        if mask >> x & 1 == 1 {
            parity += x + e as usize;
        }
    }
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// The transformation out of `sector` of `spec`.
pub fn build_pph(spec: &LatticeSpec, sector: Sector) -> Result<PphMap> {
    let spec = match spec.bipartition() {
        Some(_) => spec.clone(),
        None if detect_bipartition(spec).is_bipartite => spec.clone().with_detected_bipartition(),
        None => return Err(Error::NotBipartite),
    };
    let u = spec
        .uniform_interaction()
        .ok_or(Error::NonUniformInteraction)?;
    if spec.has_diagonal_hopping() {
        return Err(Error::DiagonalHopping);
    }
    let n = spec.n_sites();
    let epsilon: Vec<u8> = spec
        .bipartition()
        .unwrap()
        .iter()
        .map(|s| s.epsilon())
        .collect();
    let source = SectorBasis::new(n, sector)?;
    let target_sector = Sector::new(n - sector.n_up.min(n), sector.n_down);
    let target = SectorBasis::new(n, target_sector)?;
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };

    let triplets = source.states().enumerate().map(|(col, st)| {
        let image = FockState::new(!st.up & full, st.down);
        let row = target
            .index(image)
            .expect("complement lies in the target sector");
        (row, col, configuration_sign(st.up, &epsilon))
    });
    let matrix =
        SparseMatrix::from_triplets(target.len(), source.len(), triplets.collect::<Vec<_>>());
    let neg: Vec<f64> = vec![-u; n];
    Ok(PphMap {
        target_spec: spec.with_interactions(&neg)?,
        source_spec: spec,
        source_sector: sector,
        target_sector,
        energy_shift: u * sector.n_down as f64,
        matrix,
    })
}

impl PphMap {
    /// `P v` for a source vector.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.matrix.matvec_dvec(v)
    }

    /// `max |P H_source Pᵀ - H_target - U N_↓|`.
    pub fn conjugation_residual(&self) -> Result<f64> {
        let n = self.source_spec.n_sites();
        let hs =
            build_hubbard(&self.source_spec, &SectorBasis::new(n, self.source_sector)?)?.matrix;
        let ht =
            build_hubbard(&self.target_spec, &SectorBasis::new(n, self.target_sector)?)?.matrix;
        let conj = self.matrix.matmul(&hs)?.matmul(&self.matrix.transpose())?;
        let shift = SparseMatrix::identity(ht.rows()).scale(self.energy_shift);
        Ok(conj.sub(&ht)?.sub(&shift)?.max_abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelMatch {
    pub source_energy: f64,
    pub target_energy: f64,
    /// `target - (source - U N_↓)`.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub energy_shift: f64,
    pub conjugation_residual: f64,
    pub spectral_deviation: f64,
    /// Index of the first level beyond tolerance.
    pub first_mismatch: Option<usize>,
    pub levels: Vec<LevelMatch>,
    pub pass: bool,
}

/// Compares the sorted spectra of both sides after the shift, along with
/// the entrywise conjugation identity.
pub fn verify_spectral_correspondence(
    map: &PphMap,
    source: &SectorSpectrum,
    target: &SectorSpectrum,
) -> Result<CorrespondenceReport> {
    if source.sector != map.source_sector || target.sector != map.target_sector {
        return Err(Error::DimensionMismatch(
            "spectra do not belong to the mapped sectors".into(),
        ));
    }
    if source.eigen.values.len() != target.eigen.values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} source levels against {} target levels",
            source.eigen.values.len(),
            target.eigen.values.len()
        )));
    }
    let conjugation_residual = map.conjugation_residual()?;
    let levels: Vec<LevelMatch> = source
        .eigen
        .values
        .iter()
        .zip(&target.eigen.values)
        .map(|(&es, &et)| LevelMatch {
            source_energy: es,
            target_energy: et,
            deviation: et - (es - map.energy_shift),
        })
        .collect();
    let spectral_deviation = levels.iter().map(|l| l.deviation.abs()).fold(0.0, f64::max);
    let first_mismatch = levels
        .iter()
        .position(|l| l.deviation.abs() >= SPECTRAL_TOL);
    Ok(CorrespondenceReport {
        energy_shift: map.energy_shift,
        conjugation_residual,
        spectral_deviation,
        first_mismatch,
        pass: conjugation_residual < CONJUGATION_TOL && first_mismatch.is_none(),
        levels,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Labels {
    pub s: HalfInt,
    pub m: HalfInt,
    pub j: Option<HalfInt>,
    pub m_j: HalfInt,
}

impl From<&SpectrumRecord> for Labels {
    fn from(r: &SpectrumRecord) -> Self {
        Labels {
            s: r.s,
            m: r.m,
            j: r.j,
            m_j: r.m_j,
        }
    }
}

impl Labels {
    /// Labels expected on the image: `s ↔ j`, `m → -m_j`, `m_j → -m`.
    pub fn swapped(&self) -> Option<Labels> {
        Some(Labels {
            s: self.j?,
            m: -self.m_j,
            j: Some(self.s),
            m_j: -self.m,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwapLevel {
    pub source_energy: f64,
    pub source: Labels,
    pub expected: Option<Labels>,
    /// Weight of `P v` on target eigenvectors carrying the expected labels
    /// at the shifted energy.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelSwapReport {
    pub levels: Vec<SwapLevel>,
    pub min_weight: f64,
    /// First level whose image is not carried by label-swapped partners.
    pub first_failure: Option<usize>,
    pub pass: bool,
}

/// Pushes every labeled source eigenvector through the map and measures how
/// much of it lands on target eigenvectors with swapped labels.
pub fn verify_label_swap(
    map: &PphMap,
    source: &SectorSpectrum,
    target: &SectorSpectrum,
) -> Result<LabelSwapReport> {
    if source.sector != map.source_sector || target.sector != map.target_sector {
        return Err(Error::DimensionMismatch(
            "spectra do not belong to the mapped sectors".into(),
        ));
    }
    let mut levels = Vec::with_capacity(source.records.len());
    for (k, rec) in source.records.iter().enumerate() {
        let image = map.apply(&source.eigen.vectors.column(k).into_owned());
        let labels = Labels::from(rec);
        let expected = labels.swapped();
        let shifted = rec.energy - map.energy_shift;
        let tol = SPECTRAL_TOL * (1.0 + shifted.abs());
        let weight = match expected {
            None => 0.0,
            Some(exp) => target
                .records
                .iter()
                .enumerate()
                .filter(|(_, t)| (t.energy - shifted).abs() < tol && Labels::from(*t) == exp)
                .map(|(c, _)| target.eigen.vectors.column(c).dot(&image).powi(2))
                .sum(),
        };
        levels.push(SwapLevel {
            source_energy: rec.energy,
            source: labels,
            expected,
            weight,
        });
    }
    let min_weight = levels
        .iter()
        .map(|l| l.weight)
        .fold(f64::INFINITY, f64::min);
    let first_failure = levels.iter().position(|l| l.weight < 1.0 - SWAP_WEIGHT_TOL);
    Ok(LabelSwapReport {
        pass: first_failure.is_none(),
        levels,
        min_weight,
        first_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{lieb_chain, open_chain, two_site};
    use crate::spectra::{analyze_sector, AnalysisOptions};

    fn both(spec: &LatticeSpec, sector: Sector) -> (PphMap, SectorSpectrum, SectorSpectrum) {
        let map = build_pph(spec, sector).unwrap();
        let opts = AnalysisOptions::default();
        let s = analyze_sector(&map.source_spec, map.source_sector, &opts).unwrap();
        let t = analyze_sector(&map.target_spec, map.target_sector, &opts).unwrap();
        (map, s, t)
    }

    #[test]
    fn two_site_balanced() {
        let (map, s, t) = both(&two_site(1.0, -4.0), Sector::new(1, 1));
        assert_eq!(map.target_sector, Sector::new(1, 1));
        assert_eq!(map.energy_shift, -4.0);
        let r = verify_spectral_correspondence(&map, &s, &t).unwrap();
        assert!(r.pass, "{r:?}");
        // ground level lands on E₋ of the repulsive model
        assert!((t.eigen.values[0] - (2.0 - 8f64.sqrt())).abs() < 1e-12);
        assert!(verify_label_swap(&map, &s, &t).unwrap().pass);
    }

    #[test]
    fn vacuum_maps_to_polarized() {
        let (map, s, t) = both(&two_site(1.0, 3.0), Sector::new(0, 0));
        assert_eq!(map.target_sector, Sector::new(2, 0));
        assert_eq!(map.energy_shift, 0.0);
        let swap = verify_label_swap(&map, &s, &t).unwrap();
        assert!(swap.pass);
        let exp = swap.levels[0].expected.unwrap();
        assert_eq!((exp.s, exp.j), (HalfInt::from_int(1), Some(HalfInt::ZERO)));
    }

    #[test]
    fn lieb_dimensions() {
        let map = build_pph(&lieb_chain(2, 1.0, 3.0).unwrap(), Sector::new(2, 2)).unwrap();
        assert_eq!(map.target_sector, Sector::new(4, 2));
        assert_eq!((map.matrix.rows(), map.matrix.cols()), (225, 225));
        assert!(map.conjugation_residual().unwrap() < CONJUGATION_TOL);
    }

    #[test]
    fn orthogonal_signed_permutation() {
        let map = build_pph(&open_chain(4, 1.0, -2.0).unwrap(), Sector::new(1, 2)).unwrap();
        let ptp = map.matrix.transpose().matmul(&map.matrix).unwrap();
        assert_eq!(ptp, SparseMatrix::identity(map.matrix.cols()));
        assert!(map.matrix.iter().all(|(_, _, v)| v.abs() == 1.0));
    }

    #[test]
    fn hypotheses_enforced() {
        let tri =
            LatticeSpec::new(3, &[(0, 1, -1.0), (1, 2, -1.0), (0, 2, -1.0)], &[-1.0; 3]).unwrap();
        assert!(matches!(
            build_pph(&tri, Sector::new(1, 1)),
            Err(Error::NotBipartite)
        ));
        let nonuni = two_site(1.0, 1.0).with_interactions(&[1.0, 2.0]).unwrap();
        assert!(matches!(
            build_pph(&nonuni, Sector::new(1, 1)),
            Err(Error::NonUniformInteraction)
        ));
        let diag = LatticeSpec::new(2, &[(0, 1, -1.0), (1, 1, 0.2)], &[1.0, 1.0]).unwrap();
        assert!(matches!(
            build_pph(&diag, Sector::new(1, 1)),
            Err(Error::DiagonalHopping)
        ));
    }

    #[test]
    fn free_model_shift_is_zero() {
        let (map, s, t) = both(&open_chain(4, 1.0, 0.0).unwrap(), Sector::new(2, 1));
        assert_eq!(map.energy_shift, 0.0);
        assert!(verify_spectral_correspondence(&map, &s, &t).unwrap().pass);
    }
}
