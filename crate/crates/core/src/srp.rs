//! Spin-reflection positivity witnesses for balanced sectors.
//!
//! A state in sector `(N, N)` is a `d × d` matrix `Ψ(X, Y)` over up
//! configurations `X` (rows) and down configurations `Y` (columns), with
//! `d = C(|Λ|, N)`. The energy is
//!
//! ```text
//! E(Ψ) = [Tr(Ψᵀ K Ψ) + Tr(Ψ K Ψᵀ) + Σ_x U_x Tr(Ψᵀ L_x Ψ L_x)] / Tr(Ψᵀ Ψ)
//! ```
//!
//! where `K` is the single-spin hopping matrix and `L_x` the diagonal
//! occupation of site `x`. For attractive `U_x` replacing `Ψ` by `|Ψ|`
//! cannot raise the energy, so `|Ψ|` of a ground state is again a ground
//! state, positive semidefinite and with a nonzero diagonal.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{ConfigBasis, Sector, SectorBasis};
use crate::lattice::LatticeSpec;
use crate::operators::{build_charge_single, build_hubbard, build_kinetic_single};
use crate::sparse::SparseMatrix;
use crate::spectra::{analyze_sector, clusters, AnalysisOptions};

/// Tolerance for calling a reshaped matrix symmetric or antisymmetric.
pub const HERMITICITY_TOL: f64 = 1e-9;
/// `|E(|Ψ|) - E₀|` accepted as equality.
pub const ENERGY_TOL: f64 = 1e-8;
/// Diagonal entries above this count as nonzero.
pub const DIAGONAL_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
const CROSS_CHECK_TOL: f64 = 1e-9;

/// Unit factor applied to the raw matrix to make it self-adjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugePhase {
    /// `Ψᵀ = Ψ`; the matrix itself is self-adjoint.
    One,
    /// `Ψᵀ = -Ψ`; `iΨ` is self-adjoint.
    I,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PsiMatrix {
    pub d: usize,
    /// Real matrix before the gauge phase, Frobenius norm 1.
    pub matrix: DMatrix<f64>,
    pub gauge_phase: GaugePhase,
    /// `‖cΨ - (cΨ)†‖_F` for the recorded phase `c`.
    pub hermiticity_residual: f64,
}

impl PsiMatrix {
    /// Row-major flattening back to the sector vector.
    pub fn flatten(&self) -> DVector<f64> {
        DVector::from_iterator(self.d * self.d, self.matrix.transpose().iter().copied())
    }

    /// Eigenvalues of the self-adjoint matrix `cΨ`.
    pub fn self_adjoint_eigenvalues(&self) -> Vec<f64> {
        match self.gauge_phase {
            GaugePhase::One => {
                let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
                sym.symmetric_eigenvalues().iter().copied().collect()
            }
            GaugePhase::I => {
                // iΨ has eigenvalues ±σ_k, the singular values of Ψ
                let sv = self.matrix.singular_values();
                sv.iter().flat_map(|&s| [s, -s]).take(self.d).collect()
            }
        }
    }

    /// `|cΨ| = sqrt((cΨ)† (cΨ)) = sqrt(ΨᵀΨ)`, a real symmetric matrix.
    pub fn abs(&self) -> DMatrix<f64> {
        match self.gauge_phase {
            GaugePhase::One => {
                let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
                let e = sym.symmetric_eigen();
                let w = DMatrix::from_diagonal(&e.eigenvalues.map(f64::abs));
                &e.eigenvectors * w * e.eigenvectors.transpose()
            }
            GaugePhase::I => {
                let e = (self.matrix.transpose() * &self.matrix).symmetric_eigen();
                let w = DMatrix::from_diagonal(&e.eigenvalues.map(|l| l.max(0.0).sqrt()));
                &e.eigenvectors * w * e.eigenvectors.transpose()
            }
        }
    }
}

fn balanced(basis: &SectorBasis) -> Result<usize> {
    let Sector { n_up, n_down } = basis.sector();
    if n_up != n_down {
        return Err(Error::NotBalancedSector { n_up, n_down });
    }
    Ok(n_up)
}

fn raw_matrix(v: &DVector<f64>, basis: &SectorBasis) -> Result<DMatrix<f64>> {
    balanced(basis)?;
    let d = basis.up().len();
    if v.len() != d * d {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} in a {}x{} sector",
            v.len(),
            d,
            d
        )));
    }
    Ok(DMatrix::from_row_slice(d, d, v.as_slice()))
}

fn gauge(mut m: DMatrix<f64>) -> PsiMatrix {
    let norm = m.norm();
    if norm > 0.0 {
        m /= norm;
    }
    let sym_res = (&m - m.transpose()).norm();
    let anti_res = (&m + m.transpose()).norm();
    let (gauge_phase, hermiticity_residual) = if anti_res < sym_res {
        (GaugePhase::I, anti_res)
    } else {
        (GaugePhase::One, sym_res)
    };
    PsiMatrix {
        d: m.nrows(),
        matrix: m,
        gauge_phase,
        hermiticity_residual,
    }
}

/// Reshapes a sector `(N, N)` vector into `Ψ(X, Y)` and picks the phase
/// that brings it closest to self-adjoint.
pub fn reshape_to_matrix(v: &DVector<f64>, basis: &SectorBasis) -> Result<PsiMatrix> {
    Ok(gauge(raw_matrix(v, basis)?))
}

/// How the ground representative was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Representative {
    /// Non-degenerate ground state.
    Unique,
    /// Symmetric combination from a degenerate ground space.
    Symmetrized,
    /// Two-dimensional symmetric ground space scanned for a positive
    /// semidefinite combination.
    AngleScan,
    /// Symmetric ground space of dimension above two; one combination kept
    /// without a search.
    Inconclusive,
}

/// Ground state of sector `(N, N)` as a gauge-fixed matrix.
#[derive(Clone, Debug)]
pub struct GroundPsi {
    pub psi: PsiMatrix,
    pub e0: f64,
    pub degeneracy: usize,
    pub representative: Representative,
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Diagonalizes sector `(n, n)` and returns a self-adjoint representative
/// of its ground space.
pub fn ground_psi(spec: &LatticeSpec, n: usize, opts: &AnalysisOptions) -> Result<GroundPsi> {
    let sector = Sector::new(n, n);
    let basis = SectorBasis::new(spec.n_sites(), sector)?;
    let spectrum = analyze_sector(spec, sector, opts)?;
    let eig = &spectrum.eigen;
    let ground = clusters(&eig.values, opts.deg_tol)
        .into_iter()
        .next()
        .expect("nonempty sector");
    let e0 = eig.values[0];
    let g = ground.len();
    let mats: Vec<DMatrix<f64>> = ground
        .map(|c| raw_matrix(&eig.vectors.column(c).into_owned(), &basis))
        .collect::<Result<_>>()?;
    if g == 1 {
        return Ok(GroundPsi {
            psi: gauge(mats[0].clone()),
            e0,
            degeneracy: 1,
            representative: Representative::Unique,
        });
    }

    // Transposition is an involution on the ground space; its +1 eigenspace
    // holds the symmetric representatives.
    let t = DMatrix::from_fn(g, g, |a, b| mats[a].dot(&mats[b].transpose()));
    let e = ((&t + t.transpose()) * 0.5).symmetric_eigen();
    let combine = |coef: &DVector<f64>| {
        let mut m = DMatrix::zeros(mats[0].nrows(), mats[0].ncols());
        for (k, mk) in mats.iter().enumerate() {
            m += mk * coef[k];
        }
        m
    };
    let symmetric: Vec<DMatrix<f64>> = (0..g)
        .filter(|&k| e.eigenvalues[k] > 0.5)
        .map(|k| combine(&e.eigenvectors.column(k).into_owned()))
        .collect();

    let (m, representative) = match symmetric.len() {
        0 => {
            let k = e.eigenvalues.imin();
            (
                combine(&e.eigenvectors.column(k).into_owned()),
                Representative::Symmetrized,
            )
        }
        1 => (symmetric[0].clone(), Representative::Symmetrized),
        2 => {
            let mut best = (f64::NEG_INFINITY, symmetric[0].clone());
            let steps = 3600;
            for i in 0..steps {
                let th = std::f64::consts::TAU * i as f64 / steps as f64;
                let cand = &symmetric[0] * th.cos() + &symmetric[1] * th.sin();
                let lo = min_eig(&cand);
                if lo > best.0 {
                    best = (lo, cand);
                }
            }
            (best.1, Representative::AngleScan)
        }
        _ => (symmetric[0].clone(), Representative::Inconclusive),
    };
    Ok(GroundPsi {
        psi: gauge(m),
        e0,
        degeneracy: g,
        representative,
    })
}

/// Single-spin operators for evaluating the matrix energy functional.
#[derive(Clone, Debug)]
pub struct EnergyFunctional {
    pub kinetic: DMatrix<f64>,
    /// Diagonal of `L_x` per site.
    pub occupation: Vec<DVector<f64>>,
    pub interactions: Vec<f64>,
    hamiltonian: SparseMatrix,
}

impl EnergyFunctional {
    pub fn new(spec: &LatticeSpec, n: usize) -> Result<Self> {
        let single = ConfigBasis::new(spec.n_sites(), n)?;
        let kinetic = build_kinetic_single(spec, &single)?.matrix.to_dense();
        let occupation = (0..spec.n_sites())
            .map(|x| {
                Ok(DVector::from_vec(
                    build_charge_single(x, &single)?.matrix.diagonal(),
                ))
            })
            .collect::<Result<_>>()?;
        let basis = SectorBasis::new(spec.n_sites(), Sector::new(n, n))?;
        Ok(EnergyFunctional {
            kinetic,
            occupation,
            interactions: spec.interactions().to_vec(),
            hamiltonian: build_hubbard(spec, &basis)?.matrix,
        })
    }

    /// The matrix-trace form of the energy.
    pub fn trace_energy(&self, psi: &DMatrix<f64>) -> f64 {
        let k = &self.kinetic;
        let mut num = (psi.transpose() * k * psi).trace() + (psi * k * psi.transpose()).trace();
        for (l, &u) in self.occupation.iter().zip(&self.interactions) {
            // Tr(Ψᵀ L Ψ L) = Σ_XY L(X) L(Y) Ψ(X,Y)²
            let mut s = 0.0;
            for r in 0..psi.nrows() {
                for c in 0..psi.ncols() {
                    s += l[r] * l[c] * psi[(r, c)] * psi[(r, c)];
                }
            }
            num += u * s;
        }
        num / psi.norm_squared()
    }

    /// Rayleigh quotient of the sector Hamiltonian on the flattened matrix.
    pub fn quadratic_energy(&self, psi: &DMatrix<f64>) -> f64 {
        let v = DVector::from_iterator(psi.len(), psi.transpose().iter().copied());
        v.dot(&self.hamiltonian.matvec_dvec(&v)) / v.norm_squared()
    }

    /// The trace form, cross-checked against the quadratic form.
    pub fn energy_of(&self, psi: &DMatrix<f64>) -> Result<f64> {
        let trace = self.trace_energy(psi);
        let quadratic = self.quadratic_energy(psi);
        if (trace - quadratic).abs() > CROSS_CHECK_TOL * (1.0 + quadratic.abs()) {
            return Err(Error::EnergyMismatch { trace, quadratic });
        }
        Ok(trace)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PassFlags {
    pub energy: bool,
    pub trace: bool,
    pub diagonal: bool,
}

impl PassFlags {
    pub fn all(self) -> bool {
        self.energy && self.trace && self.diagonal
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub e0: f64,
    pub e_abs_psi: f64,
    /// `Tr|Ψ|`.
    pub trace_abs: f64,
    /// Largest diagonal entry of `|Ψ|`.
    pub max_diag: f64,
    /// Smallest eigenvalue of the gauge-fixed `Ψ`.
    pub psd_min_eig: f64,
    pub already_psd: bool,
    pub hermiticity_residual: f64,
    pub degeneracy: usize,
    pub representative: Representative,
    /// Every `U_x < 0`, the case where the energy claim applies.
    pub attractive: bool,
    pub pass_flags: PassFlags,
}

/// Evaluates `|Ψ|` and the positivity consequences for a ground matrix.
pub fn positivity_witness(
    ground: &GroundPsi,
    functional: &EnergyFunctional,
) -> Result<WitnessReport> {
    let psi = &ground.psi;
    let abs = psi.abs();
    let e_abs = functional.energy_of(&abs)?;
    let trace_abs = abs.trace();
    let max_diag = abs
        .diagonal()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let psd_min_eig = psi
        .self_adjoint_eigenvalues()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(WitnessReport {
        e0: ground.e0,
        e_abs_psi: e_abs,
        trace_abs,
        max_diag,
        psd_min_eig,
        already_psd: psd_min_eig >= -PSD_TOL,
        hermiticity_residual: psi.hermiticity_residual,
        degeneracy: ground.degeneracy,
        representative: ground.representative,
        attractive: functional.interactions.iter().all(|&u| u < 0.0),
        pass_flags: PassFlags {
            energy: (e_abs - ground.e0).abs() < ENERGY_TOL,
            trace: trace_abs > 0.0,
            diagonal: max_diag > DIAGONAL_TOL,
        },
    })
}

/// `ground_psi` followed by `positivity_witness`.
pub fn witness_for(spec: &LatticeSpec, n: usize, opts: &AnalysisOptions) -> Result<WitnessReport> {
    let ground = ground_psi(spec, n, opts)?;
    positivity_witness(&ground, &EnergyFunctional::new(spec, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{open_chain, two_site};

    #[test]
    fn two_site_attractive_matrix() {
        let g = ground_psi(&two_site(1.0, -4.0), 1, &AnalysisOptions::default()).unwrap();
        let m = &g.psi.matrix;
        assert_eq!(g.psi.gauge_phase, GaugePhase::One);
        assert!((m[(0, 0)] - m[(1, 1)]).abs() < 1e-12);
        assert!((m[(0, 1)] - m[(1, 0)]).abs() < 1e-12);
        assert!(m[(0, 0)] > 0.0 && m[(0, 1)] > 0.0);
        // ground vector of [[U, -2t], [-2t, 0]]: split / pair = (U - E₀) / 2t
        let e0 = -2.0 - 2.0 * 2f64.sqrt();
        assert!((m[(0, 1)] / m[(0, 0)] - (-4.0 - e0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_site_pair() {
        let spec = LatticeSpec::new(1, &[], &[0.0]).unwrap();
        let g = ground_psi(&spec, 1, &AnalysisOptions::default()).unwrap();
        assert_eq!(g.psi.matrix, DMatrix::from_element(1, 1, 1.0));
    }

    #[test]
    fn scaled_identity_energy() {
        let spec = two_site(1.0, -4.0);
        let f = EnergyFunctional::new(&spec, 1).unwrap();
        let psi = DMatrix::identity(2, 2) / 2f64.sqrt();
        assert!((f.energy_of(&psi).unwrap() + 4.0).abs() < 1e-12);
    }

    #[test]
    fn flatten_round_trip() {
        let basis = SectorBasis::new(3, Sector::new(1, 1)).unwrap();
        let v = DVector::from_fn(9, |i, _| i as f64 - 4.0);
        let psi = reshape_to_matrix(&v, &basis).unwrap();
        assert!((psi.flatten() * v.norm() - &v).norm() < 1e-12);
    }

    #[test]
    fn unbalanced_sector_rejected() {
        let basis = SectorBasis::new(3, Sector::new(2, 1)).unwrap();
        let v = DVector::zeros(basis.len());
        assert!(matches!(
            reshape_to_matrix(&v, &basis),
            Err(Error::NotBalancedSector { .. })
        ));
    }

    #[test]
    fn two_site_witness() {
        let w = witness_for(&two_site(1.0, -4.0), 1, &AnalysisOptions::default()).unwrap();
        assert!(w.pass_flags.all());
        assert!(w.already_psd);
        assert!(w.attractive);
        assert_eq!(w.representative, Representative::Unique);
    }

    #[test]
    fn attractive_chain_witness() {
        let w = witness_for(
            &open_chain(4, 1.0, -2.0).unwrap(),
            2,
            &AnalysisOptions::default(),
        )
        .unwrap();
        assert!(w.pass_flags.all(), "{w:?}");
        assert!(w.hermiticity_residual < HERMITICITY_TOL);
    }

    #[test]
    fn flipped_weight_raises_energy() {
        let spec = open_chain(4, 1.0, -2.0).unwrap();
        let g = ground_psi(&spec, 2, &AnalysisOptions::default()).unwrap();
        let f = EnergyFunctional::new(&spec, 2).unwrap();
        let e = g.psi.matrix.clone().symmetric_eigen();
        for k in 0..e.eigenvalues.len() {
            let mut w = e.eigenvalues.clone();
            w[k] = -w[k];
            let m = &e.eigenvectors * DMatrix::from_diagonal(&w) * e.eigenvectors.transpose();
            assert!(f.energy_of(&m).unwrap() >= g.e0 - 1e-10);
        }
    }

    #[test]
    fn disconnected_degenerate_ground() {
        // two separate pairs of sites: the (1,1) ground space is two-fold
        let spec = LatticeSpec::new(4, &[(0, 1, -1.0), (2, 3, -1.0)], &[-2.0; 4]).unwrap();
        let g = ground_psi(&spec, 1, &AnalysisOptions::default()).unwrap();
        assert_eq!(g.degeneracy, 2);
        assert_eq!(g.representative, Representative::AngleScan);
        let w = positivity_witness(&g, &EnergyFunctional::new(&spec, 1).unwrap()).unwrap();
        assert!(w.pass_flags.all(), "{w:?}");
        assert!(w.already_psd);
    }
}
