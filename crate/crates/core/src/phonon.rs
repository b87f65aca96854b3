//! Electron-phonon models with linear charge coupling.
//!
//! The supported family is
//!
//! ```text
//! H = Σ_σ Σ_xy t_xy c†_xσ c_yσ + Σ_x G_x(q) (n_x↑ + n_x↓)
//!   + Σ_i [ p_i² / 2m_i + m_i ω_i² q_i² / 2 ] + Σ_i λ_i q_i⁴
//! ```
//!
//! with `G_x(q) = Σ_i g_ix q_i` and hopping independent of the phonon
//! coordinates. Each mode lives in an oscillator number basis truncated at
//! `n_max` quanta, with `q = (a + a†) / √(2mω)` (ħ = 1).
//!
//! Every truncated operator is the exact compression `P O P` of its
//! untruncated counterpart onto the kept levels, so enlarging `n_max` nests
//! the variational spaces and the ground energy can only go down.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::SectorBasis;
use crate::lattice::LatticeSpec;
use crate::operators::{build_charge, build_kinetic, BasisLabel, OperatorMatrix};
use crate::sparse::SparseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhononSpec {
    pub masses: Vec<f64>,
    pub frequencies: Vec<f64>,
    /// `coupling[i][x] = g_ix`, one row per mode.
    pub coupling: Vec<Vec<f64>>,
    /// Quartic anharmonicity `λ_i >= 0` per mode.
    pub quartic: Vec<f64>,
    /// Highest kept oscillator level per mode.
    pub n_max: Vec<usize>,
}

impl PhononSpec {
    pub fn new(
        masses: Vec<f64>,
        frequencies: Vec<f64>,
        coupling: Vec<Vec<f64>>,
        quartic: Vec<f64>,
        n_max: Vec<usize>,
    ) -> Result<Self> {
        let spec = PhononSpec {
            masses,
            frequencies,
            coupling,
            quartic,
            n_max,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// One mode per site with `g_ix = g δ_ix`, no anharmonicity.
    pub fn holstein(n_sites: usize, g: f64, omega: f64, mass: f64, n_max: usize) -> Result<Self> {
        let coupling = (0..n_sites)
            .map(|i| (0..n_sites).map(|x| if i == x { g } else { 0.0 }).collect())
            .collect();
        Self::new(
            vec![mass; n_sites],
            vec![omega; n_sites],
            coupling,
            vec![0.0; n_sites],
            vec![n_max; n_sites],
        )
    }

    pub fn n_modes(&self) -> usize {
        self.masses.len()
    }

    pub fn with_n_max(&self, n_max: usize) -> Self {
        PhononSpec {
            n_max: vec![n_max; self.n_modes()],
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nu = self.masses.len();
        for (what, len) in [
            ("frequencies", self.frequencies.len()),
            ("coupling rows", self.coupling.len()),
            ("quartic coefficients", self.quartic.len()),
            ("truncations", self.n_max.len()),
        ] {
            if len != nu {
                return Err(Error::LengthMismatch {
                    what,
                    expected: nu,
                    found: len,
                });
            }
        }
        for &m in &self.masses {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::InvalidPhonon {
                    what: "mass",
                    value: m,
                });
            }
        }
        for &w in &self.frequencies {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidPhonon {
                    what: "frequency",
                    value: w,
                });
            }
        }
        for &l in &self.quartic {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::InvalidPhonon {
                    what: "quartic coefficient",
                    value: l,
                });
            }
        }
        for &n in &self.n_max {
            if n < 1 {
                return Err(Error::InvalidPhonon {
                    what: "n_max",
                    value: n as f64,
                });
            }
        }
        for row in &self.coupling {
            for &g in row {
                if !g.is_finite() {
                    return Err(Error::NonFinite {
                        what: "coupling",
                        value: g,
                    });
                }
            }
        }
        Ok(())
    }

    fn check_sites(&self, n_sites: usize) -> Result<()> {
        for row in &self.coupling {
            if row.len() != n_sites {
                return Err(Error::LengthMismatch {
                    what: "coupling columns",
                    expected: n_sites,
                    found: row.len(),
                });
            }
        }
        Ok(())
    }

    /// Dimension of the truncated phonon space, `Π_i (n_max_i + 1)`.
    pub fn phonon_dim(&self) -> usize {
        self.n_max.iter().map(|n| n + 1).product()
    }

    pub fn coupling_matrix(&self) -> DMatrix<f64> {
        let cols = self.coupling.first().map_or(0, Vec::len);
        DMatrix::from_fn(self.n_modes(), cols, |i, x| self.coupling[i][x])
    }
}

/// Single-mode matrices in the truncated number basis `|0⟩ … |n_max⟩`.
#[derive(Clone, Debug)]
pub struct OscillatorOps {
    pub q: SparseMatrix,
    /// `p / i`, a real antisymmetric matrix.
    pub p_over_i: SparseMatrix,
    pub p_squared: SparseMatrix,
    pub q_fourth: SparseMatrix,
    pub number: SparseMatrix,
    /// `ω (n + 1/2)`, the exact harmonic energies.
    pub harmonic: SparseMatrix,
}

fn ladder_sum(levels: usize, sign: f64) -> SparseMatrix {
    // a + sign·a†, with ⟨k-1|a|k⟩ = √k
    let mut t = Vec::new();
    for k in 1..levels {
        let r = (k as f64).sqrt();
        t.push((k - 1, k, r));
        t.push((k, k - 1, sign * r));
    }
    SparseMatrix::from_triplets(levels, levels, t)
}

fn compress(m: &SparseMatrix, keep: usize) -> SparseMatrix {
    SparseMatrix::from_triplets(
        keep,
        keep,
        m.iter().filter(|&(r, c, _)| r < keep && c < keep),
    )
}

/// Matrices of mode `mode` of `spec`.
pub fn build_phonon_ops(spec: &PhononSpec, mode: usize) -> Result<OscillatorOps> {
    spec.validate()?;
    if mode >= spec.n_modes() {
        return Err(Error::LengthMismatch {
            what: "phonon modes",
            expected: mode + 1,
            found: spec.n_modes(),
        });
    }
    let (m, w, n_max) = (spec.masses[mode], spec.frequencies[mode], spec.n_max[mode]);
    Ok(oscillator_ops(m, w, n_max))
}

pub fn oscillator_ops(mass: f64, omega: f64, n_max: usize) -> OscillatorOps {
    let keep = n_max + 1;
    // q⁴ and p² reach at most four levels up, so products formed in a space
    // padded by four levels compress exactly.
    let big = keep + 4;
    let q_scale = 1.0 / (2.0 * mass * omega).sqrt();
    let p_scale = (mass * omega / 2.0).sqrt();

    let q_big = ladder_sum(big, 1.0).scale(q_scale);
    // p = i √(mω/2) (a† - a)
    let p_big = ladder_sum(big, -1.0).scale(-p_scale);

    let q2_big = q_big.matmul(&q_big).unwrap();
    let q4_big = q2_big.matmul(&q2_big).unwrap();
    // p² = (i P)² = -P²
    let p2_big = p_big.matmul(&p_big).unwrap().scale(-1.0);

    let number: Vec<f64> = (0..keep).map(|k| k as f64).collect();
    let harmonic: Vec<f64> = (0..keep).map(|k| omega * (k as f64 + 0.5)).collect();

    OscillatorOps {
        q: compress(&q_big, keep),
        p_over_i: compress(&p_big, keep),
        p_squared: compress(&p2_big, keep),
        q_fourth: compress(&q4_big, keep),
        number: SparseMatrix::from_diagonal(&number),
        harmonic: SparseMatrix::from_diagonal(&harmonic),
    }
}

/// Embeds a single-mode operator into the product phonon space
/// (mode 0 is the slowest index).
fn embed_mode(op: &SparseMatrix, mode: usize, n_max: &[usize]) -> SparseMatrix {
    let mut out = SparseMatrix::identity(1);
    for (i, &n) in n_max.iter().enumerate() {
        let factor = if i == mode {
            op.clone()
        } else {
            SparseMatrix::identity(n + 1)
        };
        out = out.kron(&factor);
    }
    out
}

/// Default cap on the electron-phonon product dimension.
pub const DEFAULT_EP_CAP: usize = 20_000;

/// `H_ep` on `sector ⊗ phonons`, electronic index slowest. Interactions
/// stored on the lattice are not part of this model and are ignored.
pub fn build_ep_hamiltonian(
    lat: &LatticeSpec,
    ph: &PhononSpec,
    basis: &SectorBasis,
    cap: usize,
) -> Result<OperatorMatrix> {
    ph.validate()?;
    ph.check_sites(lat.n_sites())?;
    let pdim = ph.phonon_dim();
    let required = basis.len() * pdim;
    if required > cap {
        return Err(Error::CapExceeded { required, cap });
    }

    let ident_ph = SparseMatrix::identity(pdim);
    let ident_el = SparseMatrix::identity(basis.len());

    let kinetic = build_kinetic(lat, basis)?.matrix;
    let mut h = kinetic.kron(&ident_ph);

    let mut phonon_part = SparseMatrix::zeros(pdim, pdim);
    for i in 0..ph.n_modes() {
        let ops = build_phonon_ops(ph, i)?;
        let q = embed_mode(&ops.q, i, &ph.n_max);
        for x in 0..lat.n_sites() {
            let g = ph.coupling[i][x];
            if g != 0.0 {
                let charge = build_charge(x, basis)?.matrix;
                h = h.axpy(g, &charge.kron(&q))?;
            }
        }
        phonon_part = phonon_part.add(&embed_mode(&ops.harmonic, i, &ph.n_max))?;
        if ph.quartic[i] != 0.0 {
            phonon_part =
                phonon_part.axpy(ph.quartic[i], &embed_mode(&ops.q_fourth, i, &ph.n_max))?;
        }
    }
    h = h.add(&ident_el.kron(&phonon_part))?;

    Ok(OperatorMatrix::square(
        BasisLabel::ElectronPhonon {
            sector: basis.sector(),
            phonon_dim: pdim,
        },
        h,
    ))
}

/// `op ⊗ I_phonon`, lifting an electronic operator into the product space.
pub fn lift_electronic(op: &SparseMatrix, phonon_dim: usize) -> SparseMatrix {
    op.kron(&SparseMatrix::identity(phonon_dim))
}

/// Analytic ground energy of one site holding charge `Q` coupled linearly
/// to one harmonic mode: `ω/2 - g² Q² / (2 m ω²)`.
pub fn displaced_oscillator_energy(g: f64, charge: f64, mass: f64, omega: f64) -> f64 {
    omega / 2.0 - g * g * charge * charge / (2.0 * mass * omega * omega)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundednessReport {
    /// `Tr|t|`, the sum of absolute hopping eigenvalues.
    pub trace_abs_hopping: f64,
    /// Whether the phonon energy expression is bounded below over `q`.
    pub bounded: bool,
    /// Minimum over `q` of the harmonic-plus-linear part,
    /// `-2Tr|t| - 2Σ_x|G_x(q)| + Σ_i m_i ω_i² q_i² / 2`. With quartic terms
    /// present this is still a valid lower bound.
    pub harmonic_lower_bound: f64,
    /// A minimizing `q` of that harmonic expression.
    pub minimizer: Vec<f64>,
    pub has_anharmonic: bool,
    /// Rank of the `ν × |Λ|` coupling matrix; `rank == |Λ|` makes the
    /// couplings independent.
    pub coupling_rank: usize,
    pub couplings_independent: bool,
    pub note: &'static str,
}

/// Evaluates the lower bound of the total phonon energy expression for the
/// linear-coupling family.
pub fn check_boundedness(lat: &LatticeSpec, ph: &PhononSpec) -> Result<BoundednessReport> {
    ph.validate()?;
    ph.check_sites(lat.n_sites())?;
    let n = lat.n_sites();
    let nu = ph.n_modes();

    let trace_abs: f64 = lat
        .hopping()
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .map(|e| e.abs())
        .sum();
    let stiffness: Vec<f64> = (0..nu)
        .map(|i| ph.masses[i] * ph.frequencies[i].powi(2))
        .collect();

    // Σ_x |g_x·q| = max over sign vectors σ of (Σ_x σ_x g_x)·q; for each σ
    // the quadratic minimum sits at q = 2 M⁻¹ v_σ with value -2 vᵀ M⁻¹ v.
    let mut best = 0.0;
    let mut minimizer = vec![0.0; nu];
    let combos: u64 = if n == 0 { 1 } else { 1 << (n - 1) };
    for bits in 0..combos {
        let v: Vec<f64> = (0..nu)
            .map(|i| {
                (0..n)
                    .map(|x| {
                        let sign = if x > 0 && bits >> (x - 1) & 1 == 1 {
                            -1.0
                        } else {
                            1.0
                        };
                        sign * ph.coupling[i][x]
                    })
                    .sum()
            })
            .collect();
        let value: f64 = (0..nu).map(|i| v[i] * v[i] / stiffness[i]).sum();
        if value > best {
            best = value;
            minimizer = (0..nu).map(|i| 2.0 * v[i] / stiffness[i]).collect();
        }
    }

    let coupling_rank = if n == 0 || nu == 0 {
        0
    } else {
        ph.coupling_matrix().rank(1e-10)
    };
    Ok(BoundednessReport {
        trace_abs_hopping: trace_abs,
        bounded: true,
        harmonic_lower_bound: -2.0 * trace_abs - 2.0 * best,
        minimizer,
        has_anharmonic: ph.quartic.iter().any(|&l| l > 0.0),
        coupling_rank,
        couplings_independent: coupling_rank == n,
        note: "expression read as a function of q that must be bounded below; positive frequencies \
               make the quadratic term dominate the linear coupling, and quartic terms only raise it",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::Sector;
    use crate::lattice::two_site;

    #[test]
    fn two_level_position() {
        let ops = oscillator_ops(2.0, 3.0, 1);
        let c = 1.0 / (2.0 * 2.0 * 3.0f64).sqrt();
        assert_eq!(
            ops.q.to_dense(),
            DMatrix::from_row_slice(2, 2, &[0.0, c, c, 0.0])
        );
    }

    #[test]
    fn harmonic_levels() {
        let ops = oscillator_ops(1.0, 0.5, 5);
        for k in 0..6 {
            assert_eq!(ops.harmonic.get(k, k), 0.5 * (k as f64 + 0.5));
        }
    }

    #[test]
    fn canonical_commutator_holds_away_from_cutoff() {
        let n_max = 6;
        let ops = oscillator_ops(1.3, 0.7, n_max);
        // [q, p] = i  ⇔  [q, p/i] = I
        let comm = ops
            .q
            .matmul(&ops.p_over_i)
            .unwrap()
            .sub(&ops.p_over_i.matmul(&ops.q).unwrap())
            .unwrap();
        for r in 0..n_max {
            for c in 0..n_max {
                let expected = if r == c { 1.0 } else { 0.0 };
                assert!((comm.get(r, c) - expected).abs() < 1e-12);
            }
        }
        assert!((comm.get(n_max, n_max) - 1.0).abs() > 1.0);
    }

    #[test]
    fn compressed_kinetic_plus_potential_is_harmonic() {
        let (m, w) = (1.7, 0.9);
        let ops = oscillator_ops(m, w, 5);
        let h = ops
            .p_squared
            .scale(1.0 / (2.0 * m))
            .axpy(0.5 * m * w * w, &ops.q.matmul(&ops.q).unwrap())
            .unwrap();
        // exact everywhere except the last level where q·q is not a compression
        for k in 0..5 {
            assert!((h.get(k, k) - w * (k as f64 + 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn decoupled_spectrum_is_a_sum() {
        let lat = two_site(1.0, 0.0);
        let ph = PhononSpec::holstein(2, 0.0, 1.0, 1.0, 2).unwrap();
        let basis = SectorBasis::new(2, Sector::new(1, 0)).unwrap();
        let h = build_ep_hamiltonian(&lat, &ph, &basis, DEFAULT_EP_CAP).unwrap();
        let mut ev: Vec<f64> = h
            .matrix
            .to_dense()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        let mut expected = Vec::new();
        for e in [-1.0, 1.0] {
            for k1 in 0..3 {
                for k2 in 0..3 {
                    expected.push(e + k1 as f64 + k2 as f64 + 1.0);
                }
            }
        }
        expected.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let lat = two_site(1.0, 0.0);
        let ph = PhononSpec::holstein(2, 1.0, 1.0, 1.0, 6).unwrap();
        let basis = SectorBasis::new(2, Sector::new(1, 1)).unwrap();
        let err = build_ep_hamiltonian(&lat, &ph, &basis, 100).unwrap_err();
        assert!(matches!(
            err,
            Error::CapExceeded {
                required: 196,
                cap: 100
            }
        ));
    }

    #[test]
    fn invalid_parameters() {
        assert!(PhononSpec::holstein(1, 1.0, 0.0, 1.0, 2).is_err());
        assert!(PhononSpec::holstein(1, 1.0, 1.0, -1.0, 2).is_err());
        assert!(PhononSpec::holstein(1, 1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn boundedness_without_coupling() {
        let lat = two_site(1.0, 0.0);
        let ph = PhononSpec::holstein(2, 0.0, 1.0, 1.0, 2).unwrap();
        let r = check_boundedness(&lat, &ph).unwrap();
        assert!((r.harmonic_lower_bound + 4.0).abs() < 1e-12);
        assert!(r.minimizer.iter().all(|&q| q == 0.0));
    }

    #[test]
    fn boundedness_single_mode_calculus() {
        // min over q of -2g|q| + m ω² q² / 2 sits at |q| = 2g/(mω²)
        let (t11, g, m, w) = (0.3, 0.8, 1.5, 0.7);
        let lat = LatticeSpec::new(1, &[(0, 0, t11)], &[0.0]).unwrap();
        let ph = PhononSpec::new(vec![m], vec![w], vec![vec![g]], vec![0.0], vec![2]).unwrap();
        let r = check_boundedness(&lat, &ph).unwrap();
        let k = m * w * w;
        assert!((r.harmonic_lower_bound - (-2.0 * t11 - 2.0 * g * g / k)).abs() < 1e-12);
        assert!((r.minimizer[0].abs() - 2.0 * g / k).abs() < 1e-12);
        // brute-force scan of the same one-variable function
        let f = |q: f64| -2.0 * t11 - 2.0 * (g * q).abs() + 0.5 * k * q * q;
        let scan = (-40000..=40000)
            .map(|i| f(i as f64 * 1e-4))
            .fold(f64::INFINITY, f64::min);
        assert!(scan >= r.harmonic_lower_bound - 1e-12);
        assert!(scan - r.harmonic_lower_bound < 1e-6);
        assert!(r.couplings_independent);
    }
}
