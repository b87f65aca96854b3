//! Sparse matrices of the Hubbard Hamiltonian and its symmetry algebras.
//!
//! Every builder works inside one sector basis (or maps one sector into a
//! neighbouring one, for the ladder operators). Rows index the target basis
//! and columns the source basis.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{apply_hop, ConfigBasis, FockState, Sector, SectorBasis, Spin};
use crate::lattice::LatticeSpec;
use crate::sparse::SparseMatrix;

/// Which basis an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasisLabel {
    Sector(Sector),
    /// One spin species with a fixed particle number.
    SingleSpin {
        n_particles: usize,
    },
    /// Electronic sector tensored with a truncated phonon space.
    ElectronPhonon {
        sector: Sector,
        phonon_dim: usize,
    },
    /// A single oscillator mode truncated at `n_max` quanta.
    Oscillator {
        n_max: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub source: BasisLabel,
    /// `None` for a map into a sector that does not exist (the zero map).
    pub target: Option<BasisLabel>,
    pub matrix: SparseMatrix,
    pub symmetric: bool,
}

impl OperatorMatrix {
    pub fn square(basis: BasisLabel, matrix: SparseMatrix) -> Self {
        let symmetric = matrix.rows() == matrix.cols() && matrix.asymmetry() == 0.0;
        OperatorMatrix {
            source: basis,
            target: Some(basis),
            matrix,
            symmetric,
        }
    }

    pub fn map(source: BasisLabel, target: Option<BasisLabel>, matrix: SparseMatrix) -> Self {
        OperatorMatrix {
            source,
            target,
            matrix,
            symmetric: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }
}

fn check_basis(spec: &LatticeSpec, n_sites: usize) -> Result<()> {
    if spec.n_sites() != n_sites {
        return Err(Error::DimensionMismatch(format!(
            "lattice has {} sites but basis has {}",
            spec.n_sites(),
            n_sites
        )));
    }
    Ok(())
}

/// Assembles `Σ_k |f(k)⟩⟨k|` where `f` lists the image of each source state.
fn assemble<F>(from: &SectorBasis, to: Option<&SectorBasis>, mut images: F) -> SparseMatrix
where
    F: FnMut(FockState, &mut Vec<(FockState, f64)>),
{
    let Some(to) = to else {
        return SparseMatrix::zeros(0, from.len());
    };
    let mut triplets = Vec::new();
    let mut buf = Vec::new();
    for (col, state) in from.states().enumerate() {
        buf.clear();
        images(state, &mut buf);
        for &(target, amp) in &buf {
            let row = to
                .index(target)
                .expect("operator image lies in the target sector");
            triplets.push((row, col, amp));
        }
    }
    SparseMatrix::from_triplets(to.len(), from.len(), triplets)
}

fn hopping_images(spec: &LatticeSpec, state: FockState, out: &mut Vec<(FockState, f64)>) {
    let n = spec.n_sites();
    for spin in [Spin::Up, Spin::Down] {
        for x in 0..n {
            for y in 0..n {
                let t = spec.t(x, y);
                if t == 0.0 {
                    continue;
                }
                if let Some((s, sign)) = apply_hop(state, n, x, y, spin).expect("sites in range") {
                    out.push((s, t * sign));
                }
            }
        }
    }
}

/// Kinetic operator `K = Σ_σ Σ_xy t_xy c†_xσ c_yσ` in a sector.
pub fn build_kinetic(spec: &LatticeSpec, basis: &SectorBasis) -> Result<OperatorMatrix> {
    check_basis(spec, basis.n_sites())?;
    let m = assemble(basis, Some(basis), |s, out| hopping_images(spec, s, out));
    Ok(OperatorMatrix::square(
        BasisLabel::Sector(basis.sector()),
        m,
    ))
}

/// Hubbard Hamiltonian `K + Σ_x U_x n_x↑ n_x↓` in a sector.
pub fn build_hubbard(spec: &LatticeSpec, basis: &SectorBasis) -> Result<OperatorMatrix> {
    check_basis(spec, basis.n_sites())?;
    let u = spec.interactions();
    let m = assemble(basis, Some(basis), |s, out| {
        hopping_images(spec, s, out);
        let doubly = s.up & s.down;
        let e: f64 = (0..spec.n_sites())
            .filter(|&x| doubly >> x & 1 == 1)
            .map(|x| u[x])
            .sum();
        if e != 0.0 {
            out.push((s, e));
        }
    });
    Ok(OperatorMatrix::square(
        BasisLabel::Sector(basis.sector()),
        m,
    ))
}

/// Single-spin kinetic operator `K_σ` on `N`-particle configurations; the same
/// matrix serves both spin species.
pub fn build_kinetic_single(spec: &LatticeSpec, basis: &ConfigBasis) -> Result<OperatorMatrix> {
    check_basis(spec, basis.n_sites())?;
    let n = spec.n_sites();
    let mut triplets = Vec::new();
    for (col, &mask) in basis.masks().iter().enumerate() {
        let state = FockState::new(mask, 0);
        for x in 0..n {
            for y in 0..n {
                let t = spec.t(x, y);
                if t == 0.0 {
                    continue;
                }
                if let Some((s, sign)) = apply_hop(state, n, x, y, Spin::Up)? {
                    triplets.push((basis.rank(s.up).unwrap(), col, t * sign));
                }
            }
        }
    }
    let label = BasisLabel::SingleSpin {
        n_particles: basis.n_particles(),
    };
    Ok(OperatorMatrix::square(
        label,
        SparseMatrix::from_triplets(basis.len(), basis.len(), triplets),
    ))
}

/// Occupation `n_xσ` in a sector.
pub fn build_number(x: usize, spin: Spin, basis: &SectorBasis) -> Result<OperatorMatrix> {
    site_in_range(x, basis.n_sites())?;
    let diag: Vec<f64> = basis
        .states()
        .map(|s| if s.is_occupied(x, spin) { 1.0 } else { 0.0 })
        .collect();
    Ok(OperatorMatrix::square(
        BasisLabel::Sector(basis.sector()),
        SparseMatrix::from_diagonal(&diag),
    ))
}

/// Total charge `n_x↑ + n_x↓` in a sector.
pub fn build_charge(x: usize, basis: &SectorBasis) -> Result<OperatorMatrix> {
    site_in_range(x, basis.n_sites())?;
    let diag: Vec<f64> = basis
        .states()
        .map(|s| (s.is_occupied(x, Spin::Up) as u8 + s.is_occupied(x, Spin::Down) as u8) as f64)
        .collect();
    Ok(OperatorMatrix::square(
        BasisLabel::Sector(basis.sector()),
        SparseMatrix::from_diagonal(&diag),
    ))
}

/// Single-spin occupation `L_x` on `N`-particle configurations.
pub fn build_charge_single(x: usize, basis: &ConfigBasis) -> Result<OperatorMatrix> {
    site_in_range(x, basis.n_sites())?;
    let diag: Vec<f64> = basis.masks().iter().map(|m| (m >> x & 1) as f64).collect();
    let label = BasisLabel::SingleSpin {
        n_particles: basis.n_particles(),
    };
    Ok(OperatorMatrix::square(
        label,
        SparseMatrix::from_diagonal(&diag),
    ))
}

/// Total `N_σ` in a sector (a multiple of the identity).
pub fn build_total_number(spin: Spin, basis: &SectorBasis) -> OperatorMatrix {
    let n = match spin {
        Spin::Up => basis.sector().n_up,
        Spin::Down => basis.sector().n_down,
    } as f64;
    OperatorMatrix::square(
        BasisLabel::Sector(basis.sector()),
        SparseMatrix::from_diagonal(&vec![n; basis.len()]),
    )
}

fn site_in_range(x: usize, n_sites: usize) -> Result<()> {
    if x >= n_sites {
        return Err(Error::SiteOutOfRange { index: x, n_sites });
    }
    Ok(())
}

/// One-dimensional projector `Π^X = n_x1 ⋯ n_xN` on single-spin
/// configurations. Depends only on the set of sites in `X`.
pub fn build_projector(sites: &[usize], basis: &ConfigBasis) -> Result<OperatorMatrix> {
    let mask = config_mask(sites, basis)?;
    let k = basis
        .rank(mask)
        .expect("mask has the basis particle number");
    let m = SparseMatrix::from_triplets(basis.len(), basis.len(), [(k, k, 1.0)]);
    let label = BasisLabel::SingleSpin {
        n_particles: basis.n_particles(),
    };
    Ok(OperatorMatrix::square(label, m))
}

/// Bitmask of a site tuple, rejecting repeats and wrong lengths.
pub fn config_mask(sites: &[usize], basis: &ConfigBasis) -> Result<u32> {
    if sites.len() != basis.n_particles() {
        return Err(Error::LengthMismatch {
            what: "sites in configuration",
            expected: basis.n_particles(),
            found: sites.len(),
        });
    }
    let mut mask = 0u32;
    for &x in sites {
        site_in_range(x, basis.n_sites())?;
        if mask >> x & 1 == 1 {
            return Err(Error::RepeatedSite(x));
        }
        mask |= 1 << x;
    }
    Ok(mask)
}

/// `S_z`, `S±` and `S²` for one sector. `s_plus` maps into the sector with
/// one more up spin, `s_minus` into the one with one fewer; either is a
/// zero map with no rows when that sector does not exist.
#[derive(Clone, Debug)]
pub struct SpinOps {
    pub s_z: OperatorMatrix,
    pub s_plus: OperatorMatrix,
    pub s_minus: OperatorMatrix,
    pub s_squared: OperatorMatrix,
}

fn spin_flip_images(state: FockState, n: usize, raise: bool, out: &mut Vec<(FockState, f64)>) {
    let (from, to) = if raise {
        (Spin::Down, Spin::Up)
    } else {
        (Spin::Up, Spin::Down)
    };
    for x in 0..n {
        if let Some((s1, a)) = state.annihilate(x, from) {
            if let Some((s2, b)) = s1.create(x, to) {
                out.push((s2, a * b));
            }
        }
    }
}

/// `S⁺ = Σ_x c†_x↑ c_x↓` from `from` into `to`.
pub fn build_spin_raise(from: &SectorBasis, to: Option<&SectorBasis>) -> OperatorMatrix {
    let n = from.n_sites();
    let m = assemble(from, to, |s, out| spin_flip_images(s, n, true, out));
    OperatorMatrix::map(
        BasisLabel::Sector(from.sector()),
        to.map(|b| BasisLabel::Sector(b.sector())),
        m,
    )
}

/// `S⁻ = Σ_x c†_x↓ c_x↑` from `from` into `to`.
pub fn build_spin_lower(from: &SectorBasis, to: Option<&SectorBasis>) -> OperatorMatrix {
    let n = from.n_sites();
    let m = assemble(from, to, |s, out| spin_flip_images(s, n, false, out));
    OperatorMatrix::map(
        BasisLabel::Sector(from.sector()),
        to.map(|b| BasisLabel::Sector(b.sector())),
        m,
    )
}

impl SpinOps {
    pub fn build(basis: &SectorBasis) -> Result<Self> {
        let n = basis.n_sites();
        let sector = basis.sector();
        let raised = sector
            .spin_raised(n)
            .map(|s| SectorBasis::new(n, s))
            .transpose()?;
        let lowered = sector
            .spin_lowered(n)
            .map(|s| SectorBasis::new(n, s))
            .transpose()?;

        let m = (sector.n_up as f64 - sector.n_down as f64) / 2.0;
        let label = BasisLabel::Sector(sector);
        let s_z = OperatorMatrix::square(label, SparseMatrix::from_diagonal(&vec![m; basis.len()]));
        let s_plus = build_spin_raise(basis, raised.as_ref());
        let s_minus = build_spin_lower(basis, lowered.as_ref());

        // S² = S⁻S⁺ + S_z² + S_z, with S⁻ taken back from the raised sector.
        let lower_back = match &raised {
            Some(r) => build_spin_lower(r, Some(basis)).matrix,
            None => SparseMatrix::zeros(basis.len(), 0),
        };
        let s2 = lower_back
            .matmul(&s_plus.matrix)?
            .add(&SparseMatrix::from_diagonal(&vec![m * m + m; basis.len()]))?;
        let s_squared = OperatorMatrix::square(label, s2);

        Ok(SpinOps {
            s_z,
            s_plus,
            s_minus,
            s_squared,
        })
    }
}

/// `J_z`, `J±` and `J²` for one sector of a bipartite lattice.
///
/// `J⁺ = Σ_x (-1)^ε(x) c†_x↑ c†_x↓` adds a pair and `J⁻ = (J⁺)ᵀ` removes one.
#[derive(Clone, Debug)]
pub struct PseudospinOps {
    pub j_z: OperatorMatrix,
    pub j_plus: OperatorMatrix,
    pub j_minus: OperatorMatrix,
    pub j_squared: OperatorMatrix,
}

fn pair_images(state: FockState, signs: &[f64], create: bool, out: &mut Vec<(FockState, f64)>) {
    for (x, &eps) in signs.iter().enumerate() {
        let img = if create {
            state
                .create(x, Spin::Down)
                .and_then(|(s1, a)| s1.create(x, Spin::Up).map(|(s2, b)| (s2, a * b)))
        } else {
            state
                .annihilate(x, Spin::Up)
                .and_then(|(s1, a)| s1.annihilate(x, Spin::Down).map(|(s2, b)| (s2, a * b)))
        };
        if let Some((s, sign)) = img {
            out.push((s, eps * sign));
        }
    }
}

fn sublattice_signs(spec: &LatticeSpec) -> Result<Vec<f64>> {
    let b = spec.bipartition().ok_or(Error::NotBipartite)?;
    Ok(b.iter().map(|s| s.sign()).collect())
}

/// `J⁺` from `from` into `to`.
pub fn build_pair_raise(
    spec: &LatticeSpec,
    from: &SectorBasis,
    to: Option<&SectorBasis>,
) -> Result<OperatorMatrix> {
    check_basis(spec, from.n_sites())?;
    let signs = sublattice_signs(spec)?;
    let m = assemble(from, to, |s, out| pair_images(s, &signs, true, out));
    Ok(OperatorMatrix::map(
        BasisLabel::Sector(from.sector()),
        to.map(|b| BasisLabel::Sector(b.sector())),
        m,
    ))
}

/// `J⁻` from `from` into `to`.
pub fn build_pair_lower(
    spec: &LatticeSpec,
    from: &SectorBasis,
    to: Option<&SectorBasis>,
) -> Result<OperatorMatrix> {
    check_basis(spec, from.n_sites())?;
    let signs = sublattice_signs(spec)?;
    let m = assemble(from, to, |s, out| pair_images(s, &signs, false, out));
    Ok(OperatorMatrix::map(
        BasisLabel::Sector(from.sector()),
        to.map(|b| BasisLabel::Sector(b.sector())),
        m,
    ))
}

impl PseudospinOps {
    /// Fails with [`Error::NotBipartite`] when the lattice carries no
    /// bipartition.
    pub fn build(spec: &LatticeSpec, basis: &SectorBasis) -> Result<Self> {
        check_basis(spec, basis.n_sites())?;
        let n = basis.n_sites();
        let sector = basis.sector();
        let raised = sector
            .pair_raised(n)
            .map(|s| SectorBasis::new(n, s))
            .transpose()?;
        let lowered = sector
            .pair_lowered()
            .map(|s| SectorBasis::new(n, s))
            .transpose()?;

        let mj = (sector.n_electrons() as f64 - n as f64) / 2.0;
        let label = BasisLabel::Sector(sector);
        let j_z =
            OperatorMatrix::square(label, SparseMatrix::from_diagonal(&vec![mj; basis.len()]));
        let j_plus = build_pair_raise(spec, basis, raised.as_ref())?;
        let j_minus = build_pair_lower(spec, basis, lowered.as_ref())?;

        let lower_back = match &raised {
            Some(r) => build_pair_lower(spec, r, Some(basis))?.matrix,
            None => SparseMatrix::zeros(basis.len(), 0),
        };
        let j2 = lower_back
            .matmul(&j_plus.matrix)?
            .add(&SparseMatrix::from_diagonal(&vec![
                mj * mj + mj;
                basis.len()
            ]))?;
        let j_squared = OperatorMatrix::square(label, j2);

        Ok(PseudospinOps {
            j_z,
            j_plus,
            j_minus,
            j_squared,
        })
    }
}

/// Permutation matrix sending `|X↑, Y↓⟩` in `sector` to `|Y↑, X↓⟩` in the
/// spin-flipped sector. Moving the `N_↑` up creators past the `N_↓` down
/// creators contributes the global sign `(-1)^{N_↑ N_↓}`, included here.
pub fn spin_reflection(n_sites: usize, sector: Sector) -> Result<SparseMatrix> {
    let from = SectorBasis::new(n_sites, sector)?;
    let to = SectorBasis::new(n_sites, sector.spin_flipped())?;
    let sign = if (sector.n_up * sector.n_down).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    Ok(assemble(&from, Some(&to), |s, out| {
        out.push((s.spin_swapped(), sign))
    }))
}

/// Relative tolerance for exact operator identities: residuals are compared
/// against this factor times the 1-norm scale of the operators involved.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// `max|A B - B A - expected| / max(1, ‖A‖₁ ‖B‖₁)` for a sector-changing
/// `b` (`a_tgt` and `a_src` are `A` in the target and source sectors).
pub fn relative_commutator_residual(
    a_tgt: &SparseMatrix,
    b: &SparseMatrix,
    a_src: &SparseMatrix,
    expected: Option<&SparseMatrix>,
) -> Result<f64> {
    let raw = crate::sparse::intertwining_residual(a_tgt, b, a_src, expected)?;
    let scale = (a_tgt.norm1().max(a_src.norm1()) * b.norm1()).max(1.0);
    Ok(raw / scale)
}
