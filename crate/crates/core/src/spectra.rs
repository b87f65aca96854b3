//! Sector diagonalization, degeneracy clustering and quantum-number labels.
//!
//! Eigenvalues closer than `deg_tol · (1 + |E|)` to their neighbour form one
//! degeneracy cluster. Inside each cluster the eigenvectors are rotated to
//! diagonalize `S²` and then `J²`, and the Casimir eigenvalues are rounded to
//! half-integer labels.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fockspace::{Sector, SectorBasis};
use crate::halfint::HalfInt;
use crate::lattice::{detect_bipartition, LatticeSpec};
use crate::operators::{
    build_hubbard, relative_commutator_residual, PseudospinOps, SpinOps, IDENTITY_TOLERANCE,
};
use crate::phonon::{build_ep_hamiltonian, lift_electronic, PhononSpec};
use crate::sparse::SparseMatrix;

pub const DEFAULT_DENSE_CAP: usize = 4096;
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;
/// Largest accepted `‖C v - c(c+1) v‖` for a Casimir `C` after rotation.
pub const LABEL_TOL: f64 = 1e-6;
/// Eigenpairs returned by the iterative solver above the dense cap.
pub const DEFAULT_EIGEN_COUNT: usize = 12;

const RESIDUAL_TOL: f64 = 1e-9;

/// Eigenvalues in ascending order with matching orthonormal columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    /// Only the lowest part of the spectrum was computed.
    pub partial: bool,
}

/// Makes the largest-magnitude component of every column positive (the
/// lowest index wins ties).
pub fn fix_gauge(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0usize;
        for i in 0..col.len() {
            if col[i].abs() > col[best].abs() * (1.0 + 1e-12) {
                best = i;
            }
        }
        if !col.is_empty() && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

fn check_symmetric(h: &SparseMatrix) -> Result<()> {
    if h.rows() != h.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            h.rows(),
            h.cols()
        )));
    }
    let asym = h.asymmetry();
    if asym > 1e-12 * h.max_abs().max(1.0) {
        return Err(Error::NonSymmetric(asym));
    }
    Ok(())
}

fn sorted_eigen(values: DVector<f64>, vectors: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let vals = order.iter().map(|&i| values[i]).collect();
    let vecs = DMatrix::from_fn(vectors.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
    (vals, vecs)
}

fn max_residual(h: &SparseMatrix, values: &[f64], vectors: &DMatrix<f64>) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let v = vectors.column(k).into_owned();
            (h.matvec_dvec(&v) - v * e).norm() / (1.0 + e.abs())
        })
        .fold(0.0, f64::max)
}

/// Full dense diagonalization up to `dense_cap`, the lowest `eigen_count`
/// pairs from Lanczos above it.
pub fn diagonalize(h: &SparseMatrix, dense_cap: usize, eigen_count: usize) -> Result<Eigen> {
    check_symmetric(h)?;
    if h.rows() <= dense_cap {
        let eig = h.to_dense().symmetric_eigen();
        let (values, mut vectors) = sorted_eigen(eig.eigenvalues, eig.eigenvectors);
        fix_gauge(&mut vectors);
        let res = max_residual(h, &values, &vectors);
        if res > RESIDUAL_TOL {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: res,
            });
        }
        Ok(Eigen {
            values,
            vectors,
            partial: false,
        })
    } else {
        lanczos(h, eigen_count)
    }
}

/// Lowest `k` eigenpairs by Lanczos with full reorthogonalization.
///
/// A single Krylov sequence finds one vector per exactly degenerate
/// eigenspace, so the result is always marked partial.
pub fn lanczos(h: &SparseMatrix, k: usize) -> Result<Eigen> {
    check_symmetric(h)?;
    let n = h.rows();
    let k = k.min(n).max(1);
    let max_dim = n.min((8 * k + 100).max(300));
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a_c205);
    let mut q = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    q.normalize_mut();

    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(max_dim);
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let scale = h.norm1().max(1.0);

    let ritz = |alpha: &[f64], beta: &[f64]| {
        let m = alpha.len();
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let e = t.symmetric_eigen();
        sorted_eigen(e.eigenvalues, e.eigenvectors)
    };

    let mut iterations = 0;
    loop {
        basis.push(q.clone());
        let mut w = h.matvec_dvec(&q);
        let a = q.dot(&w);
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        let b = w.norm();
        iterations += 1;
        let exhausted = b < 1e-12 * scale;
        let m = alpha.len();
        let check = exhausted || m == max_dim || (m >= k && m.is_multiple_of(10));
        if check {
            let (theta, s) = ritz(&alpha, &beta);
            let kk = k.min(m);
            let est = (0..kk)
                .map(|i| b * s[(m - 1, i)].abs() / (1.0 + theta[i].abs()))
                .fold(0.0, f64::max);
            if exhausted || est < 1e-11 || m == max_dim {
                let mut vectors = DMatrix::zeros(n, kk);
                for i in 0..kk {
                    let mut v = DVector::zeros(n);
                    for (j, bj) in basis.iter().enumerate() {
                        v.axpy(s[(j, i)], bj, 1.0);
                    }
                    v.normalize_mut();
                    vectors.set_column(i, &v);
                }
                let values: Vec<f64> = theta[..kk].to_vec();
                fix_gauge(&mut vectors);
                let res = max_residual(h, &values, &vectors);
                if res > RESIDUAL_TOL {
                    return Err(Error::NoConvergence {
                        iterations,
                        residual: res,
                    });
                }
                return Ok(Eigen {
                    values,
                    vectors,
                    partial: kk < n,
                });
            }
        }
        beta.push(b);
        q = w / b;
    }
}

/// Index ranges of degeneracy clusters in an ascending list.
pub fn clusters(values: &[f64], deg_tol: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let (a, b) = (values[i - 1], values[i]);
            b - a >= deg_tol * (1.0 + a.abs().max(b.abs()))
        };
        if split {
            out.push(start..i);
            start = i;
        }
    }
    out
}

fn ser_sector<S: Serializer>(s: &Sector, ser: S) -> std::result::Result<S::Ok, S::Error> {
    [s.n_up, s.n_down].serialize(ser)
}

fn de_sector<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Sector, D::Error> {
    let [a, b] = <[usize; 2]>::deserialize(de)?;
    Ok(Sector::new(a, b))
}

/// One eigenstate with its resolved quantum numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub energy: f64,
    #[serde(serialize_with = "ser_sector", deserialize_with = "de_sector")]
    pub sector: Sector,
    pub s: HalfInt,
    pub m: HalfInt,
    pub j: Option<HalfInt>,
    pub m_j: HalfInt,
    /// Cluster index within the sector, counted from the bottom.
    pub degeneracy_cluster: usize,
    pub casimir_residual: f64,
}

fn casimir_label(c: &SparseMatrix, v: &DVector<f64>) -> (HalfInt, f64) {
    let cv = c.matvec_dvec(v);
    let lambda = v.dot(&cv);
    let (label, _) = HalfInt::from_casimir(lambda.max(0.0));
    let res = (cv - v * label.casimir()).norm();
    (label, res)
}

fn rotate_block(vectors: &mut DMatrix<f64>, cols: &[usize], op: &SparseMatrix) {
    let c = cols.len();
    if c < 2 {
        return;
    }
    let block = DMatrix::from_fn(vectors.nrows(), c, |r, k| vectors[(r, cols[k])]);
    let images = DMatrix::from_columns(
        &(0..c)
            .map(|k| op.matvec_dvec(&block.column(k).into_owned()))
            .collect::<Vec<_>>(),
    );
    let small = block.transpose() * images;
    let small = (&small + small.transpose()) * 0.5;
    let e = small.symmetric_eigen();
    let (_, w) = sorted_eigen(e.eigenvalues, e.eigenvectors);
    let rotated = block * w;
    for (k, &col) in cols.iter().enumerate() {
        vectors.set_column(col, &rotated.column(k));
    }
}

/// Labels every eigenpair with `(s, m, j, m_j)`, rotating degenerate
/// eigenvectors in place so each carries sharp Casimir values.
pub fn resolve_quantum_numbers(
    h: &SparseMatrix,
    s_squared: &SparseMatrix,
    j_squared: Option<&SparseMatrix>,
    eig: &mut Eigen,
    sector: Sector,
    n_sites: usize,
    deg_tol: f64,
) -> Result<Vec<SpectrumRecord>> {
    let r = relative_commutator_residual(h, s_squared, h, None)?;
    if r > IDENTITY_TOLERANCE {
        return Err(Error::NotConserved(r));
    }
    if let Some(j2) = j_squared {
        let r = relative_commutator_residual(h, j2, h, None)?;
        if r > IDENTITY_TOLERANCE {
            return Err(Error::NotConserved(r));
        }
    }

    let m = HalfInt::from_twice(sector.n_up as i32 - sector.n_down as i32);
    let m_j = HalfInt::from_twice(sector.n_electrons() as i32 - n_sites as i32);
    let n_e = sector.n_electrons() as i32;
    let mut records = Vec::with_capacity(eig.values.len());

    for (cid, range) in clusters(&eig.values, deg_tol).into_iter().enumerate() {
        let cols: Vec<usize> = range.clone().collect();
        rotate_block(&mut eig.vectors, &cols, s_squared);
        let mut labels: Vec<(HalfInt, f64)> = cols
            .iter()
            .map(|&c| casimir_label(s_squared, &eig.vectors.column(c).into_owned()))
            .collect();
        let mut j_labels: Vec<Option<(HalfInt, f64)>> = vec![None; cols.len()];
        if let Some(j2) = j_squared {
            let mut distinct: Vec<HalfInt> = labels.iter().map(|l| l.0).collect();
            distinct.sort();
            distinct.dedup();
            for s in distinct {
                let group: Vec<usize> = cols
                    .iter()
                    .zip(&labels)
                    .filter(|(_, l)| l.0 == s)
                    .map(|(&c, _)| c)
                    .collect();
                rotate_block(&mut eig.vectors, &group, j2);
            }
            for (k, &c) in cols.iter().enumerate() {
                let v = eig.vectors.column(c).into_owned();
                labels[k] = casimir_label(s_squared, &v);
                j_labels[k] = Some(casimir_label(j2, &v));
            }
        }
        let energy = eig.values[range.start];
        for (k, &c) in cols.iter().enumerate() {
            let (s, s_res) = labels[k];
            let mut residual = s_res;
            let mut j = None;
            if let Some((jv, j_res)) = j_labels[k] {
                residual = residual.max(j_res);
                if jv.twice() < m_j.abs().twice() || (jv.twice() - m_j.twice()) % 2 != 0 {
                    residual = f64::INFINITY;
                }
                j = Some(jv);
            }
            if s.twice() < m.abs().twice() || s.twice() > n_e || (s.twice() - n_e) % 2 != 0 {
                residual = f64::INFINITY;
            }
            if residual > LABEL_TOL {
                return Err(Error::LabelingFailure { energy, residual });
            }
            records.push(SpectrumRecord {
                energy: eig.values[c],
                sector,
                s,
                m,
                j,
                m_j,
                degeneracy_cluster: cid,
                casimir_residual: residual,
            });
        }
    }
    fix_gauge(&mut eig.vectors);
    Ok(records)
}

/// When pseudospin labels are attached.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PseudospinPolicy {
    /// Bipartite lattice, uniform `U` and no diagonal hopping.
    #[default]
    Auto,
    Off,
    /// Any bipartite lattice; labeling still fails if `[H, J²] ≠ 0`.
    Force,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisOptions {
    pub dense_cap: usize,
    pub eigen_count: usize,
    pub deg_tol: f64,
    pub pseudospin: PseudospinPolicy,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            dense_cap: DEFAULT_DENSE_CAP,
            eigen_count: DEFAULT_EIGEN_COUNT,
            deg_tol: DEFAULT_DEGENERACY_TOL,
            pseudospin: PseudospinPolicy::Auto,
        }
    }
}

/// The lattice with a bipartition attached when pseudospin labels apply
/// under `policy`, `None` otherwise.
pub fn pseudospin_lattice(
    spec: &LatticeSpec,
    policy: PseudospinPolicy,
) -> Result<Option<LatticeSpec>> {
    if policy == PseudospinPolicy::Off {
        return Ok(None);
    }
    let with_bip = if spec.bipartition().is_some() {
        spec.clone()
    } else if detect_bipartition(spec).is_bipartite {
        spec.clone().with_detected_bipartition()
    } else if policy == PseudospinPolicy::Force {
        return Err(Error::NotBipartite);
    } else {
        return Ok(None);
    };
    if policy == PseudospinPolicy::Auto
        && (spec.uniform_interaction().is_none() || spec.has_diagonal_hopping())
    {
        return Ok(None);
    }
    Ok(Some(with_bip))
}

/// Diagonalized and labeled sector.
#[derive(Clone, Debug)]
pub struct SectorSpectrum {
    pub sector: Sector,
    pub eigen: Eigen,
    pub records: Vec<SpectrumRecord>,
}

impl SectorSpectrum {
    pub fn partial(&self) -> bool {
        self.eigen.partial
    }
}

pub fn analyze_sector(
    spec: &LatticeSpec,
    sector: Sector,
    opts: &AnalysisOptions,
) -> Result<SectorSpectrum> {
    let n = spec.n_sites();
    let basis = SectorBasis::new(n, sector)?;
    let h = build_hubbard(spec, &basis)?.matrix;
    let s2 = SpinOps::build(&basis)?.s_squared.matrix;
    let j2 = match pseudospin_lattice(spec, opts.pseudospin)? {
        Some(bip) => Some(PseudospinOps::build(&bip, &basis)?.j_squared.matrix),
        None => None,
    };
    let mut eigen = diagonalize(&h, opts.dense_cap, opts.eigen_count)?;
    let records =
        resolve_quantum_numbers(&h, &s2, j2.as_ref(), &mut eigen, sector, n, opts.deg_tol)?;
    Ok(SectorSpectrum {
        sector,
        eigen,
        records,
    })
}

/// Sectors analysed in parallel, returned in the order given.
pub fn analyze_sectors(
    spec: &LatticeSpec,
    sectors: &[Sector],
    opts: &AnalysisOptions,
) -> Result<Vec<SectorSpectrum>> {
    sectors
        .par_iter()
        .map(|&s| analyze_sector(spec, s, opts))
        .collect()
}

/// Every sector with `N_↑ + N_↓ = n_e`, by ascending `N_↑`.
pub fn analyze_filling(
    spec: &LatticeSpec,
    n_e: usize,
    opts: &AnalysisOptions,
) -> Result<Vec<SectorSpectrum>> {
    analyze_sectors(spec, &Sector::with_filling(spec.n_sites(), n_e), opts)
}

/// Electron-phonon sector: `H_ep` on the sector tensored with the phonon
/// space, labeled by the electronic spin. Phonons couple to the charge, so
/// no pseudospin labels are attached.
pub fn analyze_ep_sector(
    lat: &LatticeSpec,
    ph: &PhononSpec,
    sector: Sector,
    opts: &AnalysisOptions,
    cap: usize,
) -> Result<SectorSpectrum> {
    let basis = SectorBasis::new(lat.n_sites(), sector)?;
    let h = build_ep_hamiltonian(lat, ph, &basis, cap)?.matrix;
    let s2 = lift_electronic(&SpinOps::build(&basis)?.s_squared.matrix, ph.phonon_dim());
    let mut eigen = diagonalize(&h, opts.dense_cap, opts.eigen_count)?;
    let records = resolve_quantum_numbers(
        &h,
        &s2,
        None,
        &mut eigen,
        sector,
        lat.n_sites(),
        opts.deg_tol,
    )?;
    Ok(SectorSpectrum {
        sector,
        eigen,
        records,
    })
}

pub fn all_records(spectra: &[SectorSpectrum]) -> Vec<SpectrumRecord> {
    spectra
        .iter()
        .flat_map(|s| s.records.iter().cloned())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroundStateReport {
    pub energy: f64,
    /// Eigenvalues across all scanned sectors within the cluster tolerance
    /// of the minimum.
    pub degeneracy: usize,
    /// Present when every ground state carries the same spin.
    pub s: Option<HalfInt>,
    pub j: Option<HalfInt>,
    /// `degeneracy == 2s + 1` with a single `s`.
    pub unique: bool,
    #[serde(serialize_with = "ser_sectors")]
    pub ground_sectors: Vec<Sector>,
    #[serde(serialize_with = "ser_sectors")]
    pub sectors_scanned: Vec<Sector>,
    /// Some sector was only partially diagonalized, so the degeneracy is a
    /// lower bound.
    pub partial: bool,
}

fn ser_sectors<S: Serializer>(s: &[Sector], ser: S) -> std::result::Result<S::Ok, S::Error> {
    s.iter()
        .map(|s| [s.n_up, s.n_down])
        .collect::<Vec<_>>()
        .serialize(ser)
}

/// Global ground-state data over the given sectors. Panics if no sector
/// has any eigenvalue.
pub fn ground_state_report(spectra: &[SectorSpectrum], deg_tol: f64) -> GroundStateReport {
    let records = all_records(spectra);
    let e0 = records
        .iter()
        .map(|r| r.energy)
        .fold(f64::INFINITY, f64::min);
    assert!(e0.is_finite(), "no eigenvalues to report");
    let tol = deg_tol * (1.0 + e0.abs());
    let ground: Vec<&SpectrumRecord> = records.iter().filter(|r| r.energy - e0 < tol).collect();

    let single = |vals: Vec<Option<HalfInt>>| -> Option<HalfInt> {
        let first = *vals.first()?;
        vals.iter().all(|v| *v == first).then_some(first).flatten()
    };
    let s = single(ground.iter().map(|r| Some(r.s)).collect());
    let j = single(ground.iter().map(|r| r.j).collect());
    let mut ground_sectors: Vec<Sector> = ground.iter().map(|r| r.sector).collect();
    ground_sectors.dedup();
    let degeneracy = ground.len();
    GroundStateReport {
        energy: e0,
        degeneracy,
        s,
        j,
        unique: s.is_some_and(|s| degeneracy as i32 == s.twice() + 1),
        ground_sectors,
        sectors_scanned: spectra.iter().map(|s| s.sector).collect(),
        partial: spectra.iter().any(SectorSpectrum::partial),
    }
}

/// The spin `||Λ_A| - |Λ_B|| / 2` of a bipartite lattice.
pub fn sublattice_imbalance_spin(spec: &LatticeSpec) -> Option<HalfInt> {
    let report = detect_bipartition(spec);
    report
        .is_bipartite
        .then(|| HalfInt::from_twice(report.size_a.abs_diff(report.size_b) as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TowerKind {
    Spin,
    Pseudospin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerScope {
    Sector(#[serde(serialize_with = "ser_sector")] Sector),
    Filling(usize),
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TowerEntry {
    pub value: HalfInt,
    pub min_energy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TowerStep {
    pub lower: HalfInt,
    pub upper: HalfInt,
    /// `min_energy(upper) - min_energy(lower)`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TowerReport {
    pub quantum_number_kind: TowerKind,
    pub scope: TowerScope,
    pub entries: Vec<TowerEntry>,
    /// Adjacent values whose minimal energies are not strictly ordered.
    pub violations: Vec<TowerStep>,
    pub steps: Vec<TowerStep>,
    pub strict: bool,
}

/// Minimal energy per spin or pseudospin value over `scope`. A step counts
/// as strict only when its gap exceeds the clustering tolerance.
pub fn extract_tower(
    records: &[SpectrumRecord],
    kind: TowerKind,
    scope: TowerScope,
    deg_tol: f64,
) -> TowerReport {
    let mut entries: Vec<TowerEntry> = Vec::new();
    for r in records {
        let in_scope = match scope {
            TowerScope::Sector(s) => r.sector == s,
            TowerScope::Filling(n) => r.sector.n_electrons() == n,
            TowerScope::All => true,
        };
        let value = match kind {
            TowerKind::Spin => Some(r.s),
            TowerKind::Pseudospin => r.j,
        };
        let Some(value) = value.filter(|_| in_scope) else {
            continue;
        };
        match entries.iter_mut().find(|e| e.value == value) {
            Some(e) => e.min_energy = e.min_energy.min(r.energy),
            None => entries.push(TowerEntry {
                value,
                min_energy: r.energy,
            }),
        }
    }
    entries.sort_by_key(|e| e.value);
    TowerReport::from_entries(kind, scope, entries, deg_tol)
}

impl TowerReport {
    fn from_entries(
        kind: TowerKind,
        scope: TowerScope,
        entries: Vec<TowerEntry>,
        deg_tol: f64,
    ) -> Self {
        let mut steps = Vec::new();
        for a in &entries {
            if let Some(b) = entries
                .iter()
                .find(|b| b.value.twice() == a.value.twice() + 2)
            {
                steps.push(TowerStep {
                    lower: a.value,
                    upper: b.value,
                    gap: b.min_energy - a.min_energy,
                });
            }
        }
        let violations: Vec<TowerStep> = steps
            .iter()
            .filter(|st| {
                let e = entries
                    .iter()
                    .find(|e| e.value == st.lower)
                    .map_or(0.0, |e| e.min_energy);
                st.gap <= deg_tol * (1.0 + e.abs())
            })
            .copied()
            .collect();
        TowerReport {
            quantum_number_kind: kind,
            scope,
            strict: violations.is_empty(),
            entries,
            violations,
            steps,
        }
    }

    /// The same tower restricted to values `>= min`.
    pub fn from_value(&self, min: HalfInt, deg_tol: f64) -> TowerReport {
        let entries = self
            .entries
            .iter()
            .filter(|e| e.value >= min)
            .copied()
            .collect();
        TowerReport::from_entries(self.quantum_number_kind, self.scope, entries, deg_tol)
    }

    /// Smallest gap between adjacent values, if any pair exists.
    pub fn min_gap(&self) -> Option<f64> {
        self.steps.iter().map(|s| s.gap).reduce(f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{lieb_chain, open_chain, two_site};

    fn h(v: f64) -> HalfInt {
        HalfInt::from_twice((2.0 * v) as i32)
    }

    #[test]
    fn diagonal_matrix_sorted() {
        let m = SparseMatrix::from_diagonal(&[3.0, -1.0, 2.0]);
        let e = diagonalize(&m, 10, 3).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
        assert_eq!(e.vectors[(1, 0)], 1.0);
    }

    #[test]
    fn non_symmetric_rejected() {
        let m = SparseMatrix::from_triplets(2, 2, [(0, 1, 1.0)]);
        assert!(matches!(
            diagonalize(&m, 10, 2),
            Err(Error::NonSymmetric(_))
        ));
    }

    #[test]
    fn two_site_balanced_sector() {
        for u in [-4.0, 4.0, 1.5] {
            let spec = two_site(1.0, u);
            let s = analyze_sector(&spec, Sector::new(1, 1), &AnalysisOptions::default()).unwrap();
            let root = (u * u + 16.0f64).sqrt() / 2.0;
            let mut expected = vec![u / 2.0 - root, 0.0, u, u / 2.0 + root];
            expected.sort_by(f64::total_cmp);
            for (a, b) in s.eigen.values.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn attractive_two_site_ground_energy() {
        let s = analyze_sector(
            &two_site(1.0, -4.0),
            Sector::new(1, 1),
            &AnalysisOptions::default(),
        )
        .unwrap();
        assert!((s.eigen.values[0] - (-2.0 - 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn lanczos_matches_dense() {
        let spec = open_chain(6, 1.0, -2.0).unwrap();
        let basis = SectorBasis::new(6, Sector::new(3, 3)).unwrap();
        let hm = build_hubbard(&spec, &basis).unwrap().matrix;
        let dense = diagonalize(&hm, 10_000, 5).unwrap();
        let it = diagonalize(&hm, 10, 5).unwrap();
        assert!(it.partial);
        assert!((it.values[0] - dense.values[0]).abs() < 1e-10);
        for w in it.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn clustering_uses_relative_gaps() {
        let c = clusters(&[0.0, 1e-9, 1.0, 1.0 + 5e-8, 2.0], 1e-8);
        assert_eq!(c, vec![0..2, 2..3, 3..4, 4..5]);
        assert_eq!(clusters(&[], 1e-8), Vec::<Range<usize>>::new());
    }

    #[test]
    fn two_site_labels() {
        let spec = two_site(1.0, -4.0);
        let s = analyze_sector(&spec, Sector::new(1, 1), &AnalysisOptions::default()).unwrap();
        let labels: Vec<(f64, HalfInt, Option<HalfInt>)> =
            s.records.iter().map(|r| (r.energy, r.s, r.j)).collect();
        // ground, eta, triplet, top singlet
        assert_eq!(labels[0].1, h(0.0));
        assert_eq!(labels[0].2, Some(h(0.0)));
        assert!((labels[1].0 + 4.0).abs() < 1e-12);
        assert_eq!((labels[1].1, labels[1].2), (h(0.0), Some(h(1.0))));
        assert!(labels[2].0.abs() < 1e-12);
        assert_eq!((labels[2].1, labels[2].2), (h(1.0), Some(h(0.0))));
    }

    #[test]
    fn vacuum_labels() {
        let s = analyze_sector(
            &two_site(1.0, 3.0),
            Sector::new(0, 0),
            &AnalysisOptions::default(),
        )
        .unwrap();
        let r = &s.records[0];
        assert_eq!(
            (r.energy, r.s, r.j, r.m_j),
            (0.0, h(0.0), Some(h(1.0)), h(-1.0))
        );
    }

    #[test]
    fn pseudospin_policy() {
        let spec = two_site(1.0, -1.0);
        assert!(pseudospin_lattice(&spec, PseudospinPolicy::Auto)
            .unwrap()
            .is_some());
        assert!(pseudospin_lattice(&spec, PseudospinPolicy::Off)
            .unwrap()
            .is_none());
        let nonuniform = spec.with_interactions(&[-1.0, -2.0]).unwrap();
        assert!(pseudospin_lattice(&nonuniform, PseudospinPolicy::Auto)
            .unwrap()
            .is_none());
        let diag = LatticeSpec::new(2, &[(0, 1, -1.0), (0, 0, 0.5)], &[-1.0, -1.0]).unwrap();
        assert!(pseudospin_lattice(&diag, PseudospinPolicy::Auto)
            .unwrap()
            .is_none());
        assert!(pseudospin_lattice(&diag, PseudospinPolicy::Force)
            .unwrap()
            .is_some());
        let tri =
            LatticeSpec::new(3, &[(0, 1, -1.0), (1, 2, -1.0), (0, 2, -1.0)], &[-1.0; 3]).unwrap();
        assert!(matches!(
            pseudospin_lattice(&tri, PseudospinPolicy::Force),
            Err(Error::NotBipartite)
        ));
    }

    #[test]
    fn forced_pseudospin_with_staggered_diagonal_fails_labeling() {
        let diag = LatticeSpec::new(2, &[(0, 1, -1.0), (0, 0, 0.5)], &[-1.0, -1.0]).unwrap();
        let opts = AnalysisOptions {
            pseudospin: PseudospinPolicy::Force,
            ..Default::default()
        };
        assert!(matches!(
            analyze_sector(&diag, Sector::new(1, 1), &opts),
            Err(Error::NotConserved(_))
        ));
    }

    #[test]
    fn two_site_ground_report() {
        let spectra =
            analyze_filling(&two_site(1.0, -4.0), 2, &AnalysisOptions::default()).unwrap();
        let g = ground_state_report(&spectra, DEFAULT_DEGENERACY_TOL);
        assert!(g.unique);
        assert_eq!((g.degeneracy, g.s, g.j), (1, Some(h(0.0)), Some(h(0.0))));
        assert_eq!(g.ground_sectors, vec![Sector::new(1, 1)]);
    }

    #[test]
    fn repulsive_two_site_ground_is_singlet() {
        let spectra = analyze_filling(&two_site(1.0, 4.0), 2, &AnalysisOptions::default()).unwrap();
        let g = ground_state_report(&spectra, DEFAULT_DEGENERACY_TOL);
        assert!(g.unique);
        assert_eq!(g.s, Some(h(0.0)));
    }

    #[test]
    fn lieb_chain_ground_multiplet() {
        let spec = lieb_chain(2, 1.0, 4.0).unwrap();
        let spectra = analyze_filling(&spec, 6, &AnalysisOptions::default()).unwrap();
        let g = ground_state_report(&spectra, DEFAULT_DEGENERACY_TOL);
        assert_eq!(g.s, Some(h(1.0)));
        assert_eq!(g.degeneracy, 3);
        assert!(g.unique);
        assert_eq!(sublattice_imbalance_spin(&spec), Some(h(1.0)));
    }

    #[test]
    fn two_site_towers() {
        let spectra =
            analyze_filling(&two_site(1.0, -4.0), 2, &AnalysisOptions::default()).unwrap();
        let records = all_records(&spectra);
        let spin = extract_tower(
            &records,
            TowerKind::Spin,
            TowerScope::Filling(2),
            DEFAULT_DEGENERACY_TOL,
        );
        assert!(spin.strict);
        assert_eq!(spin.entries.len(), 2);
        assert!((spin.entries[0].min_energy + 2.0 + 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(spin.entries[1].min_energy.abs() < 1e-12);
        let pseudo = extract_tower(
            &records,
            TowerKind::Pseudospin,
            TowerScope::Filling(2),
            DEFAULT_DEGENERACY_TOL,
        );
        assert!(pseudo.strict);
        assert!((pseudo.entries[1].min_energy + 4.0).abs() < 1e-12);
        assert!((pseudo.min_gap().unwrap() - (2.0 * 2f64.sqrt() - 2.0)).abs() < 1e-12);
    }

    #[test]
    fn tower_violation_detected() {
        let rec = |e: f64, s: f64| SpectrumRecord {
            energy: e,
            sector: Sector::new(1, 1),
            s: h(s),
            m: h(0.0),
            j: None,
            m_j: h(0.0),
            degeneracy_cluster: 0,
            casimir_residual: 0.0,
        };
        let records = [rec(-1.0, 0.0), rec(-2.0, 1.0), rec(0.5, 2.0)];
        let t = extract_tower(&records, TowerKind::Spin, TowerScope::All, 1e-8);
        assert!(!t.strict);
        assert_eq!(t.violations.len(), 1);
        assert_eq!(
            (t.violations[0].lower, t.violations[0].upper),
            (h(0.0), h(1.0))
        );
        assert!(t.from_value(h(1.0), 1e-8).strict);
        // no pseudospin labels at all
        let p = extract_tower(&records, TowerKind::Pseudospin, TowerScope::All, 1e-8);
        assert!(p.entries.is_empty() && p.strict);
    }

    #[test]
    fn record_json_shape() {
        let s = analyze_sector(
            &two_site(1.0, 0.0),
            Sector::new(0, 0),
            &AnalysisOptions::default(),
        )
        .unwrap();
        let v = serde_json::to_value(&s.records[0]).unwrap();
        assert_eq!(v["sector"], serde_json::json!([0, 0]));
        assert_eq!(v["j"], serde_json::json!(1.0));
        let back: SpectrumRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, s.records[0]);
    }
}
