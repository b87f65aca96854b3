//! Independent oracles for the integration tests: dense Jordan-Wigner
//! operators on the full Fock space and random model strategies.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

use lieb_towers::random::{
    random_bipartite_lattice, random_connected_lattice, seeded_rng, GraphOptions,
};
use lieb_towers::{LatticeSpec, Sector, SectorBasis};
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Dense fermion operators on `4^n` states. Mode `x` is up spin at site `x`,
/// mode `n + x` is down spin; bit `k` of a state index is the occupation of
/// mode `k`.
pub struct Fock {
    pub n: usize,
    annihilators: Vec<DMatrix<f64>>,
}

impl Fock {
    pub fn new(n: usize) -> Self {
        let modes = 2 * n;
        let dim = 1usize << modes;
        let annihilators = (0..modes)
            .map(|k| {
                let mut c = DMatrix::zeros(dim, dim);
                for s in 0..dim {
                    if s >> k & 1 == 1 {
                        let before = (s & ((1 << k) - 1)).count_ones();
                        c[(s ^ (1 << k), s)] = if before % 2 == 0 { 1.0 } else { -1.0 };
                    }
                }
                c
            })
            .collect();
        Fock { n, annihilators }
    }

    pub fn dim(&self) -> usize {
        1 << (2 * self.n)
    }

    pub fn c(&self, x: usize, up: bool) -> &DMatrix<f64> {
        &self.annihilators[if up { x } else { self.n + x }]
    }

    pub fn cdag(&self, x: usize, up: bool) -> DMatrix<f64> {
        self.c(x, up).transpose()
    }

    pub fn number(&self, x: usize, up: bool) -> DMatrix<f64> {
        self.cdag(x, up) * self.c(x, up)
    }

    pub fn hubbard(&self, spec: &LatticeSpec) -> DMatrix<f64> {
        let n = self.n;
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        for x in 0..n {
            for y in 0..n {
                let t = spec.t(x, y);
                if t != 0.0 {
                    for up in [true, false] {
                        h += self.cdag(x, up) * self.c(y, up) * t;
                    }
                }
            }
            h += self.number(x, true) * self.number(x, false) * spec.interactions()[x];
        }
        h
    }

    pub fn s_plus(&self) -> DMatrix<f64> {
        (0..self.n).fold(DMatrix::zeros(self.dim(), self.dim()), |acc, x| {
            acc + self.cdag(x, true) * self.c(x, false)
        })
    }

    pub fn s_z(&self) -> DMatrix<f64> {
        (0..self.n).fold(DMatrix::zeros(self.dim(), self.dim()), |acc, x| {
            acc + (self.number(x, true) - self.number(x, false)) * 0.5
        })
    }

    pub fn s_squared(&self) -> DMatrix<f64> {
        let sp = self.s_plus();
        let sz = self.s_z();
        sp.transpose() * &sp + &sz * &sz + sz
    }

    /// `Σ_x (-1)^ε(x) c†_x↑ c†_x↓`.
    pub fn eta_plus(&self, eps: &[u8]) -> DMatrix<f64> {
        (0..self.n).fold(DMatrix::zeros(self.dim(), self.dim()), |acc, x| {
            let sign = if eps[x] == 0 { 1.0 } else { -1.0 };
            acc + self.cdag(x, true) * self.cdag(x, false) * sign
        })
    }

    /// Full-space indices of sector `(a, b)` in the order the library uses.
    pub fn sector_indices(&self, sector: Sector) -> Vec<usize> {
        let basis = SectorBasis::new(self.n, sector).unwrap();
        basis
            .states()
            .map(|s| s.up as usize | (s.down as usize) << self.n)
            .collect()
    }
}

pub fn principal(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `(energy, s)` pairs of a sector from dense diagonalization: within each
/// degenerate cluster, `S²` is diagonalized on the eigenspace.
pub fn oracle_spin_labels(fock: &Fock, spec: &LatticeSpec, sector: Sector) -> Vec<(f64, f64)> {
    let idx = fock.sector_indices(sector);
    let h = principal(&fock.hubbard(spec), &idx);
    let s2 = principal(&fock.s_squared(), &idx);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..idx.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let e = eig.eigenvalues[order[start]];
        let mut end = start + 1;
        while end < order.len()
            && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] < 1e-7
        {
            end += 1;
        }
        let v = DMatrix::from_columns(
            &order[start..end]
                .iter()
                .map(|&k| eig.eigenvectors.column(k))
                .collect::<Vec<_>>(),
        );
        let small = v.transpose() * &s2 * &v;
        for lambda in small.symmetric_eigenvalues().iter() {
            let s = (-1.0 + (1.0 + 4.0 * lambda.max(0.0)).sqrt()) / 2.0;
            out.push((e, (2.0 * s).round() / 2.0));
        }
        start = end;
    }
    out
}

pub fn connected_lattice(seed: u64, n: usize, interaction: (f64, f64)) -> LatticeSpec {
    let opts = GraphOptions {
        interaction,
        ..GraphOptions::default()
    };
    random_connected_lattice(&mut seeded_rng(seed), n, &opts)
}

pub fn bipartite_lattice(seed: u64, n: usize, interaction: (f64, f64)) -> LatticeSpec {
    let opts = GraphOptions {
        interaction,
        ..GraphOptions::default()
    };
    random_bipartite_lattice(&mut seeded_rng(seed), n, &opts)
}

/// Connected lattice with per-site `U` in `[-3, 3]` and occasional `t_xx`.
pub fn any_lattice(sites: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = LatticeSpec> {
    (any::<u64>(), sites).prop_map(|(seed, n)| connected_lattice(seed, n, (-3.0, 3.0)))
}

pub fn attractive_lattice(
    sites: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = LatticeSpec> {
    (any::<u64>(), sites).prop_map(|(seed, n)| connected_lattice(seed, n, (-3.0, -0.2)))
}

/// Bipartite, uniform `U` of either sign, no diagonal hopping.
pub fn uniform_bipartite_lattice(
    sites: std::ops::RangeInclusive<usize>,
) -> impl Strategy<Value = LatticeSpec> {
    (any::<u64>(), sites).prop_map(|(seed, n)| bipartite_lattice(seed, n, (-4.0, 4.0)))
}

pub fn epsilon(spec: &LatticeSpec) -> Vec<u8> {
    spec.bipartition()
        .expect("bipartition attached")
        .iter()
        .map(|s| s.epsilon())
        .collect()
}

/// Components of the explicit configuration graph by breadth-first search.
pub fn oracle_components(spec: &LatticeSpec, k: usize) -> usize {
    let n = spec.n_sites();
    let nodes: Vec<u32> = (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .collect();
    let adjacent = |a: u32, b: u32| {
        let diff = a ^ b;
        if diff.count_ones() != 2 {
            return false;
        }
        let x = (a & diff).trailing_zeros() as usize;
        let y = (b & diff).trailing_zeros() as usize;
        spec.t(x, y) != 0.0
    };
    let mut seen: HashMap<u32, bool> = nodes.iter().map(|&m| (m, false)).collect();
    let mut components = 0;
    for &start in &nodes {
        if seen[&start] {
            continue;
        }
        components += 1;
        seen.insert(start, true);
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for &b in &nodes {
                if !seen[&b] && adjacent(a, b) {
                    seen.insert(b, true);
                    queue.push_back(b);
                }
            }
        }
    }
    components
}
