//! Finite lattices: hopping graph, on-site interactions and sublattice
//! structure.
//!
//! Sites are 0-based in this API. The JSON file format (see [`crate::io`])
//! uses 1-based site indices.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_SITES: usize = 16;

/// Sublattice label ε(x).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sublattice {
    A,
    B,
}

impl Sublattice {
    pub fn epsilon(self) -> u8 {
        match self {
            Sublattice::A => 0,
            Sublattice::B => 1,
        }
    }

    pub fn from_epsilon(e: u8) -> Result<Self> {
        match e {
            0 => Ok(Sublattice::A),
            1 => Ok(Sublattice::B),
            other => Err(Error::InvalidSublatticeLabel(other)),
        }
    }

    /// `(-1)^ε(x)`.
    pub fn sign(self) -> f64 {
        match self {
            Sublattice::A => 1.0,
            Sublattice::B => -1.0,
        }
    }

    fn flip(self) -> Self {
        match self {
            Sublattice::A => Sublattice::B,
            Sublattice::B => Sublattice::A,
        }
    }
}

/// A finite graph with real symmetric hopping `t_xy` and on-site `U_x`.
///
/// Immutable once built; the constructor enforces `t_xy = t_yx` and, when a
/// bipartition is attached, that no bond joins two sites of one sublattice.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    hopping: DMatrix<f64>,
    interactions: Vec<f64>,
    bipartition: Option<Vec<Sublattice>>,
}

impl LatticeSpec {
    /// Assembles a lattice from a bond list. Duplicate bonds are summed and
    /// `(x, x, t)` entries set diagonal hopping.
    pub fn new(
        n_sites: usize,
        bonds: &[(usize, usize, f64)],
        interactions: &[f64],
    ) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::EmptyLattice);
        }
        if n_sites > MAX_SITES {
            return Err(Error::TooManySites(n_sites));
        }
        if interactions.len() != n_sites {
            return Err(Error::LengthMismatch {
                what: "interactions",
                expected: n_sites,
                found: interactions.len(),
            });
        }
        for &u in interactions {
            if !u.is_finite() {
                return Err(Error::NonFinite {
                    what: "interaction",
                    value: u,
                });
            }
        }
        let mut hopping = DMatrix::zeros(n_sites, n_sites);
        for &(x, y, t) in bonds {
            for idx in [x, y] {
                if idx >= n_sites {
                    return Err(Error::SiteOutOfRange {
                        index: idx,
                        n_sites,
                    });
                }
            }
            if !t.is_finite() {
                return Err(Error::NonFinite {
                    what: "hopping",
                    value: t,
                });
            }
            hopping[(x, y)] += t;
            if x != y {
                hopping[(y, x)] += t;
            }
        }
        Ok(LatticeSpec {
            hopping,
            interactions: interactions.to_vec(),
            bipartition: None,
        })
    }

    /// Attaches a sublattice assignment, checking it against the bonds.
    pub fn with_bipartition(mut self, assignment: Vec<Sublattice>) -> Result<Self> {
        if assignment.len() != self.n_sites() {
            return Err(Error::LengthMismatch {
                what: "bipartition entries",
                expected: self.n_sites(),
                found: assignment.len(),
            });
        }
        for (x, y, _) in self.bonds() {
            if x != y && assignment[x] == assignment[y] {
                return Err(Error::InvalidBipartition { x, y });
            }
        }
        self.bipartition = Some(assignment);
        Ok(self)
    }

    /// Attaches the bipartition found by [`detect_bipartition`], if any.
    pub fn with_detected_bipartition(self) -> Self {
        match detect_bipartition(&self).assignment {
            Some(a) => self
                .with_bipartition(a)
                .expect("detected coloring is valid"),
            None => self,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.interactions.len()
    }

    pub fn hopping(&self) -> &DMatrix<f64> {
        &self.hopping
    }

    pub fn t(&self, x: usize, y: usize) -> f64 {
        self.hopping[(x, y)]
    }

    pub fn interactions(&self) -> &[f64] {
        &self.interactions
    }

    pub fn bipartition(&self) -> Option<&[Sublattice]> {
        self.bipartition.as_deref()
    }

    /// Nonzero hopping entries with `x <= y`, row-major.
    pub fn bonds(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_sites();
        let mut out = Vec::new();
        for x in 0..n {
            for y in x..n {
                let t = self.hopping[(x, y)];
                if t != 0.0 {
                    out.push((x, y, t));
                }
            }
        }
        out
    }

    /// Neighbours of `x` (sites `y != x` with `t_xy != 0`), ascending.
    pub fn neighbors(&self, x: usize) -> Vec<usize> {
        (0..self.n_sites())
            .filter(|&y| y != x && self.hopping[(x, y)] != 0.0)
            .collect()
    }

    pub fn has_diagonal_hopping(&self) -> bool {
        (0..self.n_sites()).any(|x| self.hopping[(x, x)] != 0.0)
    }

    /// The common value of `U_x` if all sites share it.
    pub fn uniform_interaction(&self) -> Option<f64> {
        let u0 = self.interactions[0];
        self.interactions.iter().all(|&u| u == u0).then_some(u0)
    }

    /// Same hopping and bipartition with new interactions.
    pub fn with_interactions(&self, interactions: &[f64]) -> Result<Self> {
        let mut out = LatticeSpec::new(self.n_sites(), &self.bonds(), interactions)?;
        out.bipartition = self.bipartition.clone();
        Ok(out)
    }

    /// Sublattice sizes `(|Λ_A|, |Λ_B|)` of the attached bipartition.
    pub fn sublattice_sizes(&self) -> Option<(usize, usize)> {
        self.bipartition.as_ref().map(|b| {
            let a = b.iter().filter(|&&s| s == Sublattice::A).count();
            (a, b.len() - a)
        })
    }

    /// Eigenvalues of the single-particle hopping matrix, ascending.
    pub fn single_particle_spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .hopping
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Number of single-particle eigenvalues with `|ε| <= tol`.
    pub fn zero_mode_count(&self, tol: f64) -> usize {
        self.single_particle_spectrum()
            .iter()
            .filter(|e| e.abs() <= tol)
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BipartitionReport {
    pub is_bipartite: bool,
    pub size_a: usize,
    pub size_b: usize,
    pub assignment: Option<Vec<Sublattice>>,
    /// Sites of an odd cycle (closing back to the first) when not bipartite.
    pub odd_cycle: Option<Vec<usize>>,
    /// Set when some `t_xx != 0`; spin results still hold but pseudospin
    /// labels are not trusted in that case.
    pub has_diagonal_hopping: bool,
}

/// Two-colors the bond graph by breadth-first search, or returns an odd
/// cycle as a certificate that no coloring exists.
///
/// Each connected component is rooted at its lowest site, which lands on
/// sublattice A.
pub fn detect_bipartition(spec: &LatticeSpec) -> BipartitionReport {
    let n = spec.n_sites();
    let mut color: Vec<Option<Sublattice>> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut depth = vec![0usize; n];

    for root in 0..n {
        if color[root].is_some() {
            continue;
        }
        color[root] = Some(Sublattice::A);
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            let cx = color[x].unwrap();
            for y in spec.neighbors(x) {
                match color[y] {
                    None => {
                        color[y] = Some(cx.flip());
                        parent[y] = Some(x);
                        depth[y] = depth[x] + 1;
                        queue.push_back(y);
                    }
                    Some(cy) if cy == cx => {
                        let cycle = odd_cycle(x, y, &parent, &depth);
                        return BipartitionReport {
                            is_bipartite: false,
                            size_a: 0,
                            size_b: 0,
                            assignment: None,
                            odd_cycle: Some(cycle),
                            has_diagonal_hopping: spec.has_diagonal_hopping(),
                        };
                    }
                    Some(_) => {}
                }
            }
        }
    }

    let assignment: Vec<Sublattice> = color.into_iter().map(Option::unwrap).collect();
    let size_a = assignment.iter().filter(|&&s| s == Sublattice::A).count();
    BipartitionReport {
        is_bipartite: true,
        size_a,
        size_b: n - size_a,
        assignment: Some(assignment),
        odd_cycle: None,
        has_diagonal_hopping: spec.has_diagonal_hopping(),
    }
}

/// Joins the BFS-tree paths from `x` and `y` to their common ancestor; with
/// the same-colored edge `x–y` this closes an odd cycle.
fn odd_cycle(x: usize, y: usize, parent: &[Option<usize>], depth: &[usize]) -> Vec<usize> {
    let (mut a, mut b) = (x, y);
    let mut left = vec![a];
    let mut right = vec![b];
    while depth[a] > depth[b] {
        a = parent[a].unwrap();
        left.push(a);
    }
    while depth[b] > depth[a] {
        b = parent[b].unwrap();
        right.push(b);
    }
    while a != b {
        a = parent[a].unwrap();
        b = parent[b].unwrap();
        left.push(a);
        right.push(b);
    }
    right.pop();
    right.reverse();
    left.extend(right);
    left
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Connectivity {
    pub connected: bool,
    /// Components as ascending site lists, ordered by their lowest site.
    pub components: Vec<Vec<usize>>,
}

/// Connected components of the bond graph (`t_xy != 0`, `x != y`).
pub fn is_connected(spec: &LatticeSpec) -> Connectivity {
    let n = spec.n_sites();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut comp = vec![root];
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for y in spec.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    comp.push(y);
                    stack.push(y);
                }
            }
        }
        comp.sort_unstable();
        components.push(comp);
    }
    Connectivity {
        connected: components.len() == 1,
        components,
    }
}

/// One-dimensional Lieb-type chain with three sites per cell.
///
/// Cell `k` holds a hub `3k` (sublattice A) bonded to rims `3k + 1` and
/// `3k + 2` (sublattice B); rim `3k + 2` also bonds to the next hub. All
/// bonds carry hopping `-t`, so `|Λ_A| = cells` and `|Λ_B| = 2 cells`.
pub fn lieb_chain(unit_cells: usize, t: f64, u: f64) -> Result<LatticeSpec> {
    if unit_cells == 0 {
        return Err(Error::EmptyLattice);
    }
    let n = 3 * unit_cells;
    let mut bonds = Vec::new();
    for k in 0..unit_cells {
        let hub = 3 * k;
        bonds.push((hub, hub + 1, -t));
        bonds.push((hub, hub + 2, -t));
        if k + 1 < unit_cells {
            bonds.push((hub + 2, hub + 3, -t));
        }
    }
    let spec = LatticeSpec::new(n, &bonds, &vec![u; n])?;
    let assignment = (0..n)
        .map(|x| {
            if x % 3 == 0 {
                Sublattice::A
            } else {
                Sublattice::B
            }
        })
        .collect();
    // With t = 0 there are no bonds and any labeling is admissible.
    spec.with_bipartition(assignment)
}

/// Open chain `0 - 1 - ... - (n-1)` with hopping `-t` and uniform `U`,
/// bipartition attached.
pub fn open_chain(n_sites: usize, t: f64, u: f64) -> Result<LatticeSpec> {
    let bonds: Vec<_> = (0..n_sites.saturating_sub(1))
        .map(|x| (x, x + 1, -t))
        .collect();
    let spec = LatticeSpec::new(n_sites, &bonds, &vec![u; n_sites])?;
    let assignment = (0..n_sites)
        .map(|x| {
            if x % 2 == 0 {
                Sublattice::A
            } else {
                Sublattice::B
            }
        })
        .collect();
    spec.with_bipartition(assignment)
}

/// The two-site model `-t Σ_σ (c†_1σ c_2σ + h.c.) + U Σ_x n_x↑ n_x↓`.
pub fn two_site(t: f64, u: f64) -> LatticeSpec {
    open_chain(2, t, u).expect("two-site model is always valid")
}
