//! The single-spin configuration lattice and its connecting paths.
//!
//! Nodes are `N`-site occupation sets of one spin species; two nodes are
//! joined when they differ by a single hop along a bond of the lattice. A
//! connected lattice gives a connected configuration lattice, and
//! [`find_path`] constructs an explicit path by moving markers along bonds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fockspace::{apply_hop, binomial, ConfigBasis, FockState, Spin};
use crate::lattice::{is_connected, LatticeSpec};

/// Default cap on the number of configurations in a census.
pub const DEFAULT_CENSUS_CAP: usize = 5000;

/// An unordered set of occupied sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigNode {
    mask: u32,
}

impl ConfigNode {
    pub fn from_sites(sites: &[usize], n_sites: usize) -> Result<Self> {
        let mut mask = 0u32;
        for &x in sites {
            if x >= n_sites {
                return Err(Error::SiteOutOfRange { index: x, n_sites });
            }
            if mask >> x & 1 == 1 {
                return Err(Error::RepeatedSite(x));
            }
            mask |= 1 << x;
        }
        Ok(ConfigNode { mask })
    }

    pub fn from_mask(mask: u32) -> Self {
        ConfigNode { mask }
    }

    pub fn mask(self) -> u32 {
        self.mask
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn contains(self, x: usize) -> bool {
        self.mask >> x & 1 == 1
    }

    /// Occupied sites in ascending order.
    pub fn sites(self) -> Vec<usize> {
        (0..32).filter(|&x| self.contains(x)).collect()
    }

    fn moved(self, from: usize, to: usize) -> Self {
        ConfigNode {
            mask: (self.mask & !(1 << from)) | 1 << to,
        }
    }
}

/// A hop of one marker from `from` to `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Move {
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigPath {
    pub nodes: Vec<ConfigNode>,
    /// `moves[k]` takes `nodes[k]` to `nodes[k + 1]`.
    pub moves: Vec<Move>,
}

impl ConfigPath {
    fn single(node: ConfigNode) -> Self {
        ConfigPath {
            nodes: vec![node],
            moves: Vec::new(),
        }
    }

    fn push(&mut self, mv: Move) {
        let last = *self.nodes.last().unwrap();
        self.nodes.push(last.moved(mv.from, mv.to));
        self.moves.push(mv);
    }

    /// Removes every cycle so each node appears once. Each retained move is
    /// still a move out of the node it follows.
    fn splice_cycles(&mut self) {
        let mut k = 0;
        while k < self.nodes.len() {
            if let Some(back) = self.nodes[k + 1..]
                .iter()
                .rposition(|&n| n == self.nodes[k])
            {
                let last = k + 1 + back;
                self.nodes.drain(k + 1..=last);
                self.moves.drain(k..last);
            }
            k += 1;
        }
    }
}

/// Sites on a shortest path in the bond graph from `start` to the nearest
/// site satisfying `goal`, neighbours visited in ascending order.
fn bfs_to(spec: &LatticeSpec, start: usize, goal: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
    let n = spec.n_sites();
    let mut parent = vec![usize::MAX; n];
    parent[start] = start;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        if x != start && goal(x) {
            let mut path = vec![x];
            let mut cur = x;
            while cur != start {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for y in spec.neighbors(x) {
            if parent[y] == usize::MAX {
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    None
}

/// A path of single hops from `x` to `y` in the configuration lattice.
///
/// Sites of `y` already in `x` are settled first. Each remaining target
/// site, in ascending order, receives a marker from the nearest unsettled
/// one along a shortest bond path; settled markers sitting on that path
/// are pushed one slot forward in turn, so no hop lands on an occupied
/// site. Cycles are spliced out afterwards.
pub fn find_path(spec: &LatticeSpec, x: ConfigNode, y: ConfigNode) -> Result<ConfigPath> {
    let n = spec.n_sites();
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            what: "occupied sites",
            expected: x.len(),
            found: y.len(),
        });
    }
    for node in [x, y] {
        if let Some(&bad) = node.sites().iter().find(|&&s| s >= n) {
            return Err(Error::SiteOutOfRange {
                index: bad,
                n_sites: n,
            });
        }
    }
    let conn = is_connected(spec);
    if !conn.connected {
        return Err(Error::Disconnected {
            components: conn.components,
        });
    }

    let mut path = ConfigPath::single(x);
    let mut settled = x.mask & y.mask;
    for target in y.sites() {
        if settled >> target & 1 == 1 {
            continue;
        }
        let cur = *path.nodes.last().unwrap();
        let route = bfs_to(spec, target, |s| cur.contains(s) && settled >> s & 1 == 0)
            .expect("connected lattice holds an unsettled marker");
        // route[0] = target (empty), route[last] = the unsettled marker
        let occupied: Vec<usize> = (1..route.len())
            .filter(|&i| cur.contains(route[i]))
            .collect();
        let mut hole = 0;
        for &i in &occupied {
            for step in (hole..i).rev() {
                path.push(Move {
                    from: route[step + 1],
                    to: route[step],
                });
            }
            hole = i;
        }
        settled |= 1 << target;
    }
    path.splice_cycles();
    Ok(path)
}

/// The matrix element `⟨X_m| K Π^{X_{m-1}} K ⋯ K |X_1⟩` along the path:
/// the product of the single-hop elements of the hopping operator, fermion
/// signs included.
pub fn verify_chain_product(spec: &LatticeSpec, path: &ConfigPath) -> Result<f64> {
    let n = spec.n_sites();
    if path.nodes.is_empty() || path.moves.len() + 1 != path.nodes.len() {
        return Err(Error::InvalidPath("node and move counts disagree".into()));
    }
    let mut product = 1.0;
    for (k, mv) in path.moves.iter().enumerate() {
        let (a, b) = (path.nodes[k], path.nodes[k + 1]);
        if mv.from >= n || mv.to >= n {
            return Err(Error::InvalidPath(format!(
                "move {} -> {} leaves the lattice",
                mv.from, mv.to
            )));
        }
        let t = spec.t(mv.to, mv.from);
        if mv.from == mv.to || t == 0.0 {
            return Err(Error::InvalidPath(format!(
                "no bond between {} and {}",
                mv.from, mv.to
            )));
        }
        let hopped = apply_hop(FockState::new(a.mask, 0), n, mv.to, mv.from, Spin::Up)?;
        match hopped {
            Some((s, sign)) if s.up == b.mask => product *= t * sign,
            _ => {
                return Err(Error::InvalidPath(format!(
                    "step {k} is not the hop {} -> {}",
                    mv.from, mv.to
                )))
            }
        }
    }
    for (i, a) in path.nodes.iter().enumerate() {
        if path.nodes[i + 1..].contains(a) {
            return Err(Error::InvalidPath("configuration visited twice".into()));
        }
    }
    Ok(product)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusReport {
    pub n_particles: usize,
    pub nodes: usize,
    pub edges: usize,
    pub components: usize,
    /// Component sizes, largest first.
    pub component_sizes: Vec<usize>,
    pub lattice_connected: bool,
    pub lattice_components: usize,
    /// A connected lattice gave a connected configuration lattice.
    pub connectivity_inherited: bool,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Builds the configuration lattice of `n` particles and counts its
/// components.
pub fn connectivity_census(spec: &LatticeSpec, n: usize, cap: usize) -> Result<CensusReport> {
    let sites = spec.n_sites();
    let size = binomial(sites, n.min(sites + 1));
    if size > cap as u64 {
        return Err(Error::CapExceeded {
            required: size.min(usize::MAX as u64) as usize,
            cap,
        });
    }
    let basis = ConfigBasis::new(sites, n)?;
    let mut uf = UnionFind((0..basis.len()).collect());
    let mut edges = 0;
    let bonds: Vec<(usize, usize)> = spec
        .bonds()
        .into_iter()
        .filter(|b| b.0 != b.1)
        .map(|b| (b.0, b.1))
        .collect();
    for (k, &mask) in basis.masks().iter().enumerate() {
        for &(a, b) in &bonds {
            if mask >> a & 1 == 1 && mask >> b & 1 == 0 {
                let other = basis
                    .rank((mask & !(1 << a)) | 1 << b)
                    .expect("same particle number");
                edges += 1;
                uf.union(k, other);
            }
        }
    }
    let mut sizes = std::collections::BTreeMap::new();
    for k in 0..basis.len() {
        *sizes.entry(uf.find(k)).or_insert(0usize) += 1;
    }
    let mut component_sizes: Vec<usize> = sizes.into_values().collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    let conn = is_connected(spec);
    Ok(CensusReport {
        n_particles: n,
        nodes: basis.len(),
        edges,
        components: component_sizes.len(),
        component_sizes: component_sizes.clone(),
        lattice_connected: conn.connected,
        lattice_components: conn.components.len(),
        connectivity_inherited: !conn.connected || component_sizes.len() == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::open_chain;

    fn node(sites: &[usize], n: usize) -> ConfigNode {
        ConfigNode::from_sites(sites, n).unwrap()
    }

    #[test]
    fn three_site_chain_path() {
        let spec = open_chain(3, 1.0, 0.0).unwrap();
        let p = find_path(&spec, node(&[0, 1], 3), node(&[1, 2], 3)).unwrap();
        assert_eq!(p.nodes.first(), Some(&node(&[0, 1], 3)));
        assert_eq!(p.nodes.last(), Some(&node(&[1, 2], 3)));
        assert!(p.moves.len() >= 2);
        assert_eq!(verify_chain_product(&spec, &p).unwrap().abs(), 1.0);
    }

    #[test]
    fn trivial_path() {
        let spec = open_chain(3, 1.0, 0.0).unwrap();
        let p = find_path(&spec, node(&[2], 3), node(&[2], 3)).unwrap();
        assert_eq!(p.nodes.len(), 1);
        assert_eq!(verify_chain_product(&spec, &p).unwrap(), 1.0);
    }

    #[test]
    fn blocked_move_cascades() {
        // star centre 0 with leaves 1..4; markers on 0 and 1, targets 0 and 2.
        // target 2 is reached through the settled marker on 0.
        let spec = LatticeSpec::new(
            5,
            &[(0, 1, -1.0), (0, 2, -1.0), (0, 3, -1.0), (0, 4, -1.0)],
            &[0.0; 5],
        )
        .unwrap();
        let p = find_path(&spec, node(&[0, 1], 5), node(&[0, 2], 5)).unwrap();
        assert_eq!(p.nodes.last(), Some(&node(&[0, 2], 5)));
        assert!(verify_chain_product(&spec, &p).unwrap() != 0.0);
    }

    #[test]
    fn mismatched_sizes_and_disconnected() {
        let spec = open_chain(3, 1.0, 0.0).unwrap();
        assert!(matches!(
            find_path(&spec, node(&[0], 3), node(&[0, 1], 3)),
            Err(Error::LengthMismatch { .. })
        ));
        let split = LatticeSpec::new(4, &[(0, 1, -1.0), (2, 3, -1.0)], &[0.0; 4]).unwrap();
        assert!(matches!(
            find_path(&split, node(&[0], 4), node(&[3], 4)),
            Err(Error::Disconnected { .. })
        ));
    }

    #[test]
    fn splice_removes_cycles() {
        let a = node(&[0], 3);
        let mut p = ConfigPath::single(a);
        p.push(Move { from: 0, to: 1 });
        p.push(Move { from: 1, to: 0 });
        p.push(Move { from: 0, to: 1 });
        p.push(Move { from: 1, to: 2 });
        p.splice_cycles();
        assert_eq!(p.nodes, vec![a, node(&[1], 3), node(&[2], 3)]);
        assert_eq!(
            p.moves,
            vec![Move { from: 0, to: 1 }, Move { from: 1, to: 2 }]
        );
    }

    #[test]
    fn invalid_path_rejected() {
        let spec = open_chain(3, 1.0, 0.0).unwrap();
        let mut p = ConfigPath::single(node(&[0], 3));
        p.push(Move { from: 0, to: 2 });
        assert!(matches!(
            verify_chain_product(&spec, &p),
            Err(Error::InvalidPath(_))
        ));
    }

    #[test]
    fn census_examples() {
        let chain = open_chain(5, 1.0, 0.0).unwrap();
        let c = connectivity_census(&chain, 2, DEFAULT_CENSUS_CAP).unwrap();
        assert_eq!((c.nodes, c.components), (10, 1));
        let split = LatticeSpec::new(4, &[(0, 1, -1.0), (2, 3, -1.0)], &[0.0; 4]).unwrap();
        let c = connectivity_census(&split, 1, DEFAULT_CENSUS_CAP).unwrap();
        assert_eq!((c.components, c.lattice_components), (2, 2));
        let full = connectivity_census(&split, 4, DEFAULT_CENSUS_CAP).unwrap();
        assert_eq!((full.nodes, full.components), (1, 1));
        assert!(matches!(
            connectivity_census(&chain, 2, 5),
            Err(Error::CapExceeded {
                required: 10,
                cap: 5
            })
        ));
    }
}
