//! Seeded random lattices for the randomized suites.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lattice::LatticeSpec;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphOptions {
    /// Probability of each non-tree edge.
    pub extra_edge_prob: f64,
    /// Range of `|t|` on bonds; the sign is random.
    pub hopping: (f64, f64),
    /// Probability of a diagonal `t_xx` per site, drawn from `[-0.5, 0.5]`.
    pub diagonal_prob: f64,
    /// Per-site `U_x` range.
    pub interaction: (f64, f64),
}

impl Default for GraphOptions {
    fn default() -> Self {
        GraphOptions {
            extra_edge_prob: 0.3,
            hopping: (0.3, 1.5),
            diagonal_prob: 0.2,
            interaction: (-3.0, -0.2),
        }
    }
}

fn hop<R: Rng>(rng: &mut R, opts: &GraphOptions) -> f64 {
    let mag = rng.random_range(opts.hopping.0..=opts.hopping.1);
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

fn finish<R: Rng>(
    rng: &mut R,
    n: usize,
    mut bonds: Vec<(usize, usize, f64)>,
    opts: &GraphOptions,
) -> LatticeSpec {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    for b in &mut bonds {
        b.0 = perm[b.0];
        b.1 = perm[b.1];
    }
    for x in 0..n {
        if opts.diagonal_prob > 0.0 && rng.random_bool(opts.diagonal_prob) {
            bonds.push((x, x, rng.random_range(-0.5..=0.5)));
        }
    }
    let u: Vec<f64> = (0..n)
        .map(|_| rng.random_range(opts.interaction.0..=opts.interaction.1))
        .collect();
    LatticeSpec::new(n, &bonds, &u).expect("generated lattice is valid")
}

/// Random spanning tree plus extra edges, randomly relabelled.
pub fn random_connected_lattice<R: Rng>(
    rng: &mut R,
    n_sites: usize,
    opts: &GraphOptions,
) -> LatticeSpec {
    let mut bonds = Vec::new();
    for k in 1..n_sites {
        let parent = rng.random_range(0..k);
        bonds.push((parent, k, hop(rng, opts)));
    }
    for a in 0..n_sites {
        for b in a + 1..n_sites {
            let tree_edge = bonds.iter().any(|&(x, y, _)| (x, y) == (a, b));
            if !tree_edge && rng.random_bool(opts.extra_edge_prob) {
                bonds.push((a, b, hop(rng, opts)));
            }
        }
    }
    finish(rng, n_sites, bonds, opts)
}

/// Connected bipartite lattice without diagonal hopping; interactions are
/// uniform at a value drawn from the interaction range. The bipartition is
/// attached.
pub fn random_bipartite_lattice<R: Rng>(
    rng: &mut R,
    n_sites: usize,
    opts: &GraphOptions,
) -> LatticeSpec {
    let mut color = vec![0u8; n_sites];
    let mut bonds = Vec::new();
    for k in 1..n_sites {
        let parent = rng.random_range(0..k);
        color[k] = 1 - color[parent];
        bonds.push((parent, k, hop(rng, opts)));
    }
    for a in 0..n_sites {
        for b in a + 1..n_sites {
            let tree_edge = bonds.iter().any(|&(x, y, _)| (x, y) == (a, b));
            if color[a] != color[b] && !tree_edge && rng.random_bool(opts.extra_edge_prob) {
                bonds.push((a, b, hop(rng, opts)));
            }
        }
    }
    let u = rng.random_range(opts.interaction.0..=opts.interaction.1);
    let plain = GraphOptions {
        diagonal_prob: 0.0,
        interaction: (u, u),
        ..*opts
    };
    finish(rng, n_sites, bonds, &plain).with_detected_bipartition()
}
