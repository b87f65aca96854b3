//! Occupation-number bases for fixed `(N_↑, N_↓)` sectors.
//!
//! Fermionic signs follow a single global ordering of spin orbitals: every
//! up-spin orbital precedes every down-spin orbital, each block in ascending
//! site order, so a basis state is
//! `c†_{x1↑} … c†_{xN↑} c†_{y1↓} … c†_{yM↓} |0⟩` with `x1 < x2 < …` and
//! `y1 < y2 < …`. A spin-conserving hop therefore never picks up a sign from
//! the other spin species, and the `m = 0` sector factorizes as
//! (up configuration) × (down configuration) without cross-spin signs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::MAX_SITES;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// A fixed `(N_↑, N_↓)` block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sector {
    pub n_up: usize,
    pub n_down: usize,
}

impl Sector {
    pub const fn new(n_up: usize, n_down: usize) -> Self {
        Sector { n_up, n_down }
    }

    pub fn n_electrons(self) -> usize {
        self.n_up + self.n_down
    }

    /// Every sector of a lattice with `n_sites` sites holding `n_e` electrons,
    /// ordered by ascending `N_↑`.
    pub fn with_filling(n_sites: usize, n_e: usize) -> Vec<Sector> {
        (0..=n_sites)
            .filter(|&a| a <= n_e && n_e - a <= n_sites)
            .map(|a| Sector::new(a, n_e - a))
            .collect()
    }

    /// All `(n+1)²` sectors of an `n`-site lattice, row-major in `(N_↑, N_↓)`.
    pub fn all(n_sites: usize) -> Vec<Sector> {
        (0..=n_sites)
            .flat_map(|a| (0..=n_sites).map(move |b| Sector::new(a, b)))
            .collect()
    }

    pub fn spin_flipped(self) -> Sector {
        Sector::new(self.n_down, self.n_up)
    }

    /// Target of `S⁺`; `None` when no down electron is left to flip.
    pub fn spin_raised(self, n_sites: usize) -> Option<Sector> {
        (self.n_down > 0 && self.n_up < n_sites)
            .then(|| Sector::new(self.n_up + 1, self.n_down - 1))
    }

    pub fn spin_lowered(self, n_sites: usize) -> Option<Sector> {
        (self.n_up > 0 && self.n_down < n_sites)
            .then(|| Sector::new(self.n_up - 1, self.n_down + 1))
    }

    /// Target of `J⁺` (adds an up-down pair).
    pub fn pair_raised(self, n_sites: usize) -> Option<Sector> {
        (self.n_up < n_sites && self.n_down < n_sites)
            .then(|| Sector::new(self.n_up + 1, self.n_down + 1))
    }

    pub fn pair_lowered(self) -> Option<Sector> {
        (self.n_up > 0 && self.n_down > 0).then(|| Sector::new(self.n_up - 1, self.n_down - 1))
    }
}

/// Up and down occupation bitsets; bit `x` set means site `x` is occupied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    pub up: u32,
    pub down: u32,
}

impl FockState {
    pub const VACUUM: FockState = FockState { up: 0, down: 0 };

    pub fn new(up: u32, down: u32) -> Self {
        FockState { up, down }
    }

    /// Builds a state from site lists (0-based).
    pub fn from_sites(up: &[usize], down: &[usize]) -> Self {
        FockState {
            up: up.iter().fold(0, |m, &x| m | 1 << x),
            down: down.iter().fold(0, |m, &x| m | 1 << x),
        }
    }

    pub fn mask(self, spin: Spin) -> u32 {
        match spin {
            Spin::Up => self.up,
            Spin::Down => self.down,
        }
    }

    fn with_mask(self, spin: Spin, mask: u32) -> Self {
        match spin {
            Spin::Up => FockState { up: mask, ..self },
            Spin::Down => FockState { down: mask, ..self },
        }
    }

    pub fn is_occupied(self, x: usize, spin: Spin) -> bool {
        self.mask(spin) >> x & 1 == 1
    }

    pub fn sector(self) -> Sector {
        Sector::new(
            self.up.count_ones() as usize,
            self.down.count_ones() as usize,
        )
    }

    /// Number of occupied spin orbitals preceding orbital `(x, spin)` in the
    /// global ordering.
    fn orbitals_before(self, x: usize, spin: Spin) -> u32 {
        let below = (1u32 << x) - 1;
        match spin {
            Spin::Up => (self.up & below).count_ones(),
            Spin::Down => self.up.count_ones() + (self.down & below).count_ones(),
        }
    }

    /// `c_{xσ}|self⟩`, or `None` if the orbital is empty.
    pub fn annihilate(self, x: usize, spin: Spin) -> Option<(FockState, f64)> {
        if !self.is_occupied(x, spin) {
            return None;
        }
        let sign = parity_sign(self.orbitals_before(x, spin));
        Some((self.with_mask(spin, self.mask(spin) & !(1 << x)), sign))
    }

    /// `c†_{xσ}|self⟩`, or `None` if the orbital is already filled.
    pub fn create(self, x: usize, spin: Spin) -> Option<(FockState, f64)> {
        if self.is_occupied(x, spin) {
            return None;
        }
        let sign = parity_sign(self.orbitals_before(x, spin));
        Some((self.with_mask(spin, self.mask(spin) | 1 << x), sign))
    }

    /// Same occupations with up and down exchanged (no sign applied).
    pub fn spin_swapped(self) -> Self {
        FockState {
            up: self.down,
            down: self.up,
        }
    }
}

fn parity_sign(count: u32) -> f64 {
    if count.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `c†_{xσ} c_{yσ}|state⟩` with its fermionic sign, or `Ok(None)` when the
/// result vanishes. `x == y` acts as the number operator.
pub fn apply_hop(
    state: FockState,
    n_sites: usize,
    x: usize,
    y: usize,
    spin: Spin,
) -> Result<Option<(FockState, f64)>> {
    for idx in [x, y] {
        if idx >= n_sites {
            return Err(Error::SiteOutOfRange {
                index: idx,
                n_sites,
            });
        }
    }
    Ok(state
        .annihilate(y, spin)
        .and_then(|(s1, sign1)| s1.create(x, spin).map(|(s2, sign2)| (s2, sign1 * sign2))))
}

/// `C(n, k)` as `u64`, `0` when `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// `4^n`, the dimension of the full Fock space of `n` sites.
pub fn total_dimension(n_sites: usize) -> Result<u64> {
    if n_sites > 31 {
        return Err(Error::TooManySites(n_sites));
    }
    Ok(1u64 << (2 * n_sites))
}

/// All `N`-particle occupation patterns of `n` sites for one spin species,
/// sorted by bitmask value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigBasis {
    n_sites: usize,
    n_particles: usize,
    masks: Vec<u32>,
}

impl ConfigBasis {
    pub fn new(n_sites: usize, n_particles: usize) -> Result<Self> {
        if n_sites > MAX_SITES {
            return Err(Error::TooManySites(n_sites));
        }
        if n_particles > n_sites {
            return Err(Error::OccupationExceedsSites {
                n_sites,
                n_up: n_particles,
                n_down: 0,
            });
        }
        let mut masks = Vec::with_capacity(binomial(n_sites, n_particles) as usize);
        if n_particles == 0 {
            masks.push(0);
        } else {
            // Gosper's hack walks same-popcount masks in ascending order.
            let mut m: u32 = (1 << n_particles) - 1;
            let limit: u32 = 1 << n_sites;
            while m < limit {
                masks.push(m);
                let c = m & m.wrapping_neg();
                let r = m + c;
                m = (((r ^ m) >> 2) / c) | r;
            }
        }
        Ok(ConfigBasis {
            n_sites,
            n_particles,
            masks,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[u32] {
        &self.masks
    }

    pub fn mask(&self, k: usize) -> u32 {
        self.masks[k]
    }

    /// Position of `mask` in the ascending order (combinatorial number
    /// system), or `None` for a mask outside this basis.
    pub fn rank(&self, mask: u32) -> Option<usize> {
        if mask >> self.n_sites != 0 || mask.count_ones() as usize != self.n_particles {
            return None;
        }
        let mut rank = 0u64;
        let mut m = mask;
        let mut i = 0;
        while m != 0 {
            let pos = m.trailing_zeros() as usize;
            i += 1;
            rank += binomial(pos, i);
            m &= m - 1;
        }
        Some(rank as usize)
    }
}

/// Basis of one `(N_↑, N_↓)` sector, ordered by `(up_mask, down_mask)`
/// ascending; the flat index is `rank(up) * dim_down + rank(down)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorBasis {
    sector: Sector,
    up: ConfigBasis,
    down: ConfigBasis,
}

impl SectorBasis {
    pub fn new(n_sites: usize, sector: Sector) -> Result<Self> {
        if sector.n_up > n_sites || sector.n_down > n_sites {
            return Err(Error::OccupationExceedsSites {
                n_sites,
                n_up: sector.n_up,
                n_down: sector.n_down,
            });
        }
        Ok(SectorBasis {
            sector,
            up: ConfigBasis::new(n_sites, sector.n_up)?,
            down: ConfigBasis::new(n_sites, sector.n_down)?,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.up.n_sites
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn up(&self) -> &ConfigBasis {
        &self.up
    }

    pub fn down(&self) -> &ConfigBasis {
        &self.down
    }

    pub fn len(&self) -> usize {
        self.up.len() * self.down.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn state(&self, k: usize) -> FockState {
        let d = self.down.len();
        FockState::new(self.up.mask(k / d), self.down.mask(k % d))
    }

    pub fn states(&self) -> impl Iterator<Item = FockState> + '_ {
        (0..self.len()).map(move |k| self.state(k))
    }

    pub fn index(&self, state: FockState) -> Option<usize> {
        Some(self.up.rank(state.up)? * self.down.len() + self.down.rank(state.down)?)
    }
}
