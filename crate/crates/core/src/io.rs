//! JSON model files and report envelopes.
//!
//! A model file holds `sites`, `bonds` as `[x, y, t]` triples,
//! `interactions`, an optional `bipartition` of 0/1 labels and an optional
//! `phonons` block. Site indices are 1-based in files and 0-based in
//! memory. Writing a parsed file again reproduces it byte for byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Sublattice, MAX_SITES};
use crate::mbgraph::ConfigPath;
use crate::phonon::PhononSpec;

/// Version stamped on every report.
pub const SCHEMA_VERSION: u32 = 1;

/// A number or a list of numbers; a number is repeated for every mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerMode<T> {
    One(T),
    Each(Vec<T>),
}

impl<T: Clone> PerMode<T> {
    fn expand(&self, modes: usize, what: &'static str) -> Result<Vec<T>> {
        match self {
            PerMode::One(v) => Ok(vec![v.clone(); modes]),
            PerMode::Each(v) if v.len() == modes => Ok(v.clone()),
            PerMode::Each(v) => Err(Error::LengthMismatch {
                what,
                expected: modes,
                found: v.len(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhononFile {
    pub modes: usize,
    pub mass: PerMode<f64>,
    pub omega: PerMode<f64>,
    /// One row per mode, one column per site.
    pub coupling: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quartic: Option<PerMode<f64>>,
    pub n_max: PerMode<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub sites: usize,
    pub bonds: Vec<(usize, usize, f64)>,
    pub interactions: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bipartition: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phonons: Option<PhononFile>,
}

/// A parsed model.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub lattice: LatticeSpec,
    pub phonons: Option<PhononSpec>,
}

impl PhononFile {
    pub fn to_spec(&self) -> Result<PhononSpec> {
        let nu = self.modes;
        let quartic = match &self.quartic {
            Some(q) => q.expand(nu, "quartic coefficients")?,
            None => vec![0.0; nu],
        };
        PhononSpec::new(
            self.mass.expand(nu, "masses")?,
            self.omega.expand(nu, "frequencies")?,
            self.coupling.clone(),
            quartic,
            self.n_max.expand(nu, "truncations")?,
        )
    }

    pub fn from_spec(ph: &PhononSpec) -> Self {
        PhononFile {
            modes: ph.n_modes(),
            mass: PerMode::Each(ph.masses.clone()),
            omega: PerMode::Each(ph.frequencies.clone()),
            coupling: ph.coupling.clone(),
            quartic: Some(PerMode::Each(ph.quartic.clone())),
            n_max: PerMode::Each(ph.n_max.clone()),
        }
    }
}

impl ModelFile {
    pub fn to_model(&self) -> Result<Model> {
        let n = self.sites;
        if n == 0 {
            return Err(Error::EmptyLattice);
        }
        if n > MAX_SITES {
            return Err(Error::TooManySites(n));
        }
        // per unordered pair: summed t as listed (x ≤ y) and reversed
        let mut pairs: BTreeMap<(usize, usize), [Option<f64>; 2]> = BTreeMap::new();
        for &(x, y, t) in &self.bonds {
            for s in [x, y] {
                if s == 0 || s > n {
                    return Err(Error::SiteOutOfRange {
                        index: s,
                        n_sites: n,
                    });
                }
            }
            let (key, dir) = if x <= y {
                ((x - 1, y - 1), 0)
            } else {
                ((y - 1, x - 1), 1)
            };
            let slot = &mut pairs.entry(key).or_default()[dir];
            *slot = Some(slot.unwrap_or(0.0) + t);
        }
        let mut bonds = Vec::with_capacity(pairs.len());
        for ((x, y), [fwd, rev]) in pairs {
            let t = match (fwd, rev) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::ConflictingBond {
                        x: x + 1,
                        y: y + 1,
                        first: a,
                        second: b,
                    })
                }
                (Some(a), _) | (None, Some(a)) => a,
                (None, None) => unreachable!(),
            };
            bonds.push((x, y, t));
        }
        let mut lattice = LatticeSpec::new(n, &bonds, &self.interactions)?;
        if let Some(labels) = &self.bipartition {
            if labels.len() != n {
                return Err(Error::LengthMismatch {
                    what: "bipartition labels",
                    expected: n,
                    found: labels.len(),
                });
            }
            let assignment = labels
                .iter()
                .map(|&e| Sublattice::from_epsilon(e))
                .collect::<Result<_>>()?;
            lattice = lattice.with_bipartition(assignment)?;
        }
        let phonons = self.phonons.as_ref().map(PhononFile::to_spec).transpose()?;
        if let Some(ph) = &phonons {
            for row in &ph.coupling {
                if row.len() != n {
                    return Err(Error::LengthMismatch {
                        what: "coupling columns",
                        expected: n,
                        found: row.len(),
                    });
                }
            }
        }
        Ok(Model { lattice, phonons })
    }

    pub fn from_model(lattice: &LatticeSpec, phonons: Option<&PhononSpec>) -> Self {
        ModelFile {
            sites: lattice.n_sites(),
            bonds: lattice
                .bonds()
                .into_iter()
                .map(|(x, y, t)| (x + 1, y + 1, t))
                .collect(),
            interactions: lattice.interactions().to_vec(),
            bipartition: lattice
                .bipartition()
                .map(|b| b.iter().map(|s| s.epsilon()).collect()),
            phonons: phonons.map(PhononFile::from_spec),
        }
    }
}

/// Parses a model document. Malformed JSON and invalid contents both come
/// back as [`Error::Parse`].
pub fn parse_model(text: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.to_model().map_err(|e| Error::Parse(e.to_string()))
}

/// Canonical pretty-printed model document, newline terminated.
pub fn write_model(lattice: &LatticeSpec, phonons: Option<&PhononSpec>) -> String {
    let mut s = serde_json::to_string_pretty(&ModelFile::from_model(lattice, phonons))
        .expect("model serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

/// `body` wrapped with the schema version and a report kind, pretty
/// printed and newline terminated.
pub fn report_json<T: Serialize>(kind: &str, body: &T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope {
        schema_version: SCHEMA_VERSION,
        kind,
        body,
    })
    .expect("report serializes");
    s.push('\n');
    s
}

/// A configuration path with 1-based sites.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathReport {
    pub nodes: Vec<Vec<usize>>,
    pub moves: Vec<[usize; 2]>,
    pub chain_product: f64,
}

impl PathReport {
    pub fn new(path: &ConfigPath, chain_product: f64) -> Self {
        PathReport {
            nodes: path
                .nodes
                .iter()
                .map(|n| n.sites().iter().map(|s| s + 1).collect())
                .collect(),
            moves: path.moves.iter().map(|m| [m.from + 1, m.to + 1]).collect(),
            chain_product,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{lieb_chain, two_site};

    #[test]
    fn two_site_file() {
        let m = parse_model(r#"{"sites": 2, "bonds": [[1, 2, -1.0]], "interactions": [-4, -4]}"#)
            .unwrap();
        assert_eq!(m.lattice.hopping(), two_site(1.0, -4.0).hopping());
        assert_eq!(m.lattice.interactions(), &[-4.0, -4.0]);
        assert!(m.lattice.bipartition().is_none());
        assert!(m.phonons.is_none());
    }

    #[test]
    fn mirrored_bonds() {
        let same = parse_model(
            r#"{"sites": 2, "bonds": [[1, 2, -1], [2, 1, -1]], "interactions": [0, 0]}"#,
        )
        .unwrap();
        assert_eq!(same.lattice.t(0, 1), -1.0);
        let err = parse_model(
            r#"{"sites": 2, "bonds": [[1, 2, -1], [2, 1, -2]], "interactions": [0, 0]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("listed twice"));
        let summed = parse_model(
            r#"{"sites": 2, "bonds": [[1, 2, -1], [1, 2, -1]], "interactions": [0, 0]}"#,
        )
        .unwrap();
        assert_eq!(summed.lattice.t(1, 0), -2.0);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "{",
            r#"{"sites": 0, "bonds": [], "interactions": []}"#,
            r#"{"sites": 2, "bonds": [[0, 1, 1]], "interactions": [0, 0]}"#,
            r#"{"sites": 2, "bonds": [[1, 3, 1]], "interactions": [0, 0]}"#,
            r#"{"sites": 2, "bonds": [], "interactions": [0]}"#,
            r#"{"sites": 2, "bonds": [], "interactions": [0, 0], "bipartition": [0, 2]}"#,
            r#"{"sites": 2, "bonds": [[1, 2, 1]], "interactions": [0, 0], "bipartition": [0, 0]}"#,
            r#"{"sites": 2, "bonds": [], "interactions": [0, 0], "extra": 1}"#,
        ] {
            assert!(matches!(parse_model(bad), Err(Error::Parse(_))), "{bad}");
        }
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let lat = lieb_chain(2, 0.7, 3.1).unwrap();
        let ph = PhononSpec::holstein(6, 0.3, 1.1, 0.9, 3).unwrap();
        let text = write_model(&lat, Some(&ph));
        let back = parse_model(&text).unwrap();
        assert_eq!(write_model(&back.lattice, back.phonons.as_ref()), text);
        assert_eq!(back.lattice, lat);
    }

    #[test]
    fn phonon_block_scalars() {
        let text = r#"{"sites": 1, "bonds": [], "interactions": [0],
            "phonons": {"modes": 1, "mass": 1, "omega": 2, "coupling": [[0.5]], "n_max": 4}}"#;
        let ph = parse_model(text).unwrap().phonons.unwrap();
        assert_eq!(
            (ph.frequencies[0], ph.n_max[0], ph.quartic[0]),
            (2.0, 4, 0.0)
        );
    }

    #[test]
    fn envelope_carries_version() {
        let v: serde_json::Value =
            serde_json::from_str(&report_json("probe", &serde_json::json!({"x": 1}))).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["kind"], "probe");
        assert_eq!(v["x"], 1);
    }
}
