//! Group descriptions and pipeline configuration.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::discrim::{compute_delta, reduce_dataset, DeltaReport};
use crate::embed::{jl_dimension, GaussianMap, JlBudget};
use crate::error::{Error, Result};
use crate::group::{Caps, FiniteGroup, GSpaceLabels, Permutation};
use crate::invariant::InvariantMap;

/// `{"type":"cyclic","n":8}`, `{"type":"sym_subsets","l":5,"w":2}`,
/// `{"type":"generators","n":6,"generators":[[1,2,3,4,5,0]]}`, or
/// `{"type":"regular","of":{...}}` for a group acting on itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Cyclic {
        n: usize,
    },
    SymSubsets {
        l: usize,
        w: usize,
    },
    Generators {
        n: usize,
        generators: Vec<Vec<usize>>,
    },
    Regular {
        of: Box<GroupSpec>,
    },
}

impl GroupSpec {
    /// Inline JSON when the argument starts with `{`, otherwise a file path.
    pub fn load(arg: &str) -> Result<Self> {
        let text = if arg.trim_start().starts_with('{') {
            arg.to_string()
        } else {
            std::fs::read_to_string(arg)?
        };
        Ok(serde_json::from_str(&text)?)
    }

    pub fn build(&self, caps: &Caps) -> Result<(FiniteGroup, GSpaceLabels)> {
        match self {
            GroupSpec::Cyclic { n } => {
                if *n > caps.points {
                    return Err(Error::CapExceeded {
                        what: "number of points",
                        value: *n as u128,
                        cap: caps.points,
                    });
                }
                Ok((FiniteGroup::cyclic(*n)?, GSpaceLabels::indices(*n)))
            }
            GroupSpec::SymSubsets { l, w } => FiniteGroup::sym_subsets(*l, *w, caps),
            GroupSpec::Generators { n, generators } => {
                if *n > caps.points {
                    return Err(Error::CapExceeded {
                        what: "number of points",
                        value: *n as u128,
                        cap: caps.points,
                    });
                }
                let gens = generators
                    .iter()
                    .map(|g| Permutation::new(g.clone()))
                    .collect::<Result<Vec<_>>>()?;
                Ok((
                    FiniteGroup::close_generators(*n, &gens, caps.group)?,
                    GSpaceLabels::indices(*n),
                ))
            }
            GroupSpec::Regular { of } => {
                let (inner, _) = of.build(caps)?;
                inner.regular_space(caps.points)
            }
        }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("group spec serializes")
    }
}

/// Hex SHA-256 of the canonical group description and tensor power.
pub fn group_hash(spec: &GroupSpec, omega: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(spec.canonical_json().as_bytes());
    hasher.update(format!("|omega={omega}").as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Embedding dimension: a number, or `"auto"` to size it from the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimSpec {
    Fixed(usize),
    Auto,
}

impl FromStr for DimSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(DimSpec::Auto);
        }
        match s.parse::<usize>() {
            Ok(m) if m > 0 => Ok(DimSpec::Fixed(m)),
            _ => Err(Error::InvalidParameter(format!(
                "embedding dimension must be a positive integer or \"auto\", got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for DimSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimSpec::Fixed(m) => write!(f, "{m}"),
            DimSpec::Auto => f.write_str("auto"),
        }
    }
}

impl Serialize for DimSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DimSpec::Fixed(m) => s.serialize_u64(*m as u64),
            DimSpec::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de> Deserialize<'de> for DimSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(m) => DimSpec::from_str(&m.to_string()),
            Raw::Text(s) => DimSpec::from_str(&s),
        }
        .map_err(serde::de::Error::custom)
    }
}

fn default_omega() -> usize {
    2
}
fn default_epsilon() -> f64 {
    0.5
}
fn default_beta() -> f64 {
    0.05
}
fn default_m() -> DimSpec {
    DimSpec::Auto
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub group: GroupSpec,
    #[serde(default = "default_omega")]
    pub omega: usize,
    #[serde(default = "default_m")]
    pub m: DimSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub caps: Caps,
}

impl PipelineConfig {
    pub fn new(group: GroupSpec) -> Self {
        PipelineConfig {
            group,
            omega: default_omega(),
            m: default_m(),
            seed: 0,
            epsilon: default_epsilon(),
            beta: default_beta(),
            caps: Caps::default(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn group_hash(&self) -> String {
        group_hash(&self.group, self.omega)
    }

    /// Builds the group and invariant, sizing `m` from `data` when it is
    /// `auto`. Auto sizing refuses to proceed unless the measured δ is below ε.
    pub fn resolve(&self, data: Option<&[Vec<f64>]>) -> Result<Pipeline> {
        let (group, labels) = self.group.build(&self.caps)?;
        let inv = InvariantMap::new(&group, self.omega, self.caps.tuples)?;
        let (m, delta) = match self.m {
            DimSpec::Fixed(m) => (m, None),
            DimSpec::Auto => {
                let data = data.ok_or_else(|| {
                    Error::InvalidParameter("automatic m needs a data set to measure delta".into())
                })?;
                let canon = reduce_dataset(data, &group)?;
                let report = compute_delta(&canon, &inv)?;
                let m = jl_dimension(&JlBudget {
                    k: canon.len(),
                    beta: self.beta,
                    epsilon: self.epsilon,
                    delta: report.delta,
                })?;
                (m, Some(report))
            }
        };
        let map = GaussianMap::sample(m, inv.kappa(), self.seed)?;
        Ok(Pipeline {
            group,
            labels,
            inv,
            map,
            delta,
        })
    }
}

/// A resolved configuration.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub group: FiniteGroup,
    pub labels: GSpaceLabels,
    pub inv: InvariantMap,
    pub map: GaussianMap,
    pub delta: Option<DeltaReport>,
}
