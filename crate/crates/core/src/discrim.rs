//! Canonical representatives, dataset reduction, the discriminability
//! constant δ, and a box-counting dimension estimator.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::invariant::{InvariantMap, InvariantVector};

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Lexicographic minimum of the vector orbit `{a^g}`, plus whether some
/// non-identity element fixes `a`.
pub fn canonicalize(a: &[f64], group: &FiniteGroup) -> Result<(Vec<f64>, bool)> {
    if a.len() != group.degree() {
        return Err(Error::LengthMismatch {
            expected: group.degree(),
            got: a.len(),
        });
    }
    let mut best = a.to_vec();
    let mut fixed = false;
    for g in group.elements() {
        if g.is_identity() {
            continue;
        }
        let moved = g.act_vector(a)?;
        if moved.as_slice() == a {
            fixed = true;
        }
        if lex_cmp(&moved, &best) == Ordering::Less {
            best = moved;
        }
    }
    Ok((best, fixed))
}

/// A data set reduced to one canonical vector per equivalence class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalSet {
    /// Sorted lexicographically.
    pub reps: Vec<Vec<f64>>,
    /// Number of input points mapped to each representative.
    pub class_sizes: Vec<usize>,
    /// Representative is fixed by some non-identity element.
    pub fixed_flags: Vec<bool>,
    /// Representative index for each input point.
    pub assignment: Vec<usize>,
}

impl CanonicalSet {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Input size over number of classes.
    pub fn reduction_factor(&self) -> f64 {
        if self.reps.is_empty() {
            1.0
        } else {
            self.assignment.len() as f64 / self.reps.len() as f64
        }
    }
}

fn bits_key(v: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 compare equal, so they must share a key
    v.iter()
        .map(|x| if *x == 0.0 { 0 } else { x.to_bits() })
        .collect()
}

/// Canonicalizes every point and merges exact duplicates.
pub fn reduce_dataset(points: &[Vec<f64>], group: &FiniteGroup) -> Result<CanonicalSet> {
    let canon = points
        .par_iter()
        .map(|a| canonicalize(a, group))
        .collect::<Result<Vec<_>>>()?;

    let mut first_seen: Vec<(Vec<f64>, bool)> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    let mut lookup: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut raw_assignment = Vec::with_capacity(points.len());
    for (rep, fixed) in canon {
        let slot = *lookup.entry(bits_key(&rep)).or_insert_with(|| {
            first_seen.push((rep, fixed));
            sizes.push(0);
            first_seen.len() - 1
        });
        sizes[slot] += 1;
        raw_assignment.push(slot);
    }

    let mut order: Vec<usize> = (0..first_seen.len()).collect();
    order.sort_by(|&i, &j| lex_cmp(&first_seen[i].0, &first_seen[j].0));
    let mut rank = vec![0; order.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    Ok(CanonicalSet {
        reps: order.iter().map(|&i| first_seen[i].0.clone()).collect(),
        class_sizes: order.iter().map(|&i| sizes[i]).collect(),
        fixed_flags: order.iter().map(|&i| first_seen[i].1).collect(),
        assignment: raw_assignment.into_iter().map(|s| rank[s]).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDelta {
    pub i: usize,
    pub j: usize,
    pub delta_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub delta: f64,
    pub argmax_pair: (usize, usize),
    pub discriminable: bool,
    pub per_pair: Vec<PairDelta>,
}

/// Kernel fractions at or above `1 - DELTA_ONE_TOLERANCE` count as 1.
pub const DELTA_ONE_TOLERANCE: f64 = 1e-9;

/// Largest kernel fraction over all unordered pairs of representatives.
///
/// Pairs whose tensor powers coincide (possible for `a` and `-a` at even ω)
/// carry no captured energy at all and are assigned fraction 1.
pub fn compute_delta(canon: &CanonicalSet, inv: &InvariantMap) -> Result<DeltaReport> {
    let k = canon.reps.len();
    if k < 2 {
        return Err(Error::TooFewPoints(k));
    }
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .collect();
    let per_pair = pairs
        .par_iter()
        .map(|&(i, j)| {
            let delta_fraction = match inv.kernel_energy(&canon.reps[i], &canon.reps[j]) {
                Ok(e) => e.delta_fraction.clamp(0.0, 1.0),
                Err(Error::ZeroDifference) => 1.0,
                Err(e) => return Err(e),
            };
            Ok(PairDelta {
                i,
                j,
                delta_fraction,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = per_pair.iter().fold(per_pair[0], |w, p| {
        if p.delta_fraction > w.delta_fraction {
            *p
        } else {
            w
        }
    });
    Ok(DeltaReport {
        delta: worst.delta_fraction,
        argmax_pair: (worst.i, worst.j),
        discriminable: worst.delta_fraction < 1.0 - DELTA_ONE_TOLERANCE,
        per_pair,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Discriminability {
    Discriminable,
    Witness {
        i: usize,
        j: usize,
        z_i: InvariantVector,
        z_j: InvariantVector,
    },
}

/// Whether all invariant vectors differ pairwise by more than `tol` in
/// max-norm.
pub fn check_discriminable(
    canon: &CanonicalSet,
    inv: &InvariantMap,
    tol: f64,
) -> Result<Discriminability> {
    let z = canon
        .reps
        .iter()
        .map(|a| inv.apply(a))
        .collect::<Result<Vec<_>>>()?;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            let gap = z[i]
                .z
                .iter()
                .zip(&z[j].z)
                .fold(0.0f64, |g, (x, y)| g.max((x - y).abs()));
            if gap <= tol {
                return Ok(Discriminability::Witness {
                    i,
                    j,
                    z_i: z[i].clone(),
                    z_j: z[j].clone(),
                });
            }
        }
    }
    Ok(Discriminability::Discriminable)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxDimEstimate {
    pub epsilons: Vec<f64>,
    pub counts: Vec<usize>,
    /// Least-squares slope of `ln N_ε` against `−ln ε`.
    pub slope: f64,
    pub r2: f64,
}

/// Box counts on a grid anchored at the coordinate-wise minimum, one count
/// per scale, and the fitted dimension.
pub fn estimate_box_dimension(points: &[Vec<f64>], eps_ladder: &[f64]) -> Result<BoxDimEstimate> {
    if eps_ladder.len() < 2 {
        return Err(Error::DegenerateLadder("need at least two scales".into()));
    }
    if eps_ladder.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::DegenerateLadder(
            "scales must be positive and finite".into(),
        ));
    }
    if eps_ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::DegenerateLadder(
            "scales must be strictly decreasing".into(),
        ));
    }
    let dim = points
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidParameter("no points".into()))?;
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    let origin: Vec<f64> = (0..dim)
        .map(|d| points.iter().map(|p| p[d]).fold(f64::INFINITY, f64::min))
        .collect();

    let counts: Vec<usize> = eps_ladder
        .iter()
        .map(|&eps| {
            points
                .iter()
                .map(|p| {
                    p.iter()
                        .zip(&origin)
                        .map(|(x, o)| ((x - o) / eps).floor() as i64)
                        .collect::<Vec<_>>()
                })
                .collect::<HashSet<_>>()
                .len()
        })
        .collect();

    let xs: Vec<f64> = eps_ladder.iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, r2) = least_squares(&xs, &ys);
    Ok(BoxDimEstimate {
        epsilons: eps_ladder.to_vec(),
        counts,
        slope,
        r2,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res = syy - slope * sxy;
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    (slope, r2)
}
