//! Step two of the pipeline: a seeded Gaussian projection of the invariant
//! vector, the dimension bound for it, and Monte-Carlo harnesses checking
//! isometry, injectivity and the concentration inequality behind them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariant::{tensor_distance_sq_streamed, InvariantMap, InvariantVector};
use crate::numeric::{dist_sq, norm_sq};

/// SplitMix64 finalizer; used to derive independent seeds per trial.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        ^ stream
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `m × kappa` matrix with i.i.d. `N(0, 1/m)` entries.
///
/// Row `i` is drawn from its own ChaCha stream keyed by `(seed, i)`, so each
/// entry is a pure function of `(seed, i, j)` regardless of generation order.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMap {
    m: usize,
    kappa: usize,
    seed: u64,
    matrix: Vec<f64>,
}

impl GaussianMap {
    pub fn sample(m: usize, kappa: usize, seed: u64) -> Result<Self> {
        if m == 0 || kappa == 0 {
            return Err(Error::InvalidParameter(format!(
                "map dimensions must be positive, got {m} x {kappa}"
            )));
        }
        let scale = 1.0 / (m as f64).sqrt();
        let mut matrix = vec![0.0; m * kappa];
        matrix
            .par_chunks_mut(kappa)
            .enumerate()
            .for_each(|(row, out)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(row as u64);
                for v in out.iter_mut() {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    *v = scale * x;
                }
            });
        Ok(GaussianMap {
            m,
            kappa,
            seed,
            matrix,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row-major entries.
    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.matrix[i * self.kappa..(i + 1) * self.kappa]
    }

    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.kappa {
            return Err(Error::DimensionMismatch {
                expected: self.kappa,
                got: z.len(),
            });
        }
        Ok(self
            .matrix
            .chunks_exact(self.kappa)
            .map(|row| row.iter().zip(z).map(|(p, x)| p * x).sum())
            .collect())
    }
}

fn check_map(map: &GaussianMap, inv: &InvariantMap) -> Result<()> {
    if map.kappa() != inv.kappa() {
        return Err(Error::DimensionMismatch {
            expected: inv.kappa(),
            got: map.kappa(),
        });
    }
    Ok(())
}

/// `Φ F_ω(a^{⊗ω})`.
pub fn embed_point(map: &GaussianMap, inv: &InvariantMap, a: &[f64]) -> Result<Vec<f64>> {
    embed_point_counted(map, inv, a).map(|(y, _)| y)
}

/// Also returns the multiply count: `n^ω` tensor terms plus `m·κ_ω` for the
/// projection.
pub fn embed_point_counted(
    map: &GaussianMap,
    inv: &InvariantMap,
    a: &[f64],
) -> Result<(Vec<f64>, usize)> {
    check_map(map, inv)?;
    let (z, terms) = inv.apply_counted(a)?;
    Ok((map.apply(&z.z)?, terms + map.m() * map.kappa()))
}

/// Inputs to the embedding-dimension bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JlBudget {
    /// Number of canonical points.
    pub k: usize,
    /// Failure probability.
    pub beta: f64,
    /// Distortion.
    pub epsilon: f64,
    /// Discriminability constant.
    pub delta: f64,
}

pub fn alpha(y: f64) -> f64 {
    y * y - y * y * y
}

/// Values beyond this are reported as divergent rather than returned.
const MAX_DIMENSION: f64 = 1e12;

/// Smallest `m` strictly exceeding
/// `(2 ln k + ln(1/β)) / α((ε − δ)/(1 − δ))`.
pub fn jl_dimension(budget: &JlBudget) -> Result<usize> {
    let JlBudget {
        k,
        beta,
        epsilon,
        delta,
    } = *budget;
    if k < 2 {
        return Err(Error::DegenerateK(k));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in (0, 1), got {beta}"
        )));
    }
    if epsilon.is_nan() || epsilon >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be below 1, got {epsilon}"
        )));
    }
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must be non-negative, got {delta}"
        )));
    }
    if epsilon <= delta {
        return Err(Error::EpsilonNotAboveDelta { epsilon, delta });
    }
    let y = (epsilon - delta) / (1.0 - delta);
    let bound = (2.0 * (k as f64).ln() + (1.0 / beta).ln()) / alpha(y);
    if !bound.is_finite() || bound > MAX_DIMENSION {
        return Err(Error::Overflow("embedding dimension"));
    }
    Ok(bound.floor() as usize + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRatio {
    pub i: usize,
    pub j: usize,
    /// `‖Φ F(a_i^{⊗ω} − a_j^{⊗ω})‖² / ‖a_i^{⊗ω} − a_j^{⊗ω}‖²`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryReport {
    pub pairs_checked: usize,
    pub violations: Vec<PairRatio>,
    /// Ratio farthest from 1 over all pairs.
    pub worst_ratio: f64,
}

/// Pairwise data shared by every map tested against one point set.
#[derive(Debug, Clone)]
pub struct PairGeometry {
    pub invariants: Vec<InvariantVector>,
    /// `(i, j, ‖a_i^{⊗ω} − a_j^{⊗ω}‖²)` for `i < j`.
    pub tensor_dist_sq: Vec<(usize, usize, f64)>,
}

impl PairGeometry {
    pub fn new(points: &[Vec<f64>], inv: &InvariantMap) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegenerateK(points.len()));
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::DuplicatePoints(i, j));
                }
            }
        }
        let invariants = points
            .iter()
            .map(|a| inv.apply(a))
            .collect::<Result<Vec<_>>>()?;
        let mut tensor_dist_sq = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = tensor_distance_sq_streamed(&points[i], &points[j], inv.omega())?;
                tensor_dist_sq.push((i, j, d));
            }
        }
        Ok(PairGeometry {
            invariants,
            tensor_dist_sq,
        })
    }

    pub fn check(&self, map: &GaussianMap, epsilon: f64) -> Result<IsometryReport> {
        let embedded = self
            .invariants
            .iter()
            .map(|z| map.apply(&z.z))
            .collect::<Result<Vec<_>>>()?;
        let mut violations = Vec::new();
        let mut worst_ratio = 1.0f64;
        for &(i, j, d) in &self.tensor_dist_sq {
            // equal tensors (e.g. a and -a at even ω) embed to equal points
            if d == 0.0 {
                continue;
            }
            let ratio = dist_sq(&embedded[i], &embedded[j]) / d;
            if (ratio - 1.0).abs() > (worst_ratio - 1.0).abs() {
                worst_ratio = ratio;
            }
            if ratio < 1.0 - epsilon || ratio > 1.0 + epsilon {
                violations.push(PairRatio { i, j, ratio });
            }
        }
        Ok(IsometryReport {
            pairs_checked: self.tensor_dist_sq.len(),
            violations,
            worst_ratio,
        })
    }
}

/// Checks `(1−ε)·D ≤ ‖Φ F(diff)‖² ≤ (1+ε)·D` for every pair, `D` being the
/// squared tensor-space distance.
pub fn verify_isometry(
    points: &[Vec<f64>],
    inv: &InvariantMap,
    map: &GaussianMap,
    epsilon: f64,
) -> Result<IsometryReport> {
    check_map(map, inv)?;
    PairGeometry::new(points, inv)?.check(map, epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhitneyReport {
    pub trials: usize,
    pub injective_trials: usize,
    /// Smallest embedded pair distance over all trials.
    pub min_pair_gap: f64,
}

/// Relative threshold under which two embedded points count as collided.
pub const INJECTIVITY_TOLERANCE: f64 = 1e-9;
/// Relative threshold under which two invariant vectors count as equal.
pub const DISCRIMINABILITY_TOLERANCE: f64 = 1e-12;

/// Samples `trials` maps into `R^m` and counts those that keep the embedded
/// point set injective.
pub fn check_whitney_injectivity(
    points: &[Vec<f64>],
    inv: &InvariantMap,
    m: usize,
    trials: usize,
    seed: u64,
) -> Result<WhitneyReport> {
    let geometry = PairGeometry::new(points, inv)?;
    let z = &geometry.invariants;
    let scale = z
        .iter()
        .flat_map(|v| v.z.iter())
        .fold(1.0f64, |s, x| s.max(x.abs()));
    for &(i, j, _) in &geometry.tensor_dist_sq {
        let gap = z[i]
            .z
            .iter()
            .zip(&z[j].z)
            .fold(0.0f64, |g, (x, y)| g.max((x - y).abs()));
        if gap <= DISCRIMINABILITY_TOLERANCE * scale {
            return Err(Error::NotDiscriminable(i, j));
        }
    }
    let max_dist = geometry
        .tensor_dist_sq
        .iter()
        .fold(0.0f64, |s, &(_, _, d)| s.max(d))
        .sqrt();
    let threshold = INJECTIVITY_TOLERANCE * max_dist;

    let gaps = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let map = GaussianMap::sample(m, inv.kappa(), mix_seed(seed, t as u64))?;
            let y = z
                .iter()
                .map(|v| map.apply(&v.z))
                .collect::<Result<Vec<_>>>()?;
            Ok(geometry
                .tensor_dist_sq
                .iter()
                .map(|&(i, j, _)| dist_sq(&y[i], &y[j]).sqrt())
                .fold(f64::INFINITY, f64::min))
        })
        .collect::<Result<Vec<f64>>>()?;

    Ok(WhitneyReport {
        trials,
        injective_trials: gaps.iter().filter(|&&g| g > threshold).count(),
        min_pair_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub m: usize,
    pub epsilon: f64,
    pub samples: usize,
    pub exceedances: usize,
    pub empirical_tail: f64,
    pub bound: f64,
}

/// Dimension of the unit vectors drawn by [`concentration_selftest`]; the
/// law of `‖Φx‖²` does not depend on it.
pub const SELFTEST_INPUT_DIM: usize = 8;

/// `2 exp(−(m/4)(ε² − ε³))`.
pub fn concentration_bound(m: usize, epsilon: f64) -> f64 {
    2.0 * (-(m as f64) / 4.0 * (epsilon * epsilon - epsilon.powi(3))).exp()
}

/// Estimates `P(|‖Φx‖² − 1| > ε)` over fresh maps and unit vectors.
pub fn concentration_selftest(
    m: usize,
    epsilon: f64,
    samples: usize,
    seed: u64,
) -> Result<ConcentrationReport> {
    if m == 0 || samples == 0 {
        return Err(Error::InvalidParameter(
            "m and samples must be positive".into(),
        ));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let exceedances = (0..samples)
        .into_par_iter()
        .filter(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s as u64);
            let mut x: Vec<f64> = (0..SELFTEST_INPUT_DIM)
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let norm = norm_sq(&x).sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
            let scale = 1.0 / (m as f64).sqrt();
            let mut energy = 0.0;
            for _ in 0..m {
                let row: f64 = x
                    .iter()
                    .map(|xi| {
                        let g: f64 = StandardNormal.sample(&mut rng);
                        scale * g * xi
                    })
                    .sum();
                energy += row * row;
            }
            (energy - 1.0).abs() > epsilon
        })
        .count();
    Ok(ConcentrationReport {
        m,
        epsilon,
        samples,
        exceedances,
        empirical_tail: exceedances as f64 / samples as f64,
        bound: concentration_bound(m, epsilon),
    })
}
