//! Multi-correlations on a group and their relation to the orbit sums of
//! the tensor invariant on a homogeneous space.
//!
//! For a transitive G-space with base point `x1` and coset representatives
//! `t_j` (`t_j(x1) = x_j`), the multi-correlation of the extension `ā`
//! evaluated at `(t_{i_1}, .., t_{i_{ω-1}})` equals
//!
//! ```text
//! A(t_i) = Σ_σ a[σ(x1)] Π_k a[σ(x_{i_k})] = (|G| / |Ω|) · f_Ω(a)
//! ```
//!
//! where `Ω` is the G-orbit of `(x_{i_1}, .., x_{i_{ω-1}}, x1)` on `X^ω`:
//! `σ ↦ σ(τ)` covers `Ω` once per element of the stabilizer of `τ`, which
//! has order `|G|/|Ω|`. The factor is 1 exactly when that tuple has a free
//! orbit (always the case for the regular action).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::orbit::{enumerate_orbits, TupleCodec};

/// A vector on the group, `bar[g] = a[g(x1)]`, indexed like `G.elements()`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionVector {
    pub bar: Vec<f64>,
}

pub fn extension(a: &[f64], group: &FiniteGroup, x1: usize) -> Result<ExtensionVector> {
    if a.len() != group.degree() {
        return Err(Error::LengthMismatch {
            expected: group.degree(),
            got: a.len(),
        });
    }
    // coset_reps doubles as the transitivity check
    group.coset_reps(x1)?;
    Ok(ExtensionVector {
        bar: group.elements().iter().map(|g| a[g.apply(x1)]).collect(),
    })
}

/// `Σ_σ z[σ] z[σ g_1] ⋯ z[σ g_{ω-1}]`, with `args` as element indices.
pub fn multi_correlation(group: &FiniteGroup, z: &[f64], args: &[usize]) -> Result<f64> {
    let order = group.order();
    if z.len() != order {
        return Err(Error::LengthMismatch {
            expected: order,
            got: z.len(),
        });
    }
    if let Some(&bad) = args.iter().find(|&&g| g >= order) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            bound: order,
        });
    }
    let mut total = 0.0;
    for sigma in 0..order {
        let mut term = z[sigma];
        for &g in args {
            term *= z[group.product_index(sigma, g)];
        }
        total += term;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationEntry {
    /// Point indices `(i_1, .., i_{ω-1})`; the arguments are `t_{i_k}`.
    pub points: Vec<usize>,
    pub value: f64,
    /// Orbit of `points` under the stabilizer of `x1`.
    pub s_orbit: usize,
    /// G-orbit of `(points.., x1)` on `X^ω`.
    pub g_orbit: usize,
    /// `|G| / |Ω|` for that G-orbit: the ratio between `value` and the
    /// orbit sum `f_Ω(a)`.
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTable {
    pub omega: usize,
    pub base_point: usize,
    pub coset_reps: Vec<usize>,
    pub s_orbit_count: usize,
    /// Number of G-orbits on `X^ω`, `kappa_omega`.
    pub kappa: usize,
    pub entries: Vec<CorrelationEntry>,
}

impl CorrelationTable {
    /// Count of values differing by more than `rel_tol` relative to the
    /// largest magnitude in the table.
    pub fn distinct_values(&self, rel_tol: f64) -> usize {
        let mut values: Vec<f64> = self.entries.iter().map(|e| e.value).collect();
        values.sort_by(f64::total_cmp);
        let scale = values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut count = 0;
        let mut last: Option<f64> = None;
        for v in values {
            if last.is_none_or(|l| (v - l).abs() > rel_tol * scale) {
                count += 1;
                last = Some(v);
            }
        }
        count
    }
}

/// Evaluates the multi-correlation of the extension of `a` at every point
/// `(t_{i_1}, .., t_{i_{ω-1}})`, `n^{ω-1}` entries in lexicographic order of
/// the point indices.
pub fn correlation_table(
    a: &[f64],
    group: &FiniteGroup,
    x1: usize,
    omega: usize,
    tuple_cap: usize,
) -> Result<CorrelationTable> {
    if omega == 0 {
        return Err(Error::InvalidParameter("omega must be positive".into()));
    }
    let bar = extension(a, group, x1)?;
    let reps = group.coset_reps(x1)?;
    let g_orbits = enumerate_orbits(group, omega, tuple_cap)?;
    let n = group.degree();
    let order = group.order();

    // at ω = 1 the argument list is empty: a single entry in a single orbit
    let s_orbits = if omega == 1 {
        None
    } else {
        Some(enumerate_orbits(
            &group.stabilizer(x1)?,
            omega - 1,
            tuple_cap,
        )?)
    };

    let arg_codec = TupleCodec::new(n, omega - 1);
    let arg_count = n.pow((omega - 1) as u32);
    let mut entries = Vec::with_capacity(arg_count);
    for code in 0..arg_count {
        let points = arg_codec.decode(code);
        let args: Vec<usize> = points.iter().map(|&i| reps[i]).collect();
        let value = multi_correlation(group, &bar.bar, &args)?;
        let mut full = points.clone();
        full.push(x1);
        let g_orbit = g_orbits.orbit_of(&full)?;
        entries.push(CorrelationEntry {
            points,
            value,
            s_orbit: s_orbits.as_ref().map_or(0, |s| s.orbit_of_code(code)),
            g_orbit,
            multiplicity: order / g_orbits.orbit_sizes()[g_orbit],
        });
    }
    Ok(CorrelationTable {
        omega,
        base_point: x1,
        coset_reps: reps,
        s_orbit_count: s_orbits.as_ref().map_or(1, |s| s.count()),
        kappa: g_orbits.count(),
        entries,
    })
}
