//! The linear tensor-space invariant: one normalized orbit sum of `a^{⊗ω}`
//! per G-orbit on `X^ω`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;
use crate::numeric::{dot, for_each_tuple_product2, norm_sq, CompensatedSum};
use crate::orbit::{enumerate_orbits, OrbitSet};

/// Output of the invariant for one data point; length `kappa_omega`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantVector {
    pub z: Vec<f64>,
}

impl InvariantVector {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// `F_ω`: scaled orbit indicators `|Ω_i|^{-1/2} 1_{Ω_i}` as rows. The rows
/// have disjoint supports, so they are orthonormal.
#[derive(Debug, Clone)]
pub struct InvariantMap {
    orbits: OrbitSet,
    norm_factors: Vec<f64>,
}

/// Energy split of a difference tensor between the row space of `F_ω` and
/// its kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEnergy {
    pub f_energy: f64,
    pub total: f64,
    pub delta_fraction: f64,
}

impl InvariantMap {
    pub fn new(group: &FiniteGroup, omega: usize, tuple_cap: usize) -> Result<Self> {
        Ok(Self::from_orbits(enumerate_orbits(
            group, omega, tuple_cap,
        )?))
    }

    pub fn from_orbits(orbits: OrbitSet) -> Self {
        let norm_factors = orbits
            .orbit_sizes()
            .iter()
            .map(|&s| 1.0 / (s as f64).sqrt())
            .collect();
        InvariantMap {
            orbits,
            norm_factors,
        }
    }

    pub fn omega(&self) -> usize {
        self.orbits.omega()
    }

    pub fn degree(&self) -> usize {
        self.orbits.degree()
    }

    /// Output dimension `kappa_omega`.
    pub fn kappa(&self) -> usize {
        self.orbits.count()
    }

    pub fn orbits(&self) -> &OrbitSet {
        &self.orbits
    }

    pub fn norm_factors(&self) -> &[f64] {
        &self.norm_factors
    }

    fn check_len(&self, a: &[f64]) -> Result<()> {
        if a.len() == self.degree() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.degree(),
                got: a.len(),
            })
        }
    }

    pub fn apply(&self, a: &[f64]) -> Result<InvariantVector> {
        self.apply_counted(a).map(|(z, _)| z)
    }

    /// Like [`apply`](Self::apply), also returning the number of tensor
    /// product terms accumulated (always `n^ω`).
    pub fn apply_counted(&self, a: &[f64]) -> Result<(InvariantVector, usize)> {
        self.check_len(a)?;
        let mut buf = Vec::new();
        let mut terms = 0usize;
        let mut z = Vec::with_capacity(self.kappa());
        for (id, scale) in self.norm_factors.iter().enumerate() {
            z.push(scale * orbit_sum(&self.orbits, id, a, &mut buf)?);
            terms += buf.len();
        }
        Ok((InvariantVector { z }, terms))
    }

    /// Energy of `a1^{⊗ω} - a2^{⊗ω}` captured by `F_ω` versus its total
    /// energy. The kernel part is `total - f_energy` by row orthonormality.
    pub fn kernel_energy(&self, a1: &[f64], a2: &[f64]) -> Result<KernelEnergy> {
        self.check_len(a1)?;
        self.check_len(a2)?;
        let mut per_orbit = vec![CompensatedSum::new(); self.kappa()];
        let mut total = CompensatedSum::new();
        let mut code = 0usize;
        for_each_tuple_product2(a1, a2, self.omega(), |p1, p2| {
            let d = p1 - p2;
            per_orbit[self.orbits.orbit_of_code(code)].add(d);
            total.add(d * d);
            code += 1;
        });
        let total = total.value();
        if total == 0.0 {
            return Err(Error::ZeroDifference);
        }
        let f_energy = per_orbit
            .iter()
            .zip(&self.norm_factors)
            .map(|(s, c)| {
                let v = s.value() * c;
                v * v
            })
            .collect::<CompensatedSum>()
            .value();
        Ok(KernelEnergy {
            f_energy,
            total,
            delta_fraction: 1.0 - f_energy / total,
        })
    }
}

/// Unnormalized orbit sum `Σ_{t ∈ Ω} Π_j a[t_j]`.
pub fn orbit_functional(orbits: &OrbitSet, id: usize, a: &[f64]) -> Result<f64> {
    if a.len() != orbits.degree() {
        return Err(Error::LengthMismatch {
            expected: orbits.degree(),
            got: a.len(),
        });
    }
    orbit_sum(orbits, id, a, &mut Vec::new())
}

// The action permutes an orbit's product terms without changing any of
// them, so summing in sorted order makes the result bit-identical on every
// point of a G-orbit of `a`.
fn orbit_sum(orbits: &OrbitSet, id: usize, a: &[f64], buf: &mut Vec<f64>) -> Result<f64> {
    let codec = orbits.codec();
    let mut digits = vec![0usize; codec.omega];
    buf.clear();
    for &code in orbits.member_codes(id)? {
        codec.decode_into(code as usize, &mut digits);
        buf.push(digits.iter().map(|&x| a[x]).product());
    }
    buf.sort_unstable_by(f64::total_cmp);
    Ok(buf.iter().copied().collect::<CompensatedSum>().value())
}

fn check_pair(a1: &[f64], a2: &[f64]) -> Result<()> {
    if a1.len() != a2.len() {
        return Err(Error::LengthMismatch {
            expected: a1.len(),
            got: a2.len(),
        });
    }
    Ok(())
}

/// `‖a1^{⊗ω} − a2^{⊗ω}‖²` via `(‖a1‖²)^ω − 2⟨a1,a2⟩^ω + (‖a2‖²)^ω`.
pub fn tensor_distance_sq(a1: &[f64], a2: &[f64], omega: usize) -> Result<f64> {
    check_pair(a1, a2)?;
    let w = omega as i32;
    let v = norm_sq(a1).powi(w) - 2.0 * dot(a1, a2).powi(w) + norm_sq(a2).powi(w);
    Ok(v.max(0.0))
}

/// Same quantity by visiting all `n^ω` tuples.
pub fn tensor_distance_sq_streamed(a1: &[f64], a2: &[f64], omega: usize) -> Result<f64> {
    check_pair(a1, a2)?;
    let mut acc = CompensatedSum::new();
    for_each_tuple_product2(a1, a2, omega, |p1, p2| acc.add((p1 - p2) * (p1 - p2)));
    Ok(acc.value())
}

/// Concatenation of `F_ω` over several tensor powers.
#[derive(Debug, Clone)]
pub struct StackedInvariant {
    maps: Vec<InvariantMap>,
}

impl StackedInvariant {
    pub fn new(group: &FiniteGroup, omegas: &[usize], tuple_cap: usize) -> Result<Self> {
        let maps = omegas
            .iter()
            .map(|&w| InvariantMap::new(group, w, tuple_cap))
            .collect::<Result<_>>()?;
        Ok(StackedInvariant { maps })
    }

    pub fn maps(&self) -> &[InvariantMap] {
        &self.maps
    }

    pub fn kappa(&self) -> usize {
        self.maps.iter().map(InvariantMap::kappa).sum()
    }

    pub fn apply(&self, a: &[f64]) -> Result<InvariantVector> {
        let mut z = Vec::with_capacity(self.kappa());
        for map in &self.maps {
            z.extend(map.apply(a)?.z);
        }
        Ok(InvariantVector { z })
    }
}

pub fn stacked_invariant(
    group: &FiniteGroup,
    a: &[f64],
    omegas: &[usize],
    tuple_cap: usize,
) -> Result<InvariantVector> {
    StackedInvariant::new(group, omegas, tuple_cap)?.apply(a)
}
