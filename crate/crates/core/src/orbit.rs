//! G-orbits on the tuple space `X^omega` and the Burnside cross-check.
//!
//! Tuples are encoded as big-endian base-`n` integers, so numeric order on
//! codes is lexicographic order on tuples.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::FiniteGroup;

/// Big-endian base-`n` encoding of `omega`-tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleCodec {
    pub n: usize,
    pub omega: usize,
}

impl TupleCodec {
    pub fn new(n: usize, omega: usize) -> Self {
        TupleCodec { n, omega }
    }

    /// `n^omega`, or `None` on overflow.
    pub fn space_size(&self) -> Option<u128> {
        (self.n as u128).checked_pow(self.omega as u32)
    }

    pub fn encode(&self, t: &[usize]) -> usize {
        t.iter().fold(0, |code, &x| code * self.n + x)
    }

    pub fn decode_into(&self, mut code: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = code % self.n;
            code /= self.n;
        }
    }

    pub fn decode(&self, code: usize) -> Vec<usize> {
        let mut out = vec![0; self.omega];
        self.decode_into(code, &mut out);
        out
    }
}

pub(crate) fn checked_tuple_space(n: usize, omega: usize, cap: usize) -> Result<usize> {
    let size = TupleCodec::new(n, omega).space_size().unwrap_or(u128::MAX);
    if size > cap as u128 || size > u32::MAX as u128 {
        return Err(Error::TupleSpaceCapExceeded { size, cap });
    }
    Ok(size as usize)
}

/// Partition of `X^omega` into G-orbits.
#[derive(Debug, Clone)]
pub struct OrbitSet {
    codec: TupleCodec,
    orbit_of: Vec<u32>,
    orbit_sizes: Vec<usize>,
    // Members grouped by orbit, ascending within each orbit.
    offsets: Vec<usize>,
    members: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitRow {
    pub id: usize,
    pub size: usize,
    pub representative: Vec<usize>,
}

impl OrbitSet {
    pub fn omega(&self) -> usize {
        self.codec.omega
    }

    pub fn degree(&self) -> usize {
        self.codec.n
    }

    pub fn codec(&self) -> TupleCodec {
        self.codec
    }

    /// Number of orbits, `kappa_omega`.
    pub fn count(&self) -> usize {
        self.orbit_sizes.len()
    }

    pub fn orbit_sizes(&self) -> &[usize] {
        &self.orbit_sizes
    }

    pub fn tuple_count(&self) -> usize {
        self.orbit_of.len()
    }

    pub fn orbit_of_code(&self, code: usize) -> usize {
        self.orbit_of[code] as usize
    }

    pub fn orbit_of(&self, t: &[usize]) -> Result<usize> {
        if t.len() != self.codec.omega {
            return Err(Error::LengthMismatch {
                expected: self.codec.omega,
                got: t.len(),
            });
        }
        if let Some(&x) = t.iter().find(|&&x| x >= self.codec.n) {
            return Err(Error::IndexOutOfRange {
                index: x,
                bound: self.codec.n,
            });
        }
        Ok(self.orbit_of_code(self.codec.encode(t)))
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id < self.count() {
            Ok(())
        } else {
            Err(Error::UnknownOrbit(id))
        }
    }

    /// Encoded members of an orbit, ascending.
    pub fn member_codes(&self, id: usize) -> Result<&[u32]> {
        self.check_id(id)?;
        Ok(&self.members[self.offsets[id]..self.offsets[id + 1]])
    }

    /// Every member tuple of an orbit exactly once, ascending.
    pub fn stream_orbit_members(&self, id: usize) -> Result<impl Iterator<Item = Vec<usize>> + '_> {
        let codec = self.codec;
        Ok(self
            .member_codes(id)?
            .iter()
            .map(move |&c| codec.decode(c as usize)))
    }

    /// Lexicographically smallest member.
    pub fn representative(&self, id: usize) -> Result<Vec<usize>> {
        Ok(self.codec.decode(self.member_codes(id)?[0] as usize))
    }

    pub fn table(&self) -> Vec<OrbitRow> {
        (0..self.count())
            .map(|id| OrbitRow {
                id,
                size: self.orbit_sizes[id],
                representative: self.codec.decode(self.members[self.offsets[id]] as usize),
            })
            .collect()
    }
}

/// Breadth-first orbit sweep over `X^omega` using the group's generators.
pub fn enumerate_orbits(group: &FiniteGroup, omega: usize, cap: usize) -> Result<OrbitSet> {
    if omega == 0 {
        return Err(Error::InvalidParameter("omega must be positive".into()));
    }
    let n = group.degree();
    let size = checked_tuple_space(n, omega, cap)?;
    let codec = TupleCodec::new(n, omega);

    const UNSEEN: u32 = u32::MAX;
    let mut orbit_of = vec![UNSEEN; size];
    let mut orbit_sizes = Vec::new();
    let mut queue = VecDeque::new();
    let mut digits = vec![0usize; omega];

    // Seeds are visited in ascending order, so each seed is the smallest
    // member of its orbit and ids come out ordered by representative.
    for seed in 0..size {
        if orbit_of[seed] != UNSEEN {
            continue;
        }
        let id = orbit_sizes.len() as u32;
        orbit_of[seed] = id;
        let mut count = 1;
        queue.push_back(seed);
        while let Some(code) = queue.pop_front() {
            codec.decode_into(code, &mut digits);
            for g in group.generators() {
                let image = digits.iter().fold(0, |acc, &x| acc * n + g.apply(x));
                if orbit_of[image] == UNSEEN {
                    orbit_of[image] = id;
                    count += 1;
                    queue.push_back(image);
                }
            }
        }
        orbit_sizes.push(count);
    }

    let mut offsets = Vec::with_capacity(orbit_sizes.len() + 1);
    offsets.push(0);
    for s in &orbit_sizes {
        offsets.push(offsets.last().unwrap() + s);
    }
    let mut cursor = offsets.clone();
    let mut members = vec![0u32; size];
    for (code, &id) in orbit_of.iter().enumerate() {
        let slot = &mut cursor[id as usize];
        members[*slot] = code as u32;
        *slot += 1;
    }

    Ok(OrbitSet {
        codec,
        orbit_of,
        orbit_sizes,
        offsets,
        members,
    })
}

/// `theta(g)`: fixed-point counts per group element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedPointProfile {
    pub theta: Vec<usize>,
}

pub fn fixed_points(group: &FiniteGroup) -> FixedPointProfile {
    FixedPointProfile {
        theta: group
            .elements()
            .iter()
            .map(|g| g.fixed_point_count())
            .collect(),
    }
}

/// Number of orbits on `X^omega` from fixed-point counts alone:
/// `(1/|G|) Σ_g θ(g)^ω`, in exact integer arithmetic.
pub fn burnside_count(group: &FiniteGroup, omega: usize) -> Result<u128> {
    let exp = u32::try_from(omega).map_err(|_| Error::Overflow("Burnside power"))?;
    let sum = fixed_points(group)
        .theta
        .iter()
        .try_fold(0u128, |acc, &t| {
            (t as u128)
                .checked_pow(exp)
                .and_then(|p| acc.checked_add(p))
        })
        .ok_or(Error::Overflow("Burnside sum"))?;
    let order = group.order();
    if sum % order as u128 != 0 {
        return Err(Error::NonIntegerBurnside { sum, order });
    }
    Ok(sum / order as u128)
}
