//! Finite permutation groups acting on `{0, .., n-1}`.
//!
//! Elements are stored explicitly and sorted lexicographically by their image
//! arrays, so the identity is always element 0 and every derived choice
//! (coset representatives, stabilizer generators, serialization) is
//! reproducible.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bounds guarding every explicit enumeration in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Maximum number of points `n` of a G-space.
    pub points: usize,
    /// Maximum number of explicitly stored group elements.
    pub group: usize,
    /// Maximum size `n^omega` of an enumerated tuple space.
    pub tuples: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            points: 1_000_000,
            group: 1_000_000,
            tuples: 1 << 26,
        }
    }
}

/// A bijection of `{0, .., n-1}`; `image[x] = g(x)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<u32>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &x in &image {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::NotABijection { image, n });
            }
        }
        if n > u32::MAX as usize {
            return Err(Error::CapExceeded {
                what: "permutation degree",
                value: n as u128,
                cap: u32::MAX as usize,
            });
        }
        Ok(Permutation {
            image: image.into_iter().map(|x| x as u32).collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            image: (0..n as u32).collect(),
        }
    }

    /// Rotation `x -> x + shift (mod n)`.
    pub fn rotation(n: usize, shift: usize) -> Self {
        Permutation {
            image: (0..n).map(|x| ((x + shift) % n) as u32).collect(),
        }
    }

    fn from_raw(image: Vec<u32>) -> Self {
        Permutation { image }
    }

    /// Number of points acted on.
    pub fn degree(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.image[x] as usize
    }

    pub fn image(&self) -> Vec<usize> {
        self.image.iter().map(|&x| x as usize).collect()
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation::from_raw(
            other
                .image
                .iter()
                .map(|&x| self.image[x as usize])
                .collect(),
        )
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.degree()];
        for (x, &gx) in self.image.iter().enumerate() {
            inv[gx as usize] = x as u32;
        }
        Permutation::from_raw(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(x, &gx)| x as u32 == gx)
    }

    /// Number of points left in place.
    pub fn fixed_point_count(&self) -> usize {
        self.image
            .iter()
            .enumerate()
            .filter(|&(x, &gx)| x as u32 == gx)
            .count()
    }

    /// Induced action on vectors: `(a^g)[g(x)] = a[x]`.
    pub fn act_vector(&self, a: &[f64]) -> Result<Vec<f64>> {
        if a.len() != self.degree() {
            return Err(Error::LengthMismatch {
                expected: self.degree(),
                got: a.len(),
            });
        }
        let mut out = vec![0.0; a.len()];
        for (x, &gx) in self.image.iter().enumerate() {
            out[gx as usize] = a[x];
        }
        Ok(out)
    }

    /// Componentwise action on a tuple of points.
    pub fn act_tuple(&self, t: &[usize]) -> Result<Vec<usize>> {
        t.iter()
            .map(|&x| {
                if x < self.degree() {
                    Ok(self.apply(x))
                } else {
                    Err(Error::IndexOutOfRange {
                        index: x,
                        bound: self.degree(),
                    })
                }
            })
            .collect()
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.image)
    }
}

/// Human-readable names for the points of a G-space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GSpaceLabels {
    pub labels: Vec<String>,
}

impl GSpaceLabels {
    pub fn indices(n: usize) -> Self {
        GSpaceLabels {
            labels: (0..n).map(|x| x.to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A finite permutation group with every element stored explicitly.
#[derive(Clone)]
pub struct FiniteGroup {
    n: usize,
    elements: Vec<Permutation>,
    generators: Vec<Permutation>,
    identity_index: usize,
    index: HashMap<Permutation, usize>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("n", &self.n)
            .field("order", &self.elements.len())
            .field("generators", &self.generators)
            .finish()
    }
}

impl FiniteGroup {
    /// Breadth-first closure of `generators` acting on `n` points.
    pub fn close_generators(n: usize, generators: &[Permutation], cap: usize) -> Result<Self> {
        if cap == 0 {
            return Err(Error::InvalidParameter(
                "closure cap must be positive".into(),
            ));
        }
        for g in generators {
            if g.degree() != n {
                return Err(Error::DegreeMismatch {
                    expected: n,
                    got: g.degree(),
                });
            }
        }
        let gens: Vec<Permutation> = generators
            .iter()
            .filter(|g| !g.is_identity())
            .cloned()
            .collect();

        let id = Permutation::identity(n);
        let mut seen: HashSet<Permutation> = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(id.clone());
        queue.push_back(id);
        while let Some(h) = queue.pop_front() {
            for g in &gens {
                let gh = g.compose(&h);
                if !seen.contains(&gh) {
                    if seen.len() >= cap {
                        return Err(Error::ClosureCapExceeded { cap });
                    }
                    seen.insert(gh.clone());
                    queue.push_back(gh);
                }
            }
        }
        Ok(Self::from_parts(n, seen.into_iter().collect(), gens))
    }

    /// Wraps an element set already known to be closed.
    fn from_parts(n: usize, mut elements: Vec<Permutation>, generators: Vec<Permutation>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        let index: HashMap<Permutation, usize> = elements
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, g)| (g, i))
            .collect();
        let identity_index = index[&Permutation::identity(n)];
        FiniteGroup {
            n,
            elements,
            generators,
            identity_index,
            index,
        }
    }

    /// Closed subgroup from an element list, with a greedily chosen
    /// generating set.
    fn subgroup(n: usize, elements: Vec<Permutation>) -> Self {
        let mut elements = elements;
        elements.sort_unstable();
        let mut generated: HashSet<Permutation> = HashSet::new();
        generated.insert(Permutation::identity(n));
        let mut gens: Vec<Permutation> = Vec::new();
        for e in &elements {
            if generated.contains(e) {
                continue;
            }
            gens.push(e.clone());
            let mut queue: VecDeque<Permutation> = generated.iter().cloned().collect();
            while let Some(h) = queue.pop_front() {
                for g in &gens {
                    let gh = g.compose(&h);
                    if generated.insert(gh.clone()) {
                        queue.push_back(gh);
                    }
                }
            }
        }
        Self::from_parts(n, elements, gens)
    }

    pub fn trivial(n: usize) -> Self {
        Self::from_parts(n, vec![Permutation::identity(n)], Vec::new())
    }

    /// Rotations of `n` points in a cycle, generated by `x -> x + 1`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("cyclic group needs n >= 1".into()));
        }
        let elements = (0..n).map(|k| Permutation::rotation(n, k)).collect();
        let generators = if n > 1 {
            vec![Permutation::rotation(n, 1)]
        } else {
            Vec::new()
        };
        Ok(Self::from_parts(n, elements, generators))
    }

    /// The symmetric group on `l` letters acting on the `C(l, w)` subsets of
    /// size `w`. Points are the subsets in lexicographic order, labelled
    /// 1-based, e.g. `{1,3}`.
    pub fn sym_subsets(l: usize, w: usize, caps: &Caps) -> Result<(Self, GSpaceLabels)> {
        if l == 0 || w == 0 || w > l {
            return Err(Error::InvalidParameter(format!(
                "subset model needs 1 <= w <= l, got l = {l}, w = {w}"
            )));
        }
        let n = binomial(l as u128, w as u128).ok_or(Error::Overflow("binomial"))?;
        if n > caps.points as u128 {
            return Err(Error::CapExceeded {
                what: "number of subsets",
                value: n,
                cap: caps.points,
            });
        }
        let order = factorial(l as u128).unwrap_or(u128::MAX);
        if order > caps.group as u128 {
            return Err(Error::CapExceeded {
                what: "symmetric group order",
                value: order,
                cap: caps.group,
            });
        }

        let subsets = combinations(l, w);
        let lookup: HashMap<&[usize], usize> = subsets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i))
            .collect();
        let induced = |letters: &[usize]| -> Permutation {
            let image = subsets
                .iter()
                .map(|s| {
                    let mut t: Vec<usize> = s.iter().map(|&x| letters[x]).collect();
                    t.sort_unstable();
                    lookup[t.as_slice()] as u32
                })
                .collect();
            Permutation::from_raw(image)
        };

        let mut generators = Vec::new();
        if l >= 2 {
            let mut swap: Vec<usize> = (0..l).collect();
            swap.swap(0, 1);
            generators.push(induced(&swap));
            let cycle: Vec<usize> = (0..l).map(|x| (x + 1) % l).collect();
            generators.push(induced(&cycle));
        }
        let group = Self::close_generators(subsets.len(), &generators, caps.group)?;
        let labels = GSpaceLabels {
            labels: subsets
                .iter()
                .map(|s| {
                    let parts: Vec<String> = s.iter().map(|x| (x + 1).to_string()).collect();
                    format!("{{{}}}", parts.join(","))
                })
                .collect(),
        };
        Ok((group, labels))
    }

    /// The group acting on its own elements by left multiplication; point
    /// `i` is element `i` of `self`.
    pub fn regular_space(&self, point_cap: usize) -> Result<(FiniteGroup, GSpaceLabels)> {
        let order = self.order();
        if order > point_cap {
            return Err(Error::CapExceeded {
                what: "group order (as point count)",
                value: order as u128,
                cap: point_cap,
            });
        }
        let left_mult = |g: &Permutation| -> Permutation {
            Permutation::from_raw(
                self.elements
                    .iter()
                    .map(|sigma| self.index[&g.compose(sigma)] as u32)
                    .collect(),
            )
        };
        let elements = self.elements.iter().map(left_mult).collect();
        let generators = self.generators.iter().map(left_mult).collect();
        let labels = GSpaceLabels {
            labels: self
                .elements
                .iter()
                .map(|g| format!("{:?}", g.image))
                .collect(),
        };
        Ok((Self::from_parts(order, elements, generators), labels))
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn identity_index(&self) -> usize {
        self.identity_index
    }

    pub fn index_of(&self, g: &Permutation) -> Option<usize> {
        self.index.get(g).copied()
    }

    /// Index of `elements[i] ∘ elements[j]`.
    pub fn product_index(&self, i: usize, j: usize) -> usize {
        self.index[&self.elements[i].compose(&self.elements[j])]
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.index[&self.elements[i].inverse()]
    }

    fn check_point(&self, x: usize) -> Result<()> {
        if x < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: x,
                bound: self.n,
            })
        }
    }

    /// Points reachable from `x`, in ascending order.
    pub fn point_orbit(&self, x: usize) -> Result<Vec<usize>> {
        self.check_point(x)?;
        let mut seen = vec![false; self.n];
        seen[x] = true;
        let mut queue = VecDeque::from([x]);
        while let Some(y) = queue.pop_front() {
            for g in &self.generators {
                let gy = g.apply(y);
                if !std::mem::replace(&mut seen[gy], true) {
                    queue.push_back(gy);
                }
            }
        }
        Ok((0..self.n).filter(|&y| seen[y]).collect())
    }

    pub fn is_transitive(&self) -> bool {
        self.n == 0
            || self
                .point_orbit(0)
                .map(|o| o.len() == self.n)
                .unwrap_or(false)
    }

    /// Subgroup of elements fixing `x`.
    pub fn stabilizer(&self, x: usize) -> Result<FiniteGroup> {
        self.check_point(x)?;
        let elements = self
            .elements
            .iter()
            .filter(|g| g.apply(x) == x)
            .cloned()
            .collect();
        Ok(Self::subgroup(self.n, elements))
    }

    /// For every point `x_j`, the index of the lexicographically smallest
    /// element `t_j` with `t_j(x1) = x_j`.
    pub fn coset_reps(&self, x1: usize) -> Result<Vec<usize>> {
        self.check_point(x1)?;
        let mut reps: Vec<Option<usize>> = vec![None; self.n];
        for (i, g) in self.elements.iter().enumerate() {
            let slot = &mut reps[g.apply(x1)];
            if slot.is_none() {
                *slot = Some(i);
            }
        }
        reps.into_iter()
            .enumerate()
            .map(|(j, r)| {
                r.ok_or(Error::NotTransitive {
                    base: x1,
                    unreachable: j,
                })
            })
            .collect()
    }
}

fn combinations(l: usize, w: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..w).collect();
    loop {
        out.push(cur.clone());
        // advance to the next w-subset in lexicographic order
        let mut i = w;
        while i > 0 && cur[i - 1] == l - w + (i - 1) {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..w {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

pub(crate) fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

fn factorial(n: u128) -> Option<u128> {
    (1..=n).try_fold(1u128, |acc, x| acc.checked_mul(x))
}
