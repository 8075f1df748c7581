/// Neumaier's compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .collect::<CompensatedSum>()
        .value()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .collect::<CompensatedSum>()
        .value()
}

/// Visits every tuple of `0..n` of length `omega` in lexicographic order,
/// passing the products `Π a1[t_j]` and `Π a2[t_j]`.
pub(crate) fn for_each_tuple_product2(
    a1: &[f64],
    a2: &[f64],
    omega: usize,
    mut visit: impl FnMut(f64, f64),
) {
    let n = a1.len();
    if n == 0 {
        return;
    }
    let mut digits = vec![0usize; omega];
    // prefix[j] = product over the first j digits
    let mut p1 = vec![1.0; omega + 1];
    let mut p2 = vec![1.0; omega + 1];
    for j in 0..omega {
        p1[j + 1] = p1[j] * a1[0];
        p2[j + 1] = p2[j] * a2[0];
    }
    loop {
        visit(p1[omega], p2[omega]);
        let mut j = omega;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            digits[j] += 1;
            if digits[j] < n {
                break;
            }
            digits[j] = 0;
        }
        for k in j..omega {
            p1[k + 1] = p1[k] * a1[digits[k]];
            p2[k + 1] = p2[k] * a2[digits[k]];
        }
    }
}
