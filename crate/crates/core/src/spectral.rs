//! Fourier analysis on the cyclic group `Z_n`: triple correlation,
//! bispectrum, and reconstruction of a signal from its bispectrum up to a
//! cyclic shift.
//!
//! Conventions: `ẑ(k) = Σ_g z_g e^{2πikg/n}`, `A(g,h) = Σ_σ z_σ z_{σ+g}
//! z_{σ+h}`, and `B(k1,k2) = Σ_{g,h} A(g,h) e^{2πi(k1 g + k2 h)/n}`, which
//! for real `z` factors as `ẑ(k1) ẑ(k2) conj(ẑ(k1+k2))`.

use std::f64::consts::PI;

pub use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `z_g = (1/n) Σ_k ẑ(k) e^{-2πikg/n}`.
    pub fn inverse(&self) -> Vec<Complex64> {
        let n = self.coeffs.len();
        let w = twiddles(n);
        (0..n)
            .map(|g| {
                let s: Complex64 = self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * w[(k * g) % n].conj())
                    .sum();
                s / n as f64
            })
            .collect()
    }
}

/// Direct `O(n²)` transform.
pub fn dft(z: &[f64]) -> Spectrum {
    let n = z.len();
    let w = twiddles(n);
    Spectrum {
        coeffs: (0..n)
            .map(|k| z.iter().enumerate().map(|(g, &x)| w[(k * g) % n] * x).sum())
            .collect(),
    }
}

/// `n × n` table, row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleCorrelation {
    pub n: usize,
    pub values: Vec<f64>,
}

impl TripleCorrelation {
    pub fn get(&self, g: usize, h: usize) -> f64 {
        self.values[g * self.n + h]
    }
}

pub fn triple_correlation(z: &[f64]) -> TripleCorrelation {
    let n = z.len();
    let mut values = vec![0.0; n * n];
    for g in 0..n {
        for h in 0..n {
            let mut total = 0.0;
            for sigma in 0..n {
                total += z[sigma] * z[(sigma + g) % n] * z[(sigma + h) % n];
            }
            values[g * n + h] = total;
        }
    }
    TripleCorrelation { n, values }
}

/// `n × n` complex table, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Bispectrum {
    pub n: usize,
    pub values: Vec<Complex64>,
}

impl Bispectrum {
    pub fn get(&self, k1: usize, k2: usize) -> Complex64 {
        self.values[k1 * self.n + k2]
    }

    /// Factorized form `ẑ(k1) ẑ(k2) conj(ẑ(k1+k2))`.
    pub fn from_spectrum(spectrum: &Spectrum) -> Self {
        let c = &spectrum.coeffs;
        let n = c.len();
        let mut values = Vec::with_capacity(n * n);
        for k1 in 0..n {
            for k2 in 0..n {
                values.push(c[k1] * c[k2] * c[(k1 + k2) % n].conj());
            }
        }
        Bispectrum { n, values }
    }

    /// Two-dimensional transform of the triple correlation, one axis at a
    /// time.
    pub fn from_triple_correlation(a: &TripleCorrelation) -> Self {
        let n = a.n;
        let w = twiddles(n);
        // partial[g][k2] = Σ_h A(g,h) w^{k2 h}
        let mut partial = vec![Complex64::new(0.0, 0.0); n * n];
        for g in 0..n {
            for k2 in 0..n {
                partial[g * n + k2] = (0..n).map(|h| w[(k2 * h) % n] * a.get(g, h)).sum();
            }
        }
        let mut values = vec![Complex64::new(0.0, 0.0); n * n];
        for k1 in 0..n {
            for k2 in 0..n {
                values[k1 * n + k2] = (0..n).map(|g| w[(k1 * g) % n] * partial[g * n + k2]).sum();
            }
        }
        Bispectrum { n, values }
    }

    /// Exported as `k1, k2, re, im` rows.
    pub fn rows(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (i / self.n, i % self.n, v.re, v.im))
    }
}

/// Relative tolerance, against the largest entry, for agreement between
/// the two bispectrum routes.
pub const BISPECTRUM_PATH_TOLERANCE: f64 = 1e-8;

/// Bispectrum computed through both the triple correlation and the
/// factorization; fails if they disagree.
pub fn bispectrum(z: &[f64]) -> Result<Bispectrum> {
    let factored = Bispectrum::from_spectrum(&dft(z));
    let via_correlation = Bispectrum::from_triple_correlation(&triple_correlation(z));
    let scale = factored
        .values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.norm()))
        .max(f64::MIN_POSITIVE);
    for (i, (x, y)) in factored
        .values
        .iter()
        .zip(&via_correlation.values)
        .enumerate()
    {
        let rel_err = (x - y).norm() / scale;
        if rel_err > BISPECTRUM_PATH_TOLERANCE {
            return Err(Error::FactorizationMismatch {
                k1: i / factored.n,
                k2: i % factored.n,
                rel_err,
            });
        }
    }
    Ok(factored)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionOptions {
    /// Magnitudes `|ẑ(k)|` at or below `rel_tol · scale` violate the
    /// invertibility condition, where `scale = |ẑ(0)|/n + max_k |B(0,k)|^{1/3}`.
    pub rel_tol: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions { rel_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconstruction {
    pub signal: Vec<f64>,
    /// Largest imaginary part discarded by the inverse transform.
    pub imag_residue: f64,
}

/// Recovers a real signal, up to cyclic shift, from its bispectrum.
///
/// `ẑ(0)` is the real cube root of `B(0,0)`; magnitudes come from
/// `B(0,k) = ẑ(0)|ẑ(k)|²`; phases follow `ẑ(k+1) = conj(B(k,1) / (ẑ(k) ẑ(1)))`
/// starting from a real non-negative `ẑ(1)`. That start is a continuous
/// gauge, but only shifts by multiples of `2π/n` in the phase of `ẑ(1)`
/// correspond to cyclic shifts of the signal, so the phase of `ẑ(1)` is then
/// rotated to satisfy the real-signal closure `ẑ(n−1) = conj(ẑ(1))`.
pub fn invert_bispectrum(b: &Bispectrum, opts: &InversionOptions) -> Result<Reconstruction> {
    let n = b.n;
    if n == 0 {
        return Err(Error::InvalidParameter("empty bispectrum".into()));
    }
    let z0 = b.get(0, 0).re.cbrt();
    let max_b0k = (0..n).fold(0.0f64, |m, k| m.max(b.get(0, k).norm()));
    let scale = z0.abs() / n as f64 + max_b0k.cbrt();
    let tolerance = opts.rel_tol * scale;
    if z0.abs() <= tolerance {
        return Err(Error::ConditionViolated {
            k: 0,
            magnitude: z0.abs(),
            tolerance,
        });
    }

    let mut magnitude = vec![z0.abs(); n];
    for (k, mag) in magnitude.iter_mut().enumerate().skip(1) {
        let sq = b.get(0, k).re / z0;
        if sq < -tolerance * scale {
            return Err(Error::NegativeMagnitude { k, value: sq });
        }
        *mag = sq.max(0.0).sqrt();
        if *mag <= tolerance {
            return Err(Error::ConditionViolated {
                k,
                magnitude: *mag,
                tolerance,
            });
        }
    }

    let mut coeffs = vec![Complex64::new(z0, 0.0); n];
    if n > 1 {
        coeffs[1] = Complex64::new(magnitude[1], 0.0);
        for k in 1..n - 1 {
            let next = (b.get(k, 1) / (coeffs[k] * coeffs[1])).conj();
            coeffs[k + 1] = Complex64::from_polar(magnitude[k + 1], next.arg());
        }
        // Closure: with ẑ(1) real, ẑ(n−1) carries the phase −nψ of the true
        // ẑ(1) = |ẑ(1)|e^{iψ}; rotate by an n-th root of that phase.
        let psi = -coeffs[n - 1].arg() / n as f64;
        for (k, c) in coeffs.iter_mut().enumerate() {
            *c *= Complex64::from_polar(1.0, k as f64 * psi);
        }
        // enforce conjugate symmetry of a real signal
        let sym: Vec<Complex64> = (0..n)
            .map(|k| 0.5 * (coeffs[k] + coeffs[(n - k) % n].conj()))
            .collect();
        coeffs = sym;
    }

    let values = Spectrum { coeffs }.inverse();
    Ok(Reconstruction {
        imag_residue: values.iter().fold(0.0f64, |m, v| m.max(v.im.abs())),
        signal: values.into_iter().map(|v| v.re).collect(),
    })
}

/// `z` rotated so that output index `g + s` holds `z[g]`.
pub fn cyclic_shift(z: &[f64], s: usize) -> Vec<f64> {
    let n = z.len();
    let mut out = vec![0.0; n];
    for (g, &v) in z.iter().enumerate() {
        out[(g + s) % n] = v;
    }
    out
}

/// `min_s ‖a − shift_s(b)‖_∞` and the minimizing shift.
pub fn shift_distance(a: &[f64], b: &[f64]) -> (f64, usize) {
    let n = a.len();
    (0..n.max(1))
        .map(|s| {
            let shifted = cyclic_shift(b, s);
            let d = a
                .iter()
                .zip(&shifted)
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            (d, s)
        })
        .fold(
            (f64::INFINITY, 0),
            |best, cur| if cur.0 < best.0 { cur } else { best },
        )
}
