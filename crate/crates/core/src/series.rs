//! Truncated complex power series.
//!
//! A [`TruncatedSeries`] of order `N` stores the Maclaurin coefficients
//! `c_0..=c_N`. Products are truncated to a requested order, and real powers
//! are taken on the analytic branch obtained by continuing the logarithm
//! along the straight ray from the origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::ComplexSum;

/// Smallest modulus the base may attain on the ray before the power is
/// declared undefined.
pub const DEFAULT_ZERO_EPS: f64 = 1e-12;

/// Default number of ray samples used for phase continuation.
pub const DEFAULT_RAY_STEPS: usize = 64;

/// Controls phase continuation in [`TruncatedSeries::real_power_on_ray`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayOptions {
    pub steps: usize,
    pub zero_eps: f64,
}

impl Default for RayOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_RAY_STEPS,
            zero_eps: DEFAULT_ZERO_EPS,
        }
    }
}

/// Serialized complex point, `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for PointRecord {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<PointRecord> for Complex64 {
    fn from(p: PointRecord) -> Self {
        Complex64::new(p.re, p.im)
    }
}

pub(crate) fn ensure_finite(z: Complex64, what: &str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} is not finite: {z}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
}

impl TruncatedSeries {
    /// Builds a series from its coefficients; `coeffs[0]` is the constant
    /// term and the truncation order is `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument(
                "a truncated series needs at least one coefficient".into(),
            ));
        }
        for c in &coeffs {
            ensure_finite(*c, "coefficient")?;
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub(crate) fn from_real_unchecked(coeffs: &[f64]) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        }
    }

    pub fn one() -> Self {
        Self {
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient `k`, zero past the truncation order.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Cauchy product truncated at `order`; missing coefficients count as 0.
    pub fn multiply(&self, other: &TruncatedSeries, order: usize) -> TruncatedSeries {
        let coeffs = (0..=order)
            .map(|n| {
                let lo = n.saturating_sub(other.truncation_order());
                let hi = n.min(self.truncation_order());
                let mut acc = ComplexSum::new();
                if lo <= hi {
                    for k in lo..=hi {
                        acc.add(self.coeffs[k] * other.coeffs[n - k]);
                    }
                }
                acc.value()
            })
            .collect();
        TruncatedSeries { coeffs }
    }

    /// The degree-`n` partial sum `s_n`.
    pub fn partial_sum(&self, n: usize) -> Result<TruncatedSeries> {
        if n > self.truncation_order() {
            return Err(Error::OutOfRange {
                index: n,
                max: self.truncation_order(),
            });
        }
        Ok(TruncatedSeries {
            coeffs: self.coeffs[..=n].to_vec(),
        })
    }

    /// Horner evaluation.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Termwise derivative; the derivative of an order-`N` series has order
    /// `N - 1` (order 0 maps to the zero constant).
    pub fn derivative(&self) -> TruncatedSeries {
        if self.coeffs.len() == 1 {
            return TruncatedSeries {
                coeffs: vec![Complex64::new(0.0, 0.0)],
            };
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        TruncatedSeries { coeffs }
    }

    /// Multiplication by `z`, raising the order by one.
    pub fn shift_by_z(&self) -> TruncatedSeries {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend_from_slice(&self.coeffs);
        TruncatedSeries { coeffs }
    }

    /// Coefficients of `(1 + c z)^mu` up to `order`, built from the ratio
    /// `b_k = b_{k-1} c (mu - k + 1) / k`.
    pub fn binomial_series(c: f64, mu: f64, order: usize) -> TruncatedSeries {
        let mut coeffs = Vec::with_capacity(order + 1);
        let mut term = 1.0;
        coeffs.push(Complex64::new(term, 0.0));
        for k in 1..=order {
            term *= c * (mu - (k as f64 - 1.0)) / k as f64;
            coeffs.push(Complex64::new(term, 0.0));
        }
        TruncatedSeries { coeffs }
    }

    /// Continuous logarithm of `self` along the segment `[0, z]`, normalized
    /// by `L(0) = 0`.
    ///
    /// The phase follows `f(t z)` through `steps` equispaced points, each
    /// assumed to turn by less than `pi` from the previous one. It is the
    /// principal argument of the last value plus `2 pi` per crossing of the
    /// negative real axis, so it follows the analytic branch rather than the
    /// principal one.
    pub fn ray_log(&self, z: Complex64, opts: RayOptions) -> Result<Complex64> {
        ensure_finite(z, "z")?;
        if self.coeffs[0] != Complex64::new(1.0, 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ray continuation needs constant term 1, got {}",
                self.coeffs[0]
            )));
        }
        if opts.steps == 0 {
            return Err(Error::InvalidArgument("ray steps must be >= 1".into()));
        }
        // f(t z) = sum (c_k z^k) t^k is a polynomial in the real variable t
        let mut scaled = Vec::with_capacity(self.coeffs.len());
        let mut zk = Complex64::new(1.0, 0.0);
        for c in &self.coeffs {
            scaled.push(c * zk);
            zk *= z;
        }
        let mut prev = Complex64::new(1.0, 0.0);
        let mut turns = 0i64;
        for j in 1..=opts.steps {
            let t = j as f64 / opts.steps as f64;
            let w = scaled.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c);
            let modulus = w.norm();
            if !(modulus >= opts.zero_eps) {
                return Err(Error::BranchFailure { at: z * t, modulus });
            }
            let cross = prev.re * w.im - prev.im * w.re;
            let (was_lower, is_lower) = (prev.im.is_sign_negative(), w.im.is_sign_negative());
            if !was_lower && is_lower && cross > 0.0 {
                turns += 1;
            } else if was_lower && !is_lower && cross < 0.0 {
                turns -= 1;
            }
            prev = w;
        }
        let phase = prev.arg() + std::f64::consts::TAU * turns as f64;
        Ok(Complex64::new(prev.norm().ln(), phase))
    }

    /// `f(z)^exponent` on the branch continued from `f(0) = 1` along `[0, z]`.
    pub fn real_power_on_ray(
        &self,
        exponent: f64,
        z: Complex64,
        opts: RayOptions,
    ) -> Result<Complex64> {
        if !exponent.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "exponent is not finite: {exponent}"
            )));
        }
        let log = self.ray_log(z, opts)?;
        Ok((log * exponent).exp())
    }
}
