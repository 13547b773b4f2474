//! Taylor coefficients of `v(A, B, z) = ((1 + A z) / (1 + B z))^lambda`.
//!
//! Two independent routes produce the coefficients `a_n`:
//!
//! * the convolution of the binomial series of `(1 + A z)^lambda` and
//!   `(1 + B z)^-lambda`, `O(n)` per coefficient;
//! * the three-term recurrence obtained from the first-order ODE
//!   `lambda (A - B) v = (1 + (A + B) z + A B z^2) v'`, namely
//!   `(n + 1) a_{n+1} = (lambda (A - B) - (A + B) n) a_n - A B (n - 1) a_{n-1}`.
//!
//! The recurrence is the production path; the convolution is kept as its
//! oracle.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TruncatedSeries;
use crate::sum::NeumaierSum;

/// The triple `(A, B, lambda)` with `-1 <= B < A <= 1` and `0 < lambda <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JanowskiParams {
    a: f64,
    b: f64,
    lambda: f64,
    nonpositive_a: bool,
}

impl JanowskiParams {
    pub fn new(a: f64, b: f64, lambda: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && lambda.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite parameters A={a}, B={b}, lambda={lambda}"
            )));
        }
        if !(-1.0 <= b && b < a && a <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "need -1 <= B < A <= 1, got A={a}, B={b}"
            )));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "need 0 < lambda <= 1, got {lambda}"
            )));
        }
        Ok(Self {
            a,
            b,
            lambda,
            nonpositive_a: a <= 0.0,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Whether `A <= 0`, the range where stability with respect to
    /// `(1 + B z)^-lambda` holds.
    pub fn in_base_stability_range(&self) -> bool {
        self.nonpositive_a
    }

    /// Whether `-1 <= B < A < 0`, the range of non-self-stability.
    pub fn in_self_instability_range(&self) -> bool {
        self.a < 0.0
    }

    pub fn record(&self) -> ParamsRecord {
        ParamsRecord {
            a: self.a,
            b: self.b,
            lambda: self.lambda,
        }
    }
}

impl fmt::Display for JanowskiParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(A={}, B={}, lambda={})", self.a, self.b, self.lambda)
    }
}

/// Serialized form of [`JanowskiParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffMethod {
    Convolution,
    Recurrence,
}

impl fmt::Display for CoeffMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoeffMethod::Convolution => "convolution",
            CoeffMethod::Recurrence => "recurrence",
        })
    }
}

/// Coefficients `a_0..=a_N` of `v` together with how they were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffSequence {
    values: Vec<f64>,
    params: JanowskiParams,
    method: CoeffMethod,
}

impl CoeffSequence {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn params(&self) -> &JanowskiParams {
        &self.params
    }

    pub fn method(&self) -> CoeffMethod {
        self.method
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn to_series(&self) -> TruncatedSeries {
        TruncatedSeries::from_real_unchecked(&self.values)
    }
}

/// `[x]_k = x (x - 1) ... (x - k + 1)`, with `[x]_0 = 1`.
pub fn falling_factorial(x: f64, k: usize) -> f64 {
    (0..k).map(|j| x - j as f64).product()
}

/// `(x)_k = x (x + 1) ... (x + k - 1)`, with `(x)_0 = 1`.
pub fn rising_factorial(x: f64, k: usize) -> f64 {
    (0..k).map(|j| x + j as f64).product()
}

/// `[lambda]_k / k! * c^k` for `k = 0..=n`, by ratios.
pub(crate) fn falling_terms(lambda: f64, c: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut t = 1.0;
    out.push(t);
    for k in 1..=n {
        t *= (lambda - (k as f64 - 1.0)) / k as f64 * c;
        out.push(t);
    }
    out
}

/// `(lambda)_k / k! * c^k` for `k = 0..=n`, by ratios.
pub(crate) fn rising_terms(lambda: f64, c: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut t = 1.0;
    out.push(t);
    for k in 1..=n {
        t *= (lambda + (k as f64 - 1.0)) / k as f64 * c;
        out.push(t);
    }
    out
}

fn convolve_at(falling: &[f64], rising: &[f64], n: usize) -> f64 {
    (0..=n)
        .map(|k| falling[k] * rising[n - k])
        .collect::<NeumaierSum>()
        .value()
}

/// Convolution coefficients for arbitrary real `(a, b, lambda)`, no range
/// checks. `a_n = sum_k [lambda]_k/k! (lambda)_{n-k}/(n-k)! a^k (-b)^{n-k}`.
pub(crate) fn convolution_coefficients(a: f64, b: f64, lambda: f64, n_max: usize) -> Vec<f64> {
    let falling = falling_terms(lambda, a, n_max);
    let rising = rising_terms(lambda, -b, n_max);
    (0..=n_max)
        .map(|n| convolve_at(&falling, &rising, n))
        .collect()
}

/// Recurrence coefficients for arbitrary real `(a, b, lambda)`.
pub(crate) fn recurrence_coefficients(a: f64, b: f64, lambda: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    let lead = lambda * (a - b);
    out.push(lead);
    for n in 1..n_max {
        let nf = n as f64;
        let next = ((lead - (a + b) * nf) * out[n] - a * b * (nf - 1.0) * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
    out
}

/// The single coefficient `a_n` from the convolution sum.
pub fn coeff_convolution(params: &JanowskiParams, n: usize) -> f64 {
    let falling = falling_terms(params.lambda, params.a, n);
    let rising = rising_terms(params.lambda, -params.b, n);
    convolve_at(&falling, &rising, n)
}

/// `a_0..=a_{n_max}` by the convolution sum.
pub fn coeff_convolution_sequence(params: &JanowskiParams, n_max: usize) -> CoeffSequence {
    CoeffSequence {
        values: convolution_coefficients(params.a, params.b, params.lambda, n_max),
        params: *params,
        method: CoeffMethod::Convolution,
    }
}

/// `a_0..=a_{n_max}` by the three-term recurrence.
pub fn coeff_recurrence(params: &JanowskiParams, n_max: usize) -> CoeffSequence {
    CoeffSequence {
        values: recurrence_coefficients(params.a, params.b, params.lambda, n_max),
        params: *params,
        method: CoeffMethod::Recurrence,
    }
}

pub fn coefficients(params: &JanowskiParams, n_max: usize, method: CoeffMethod) -> CoeffSequence {
    match method {
        CoeffMethod::Convolution => coeff_convolution_sequence(params, n_max),
        CoeffMethod::Recurrence => coeff_recurrence(params, n_max),
    }
}

/// The degree-`order` Maclaurin polynomial of `v`.
pub fn v_series(params: &JanowskiParams, order: usize, method: CoeffMethod) -> TruncatedSeries {
    coefficients(params, order, method).to_series()
}
