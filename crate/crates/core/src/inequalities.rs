//! Grid sweeps of the coefficient inequalities behind base stability:
//! positivity of `a_n`, the alternating identity, `(n+1) a_{n+1} + B n a_n > 0`
//! and `(m+1)(n+1) a_{n+1} + B m n a_n >= 0`.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::janowski::{convolution_coefficients, falling_terms, recurrence_coefficients, rising_terms, JanowskiParams};
use crate::series::PointRecord;
use crate::sum::NeumaierSum;

pub const DEFAULT_TOL: f64 = 1e-12;

/// Parameter lattice for the inequality sweeps.
///
/// Only pairs with `-1 <= B < A <= 0` are kept, or `A <= 1` when
/// `allow_outside` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    pub n_max: usize,
    pub m_max: usize,
    pub lemma2_n_max: usize,
    pub allow_outside: bool,
}

/// `lo, lo + step, ..., hi`. Values are produced as `k / (1 / step)` when
/// `1 / step` is an integer so that e.g. `-0.95` comes out as the nearest
/// double.
pub fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && hi >= lo);
    let inv = 1.0 / step;
    let count = ((hi - lo) / step + 1e-9).floor() as i64;
    if (inv - inv.round()).abs() < 1e-9 {
        let inv = inv.round();
        let start = (lo * inv).round() as i64;
        (0..=count).map(|k| (start + k) as f64 / inv).collect()
    } else {
        (0..=count).map(|k| lo + k as f64 * step).collect()
    }
}

impl GridSpec {
    /// `A, B` on a `0.05` lattice in `[-1, 0]`, `lambda in {0.05, ..., 1.0}`,
    /// `n <= 500`, Lemma-2 indices `m, n <= 100`.
    pub fn default_lemma() -> Self {
        let ab = lattice(-1.0, 0.0, 0.05);
        Self {
            a_values: ab.clone(),
            b_values: ab,
            lambda_values: lattice(0.05, 1.0, 0.05),
            n_max: 500,
            m_max: 100,
            lemma2_n_max: 100,
            allow_outside: false,
        }
    }

    pub fn single(params: &JanowskiParams, n_max: usize, m_max: usize) -> Self {
        Self {
            a_values: vec![params.a()],
            b_values: vec![params.b()],
            lambda_values: vec![params.lambda()],
            n_max,
            m_max,
            lemma2_n_max: n_max,
            allow_outside: params.a() > 0.0,
        }
    }

    fn a_limit(&self) -> f64 {
        if self.allow_outside {
            1.0
        } else {
            0.0
        }
    }

    /// Grid points kept, in `(A, B, lambda)` lexicographic input order.
    pub fn params(&self) -> Vec<JanowskiParams> {
        let a_limit = self.a_limit();
        let mut out = Vec::new();
        for &a in &self.a_values {
            for &b in &self.b_values {
                if !(-1.0 <= b && b < a && a <= a_limit) {
                    continue;
                }
                for &lambda in &self.lambda_values {
                    if let Ok(p) = JanowskiParams::new(a, b, lambda) {
                        out.push(p);
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.params().is_empty() {
            return Err(Error::InvalidArgument(
                "grid has no admissible (A, B, lambda) points".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityViolation {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub lambda: f64,
    pub n: usize,
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub z: Option<PointRecord>,
    pub value: f64,
}

impl InequalityViolation {
    fn sort_key_cmp(&self, other: &Self) -> Ordering {
        self.a
            .total_cmp(&other.a)
            .then(self.b.total_cmp(&other.b))
            .then(self.lambda.total_cmp(&other.lambda))
            .then(self.n.cmp(&other.n))
            .then(self.m.cmp(&other.m))
            .then_with(|| {
                let key = |z: &Option<PointRecord>| z.map(|p| (p.re, p.im));
                match (key(&self.z), key(&other.z)) {
                    (Some(x), Some(y)) => x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)),
                    (x, y) => x.is_some().cmp(&y.is_some()),
                }
            })
    }
}

/// Outcome of one sweep. Values are slacks: the checked quantity is expected
/// to be nonnegative, `min_margin` is its minimum over everything checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub checked: usize,
    pub violations: Vec<InequalityViolation>,
    pub min_margin: f64,
}

impl InequalityReport {
    pub fn empty() -> Self {
        Self {
            checked: 0,
            violations: Vec::new(),
            min_margin: f64::INFINITY,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn merge(mut self, other: InequalityReport) -> Self {
        self.checked += other.checked;
        self.violations.extend(other.violations);
        self.min_margin = self.min_margin.min(other.min_margin);
        self
    }

    pub(crate) fn finish(mut self) -> Self {
        self.violations.sort_by(|x, y| x.sort_key_cmp(y));
        self
    }

    pub(crate) fn record(&mut self, value: f64, violated: bool, make: impl FnOnce() -> InequalityViolation) {
        self.checked += 1;
        self.min_margin = self.min_margin.min(value);
        if violated {
            self.violations.push(make());
        }
    }
}

fn sweep<F>(grid: &GridSpec, per_point: F) -> InequalityReport
where
    F: Fn(&JanowskiParams) -> InequalityReport + Sync + Send,
{
    grid.params()
        .par_iter()
        .map(per_point)
        .collect::<Vec<_>>()
        .into_iter()
        .fold(InequalityReport::empty(), InequalityReport::merge)
        .finish()
}

fn violation(p: &JanowskiParams, n: usize, m: Option<usize>, value: f64) -> InequalityViolation {
    InequalityViolation {
        a: p.a(),
        b: p.b(),
        lambda: p.lambda(),
        n,
        m,
        z: None,
        value,
    }
}

/// Positivity of every `a_n`, `n <= n_max`; flags `a_n <= -tol`.
pub fn check_lemma1(grid: &GridSpec, tol: f64) -> InequalityReport {
    sweep(grid, |p| {
        let a = recurrence_coefficients(p.a(), p.b(), p.lambda(), grid.n_max);
        let mut rep = InequalityReport::empty();
        for (n, &an) in a.iter().enumerate() {
            rep.record(an, an <= -tol, || violation(p, n, None, an));
        }
        rep
    })
}

/// `sum_k [lambda]_k/k! (lambda)_{n-k}/(n-k)! (-1)^k`, the coefficient of
/// `z^n` in `(1 - z)^lambda (1 - z)^-lambda`.
pub fn alternating_sums(lambda: f64, n_max: usize) -> Vec<f64> {
    let falling = falling_terms(lambda, -1.0, n_max);
    let rising = rising_terms(lambda, 1.0, n_max);
    (0..=n_max)
        .map(|n| {
            (0..=n)
                .map(|k| falling[k] * rising[n - k])
                .collect::<NeumaierSum>()
                .value()
        })
        .collect()
}

/// The alternating sums vanish for `1 <= n <= n_max`; flags `|sum| > tol`.
/// Rows carry `A = B = -1`, the parameters for which `a_n` is this sum.
pub fn check_alternating_identity(lambda: f64, n_max: usize, tol: f64) -> Result<InequalityReport> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParams(format!("need 0 < lambda <= 1, got {lambda}")));
    }
    let sums = alternating_sums(lambda, n_max);
    let mut rep = InequalityReport::empty();
    for (n, &s) in sums.iter().enumerate().skip(1) {
        rep.record(-s.abs(), s.abs() > tol, || InequalityViolation {
            a: -1.0,
            b: -1.0,
            lambda,
            n,
            m: None,
            z: None,
            value: s,
        });
    }
    Ok(rep.finish())
}

/// `(n + 1) a_{n+1} + B n a_n` for `1 <= n < n_max`; flags values `<= -tol`.
pub fn check_coeff_inequality(grid: &GridSpec, tol: f64) -> InequalityReport {
    sweep(grid, |p| {
        let a = recurrence_coefficients(p.a(), p.b(), p.lambda(), grid.n_max);
        let mut rep = InequalityReport::empty();
        for n in 1..grid.n_max {
            let v = coeff_inequality_value(p.b(), &a, n);
            rep.record(v, v <= -tol, || violation(p, n, None, v));
        }
        rep
    })
}

pub fn coeff_inequality_value(b: f64, a: &[f64], n: usize) -> f64 {
    (n + 1) as f64 * a[n + 1] + b * n as f64 * a[n]
}

pub fn lemma2_value(b: f64, a: &[f64], m: usize, n: usize) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    (mf + 1.0) * (nf + 1.0) * a[n + 1] + b * mf * nf * a[n]
}

/// `(m + 1)(n + 1) a_{n+1} + B m n a_n` for `0 <= m <= m_max`,
/// `0 <= n <= lemma2_n_max`; flags values `< -tol`.
pub fn check_lemma2(grid: &GridSpec, tol: f64) -> InequalityReport {
    sweep(grid, |p| {
        let a = recurrence_coefficients(p.a(), p.b(), p.lambda(), grid.lemma2_n_max + 1);
        let mut rep = InequalityReport::empty();
        for m in 0..=grid.m_max {
            for n in 0..=grid.lemma2_n_max {
                let v = lemma2_value(p.b(), &a, m, n);
                rep.record(v, v < -tol, || violation(p, n, Some(m), v));
            }
        }
        rep
    })
}

/// The Lemma-2 expression with `B^{n+1-k}` in place of `(-B)^{n+1-k}`:
/// `(m+1)(n+1) S_{n+1} - m n S_n`, `S_j = sum_k [l]_k/k! (l)_{j-k}/(j-k)! A^k B^{j-k}`.
/// Informational only; no sign is asserted.
pub fn lemma2_statement_literal(params: &JanowskiParams, m: usize, n: usize) -> f64 {
    let s = convolution_coefficients(params.a(), -params.b(), params.lambda(), n + 1);
    let (mf, nf) = (m as f64, n as f64);
    (mf + 1.0) * (nf + 1.0) * s[n + 1] - mf * nf * s[n]
}

/// Sweeps [`lemma2_statement_literal`] and lists the negative entries.
pub fn scan_lemma2_statement_literal(grid: &GridSpec) -> InequalityReport {
    sweep(grid, |p| {
        let s = convolution_coefficients(p.a(), -p.b(), p.lambda(), grid.lemma2_n_max + 1);
        let mut rep = InequalityReport::empty();
        for m in 0..=grid.m_max {
            for n in 0..=grid.lemma2_n_max {
                let (mf, nf) = (m as f64, n as f64);
                let v = (mf + 1.0) * (nf + 1.0) * s[n + 1] - mf * nf * s[n];
                rep.record(v, v < 0.0, || violation(p, n, Some(m), v));
            }
        }
        rep
    })
}
