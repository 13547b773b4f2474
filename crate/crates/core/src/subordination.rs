//! Sampled subordination checks.
//!
//! Everything here is built on
//!
//! ```text
//! G(z) = (1 + B z) s_n(v)(z)^(1/lambda) / (1 + A z),    H(z) = (1 + B z) / (1 + A z),
//! ```
//!
//! where `s_n(v)` is the degree-`n` partial sum of `v(A, B, z)` and the power
//! is continued along the ray from the origin. Stability of `v` with respect
//! to `(1 + B z)^-lambda` amounts to `|G(z) - 1| <= |B|` on the unit disk;
//! stability with respect to `v` itself amounts to `G(|z| <= r)` lying inside
//! `H(|z| <= r)` for every `r < 1`.
//!
//! Sampling can only falsify: a positive margin is a witness, a nonpositive
//! worst margin is evidence.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequalities::{InequalityReport, InequalityViolation};
use crate::janowski::{coeff_recurrence, JanowskiParams, ParamsRecord};
use crate::series::{ensure_finite, PointRecord, RayOptions, TruncatedSeries};

/// Default tolerance for subordination margins.
pub const DEFAULT_TOL: f64 = 1e-6;

/// `|1 + A z|` below this is treated as a pole.
pub const POLE_EPS: f64 = 1e-12;

/// Step of the central differences used for `h'`.
pub const FD_STEP: f64 = 1e-6;

/// The published counterexample for non-self-stability and its printed values.
pub mod published {
    use num_complex::Complex64;

    pub const A: f64 = -0.679;
    pub const B: f64 = -0.97;
    pub const LAMBDA: f64 = 0.3;
    pub const N: usize = 1;
    pub const R0: f64 = 0.98;
    pub const Z0: Complex64 = Complex64::new(0.915282, -0.357037);
    /// Printed value of `G(z0)`, four decimals.
    pub const G_Z0: Complex64 = Complex64::new(0.8697, 0.5845);
    pub const CENTER: f64 = 0.634444;
    pub const RADIUS: f64 = 0.576521;
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Closed disk `|w - center| <= radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskSpec {
    pub center: Complex64,
    pub radius: f64,
}

impl DiskSpec {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        ensure_finite(center, "disk center")?;
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("disk radius {radius} must be finite and >= 0")));
        }
        Ok(Self { center, radius })
    }

    /// Distance of `w` outside the disk; negative inside.
    pub fn margin(&self, w: Complex64) -> f64 {
        (w - self.center).norm() - self.radius
    }

    pub fn contains(&self, w: Complex64, tol: f64) -> bool {
        self.margin(w) <= tol
    }

    /// `count` equispaced boundary points starting at angle 0.
    pub fn boundary_points(&self, count: usize) -> Vec<Complex64> {
        (0..count)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / count as f64;
                self.center + Complex64::from_polar(self.radius, t)
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct DiskRecord {
    center: PointRecord,
    radius: f64,
}

impl Serialize for DiskSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DiskRecord {
            center: self.center.into(),
            radius: self.radius,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiskSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DiskRecord::deserialize(d)?;
        Ok(DiskSpec {
            center: r.center.into(),
            radius: r.radius,
        })
    }
}

/// Which target disk a containment check uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiskSource {
    /// `C = (r^2 A - B) / (B^2 - r^2 A^2)`, `R = r (A - B) / (B^2 - r^2 A^2)`
    /// as printed with the published counterexample.
    PublishedFormula,
    /// The true image of `|z| <= r` under `H`.
    MobiusImage,
    /// `|w - 1| <= |B|`, the image of the unit disk under `1 + B z`.
    Base,
}

impl fmt::Display for DiskSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiskSource::PublishedFormula => "published_formula",
            DiskSource::MobiusImage => "mobius_image",
            DiskSource::Base => "base",
        })
    }
}

/// The printed disk formulas evaluated literally.
pub fn published_disk(params: &JanowskiParams, r: f64) -> Result<DiskSpec> {
    let (a, b) = (params.a(), params.b());
    let den = b * b - r * r * a * a;
    if !(den > POLE_EPS) {
        return Err(Error::DegenerateDisk { denominator: den });
    }
    DiskSpec::new(c((r * r * a - b) / den, 0.0), r * (a - b) / den)
}

/// Image of `|z| <= r` under `H(z) = (1 + B z) / (1 + A z)`.
///
/// `H` has real coefficients, so the image circle is symmetric about the real
/// axis with diameter endpoints `H(r)` and `H(-r)`.
pub fn mobius_image_disk(params: &JanowskiParams, r: f64) -> Result<DiskSpec> {
    let (a, b) = (params.a(), params.b());
    if !(r >= 0.0 && a.abs() * r < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 <= r and |A| r < 1, got r={r}")));
    }
    let den = 1.0 - a * a * r * r;
    if !(den.abs() > POLE_EPS) {
        return Err(Error::DegenerateDisk { denominator: den });
    }
    DiskSpec::new(c((1.0 - a * b * r * r) / den, 0.0), (b - a).abs() * r / den)
}

pub fn base_disk(params: &JanowskiParams) -> DiskSpec {
    DiskSpec {
        center: c(1.0, 0.0),
        radius: params.b().abs(),
    }
}

pub fn target_disk(params: &JanowskiParams, r: f64, source: DiskSource) -> Result<DiskSpec> {
    match source {
        DiskSource::PublishedFormula => published_disk(params, r),
        DiskSource::MobiusImage => mobius_image_disk(params, r),
        DiskSource::Base => Ok(base_disk(params)),
    }
}

/// `H^{-1}(w) = (1 - w) / (A w - B)`.
pub fn h_inverse(params: &JanowskiParams, w: Complex64) -> Complex64 {
    (c(1.0, 0.0) - w) / (w * params.a() - params.b())
}

/// Printed disk values next to the direct evaluation of the printed formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PublishedDiskComparison {
    pub printed_center: f64,
    pub printed_radius: f64,
    pub evaluated_center: f64,
    pub evaluated_radius: f64,
    pub center_discrepancy: f64,
    pub radius_discrepancy: f64,
    /// Set when either discrepancy exceeds `1e-6`.
    pub discrepancy_flag: bool,
}

pub fn published_disk_comparison() -> PublishedDiskComparison {
    let params = JanowskiParams::new(published::A, published::B, published::LAMBDA)
        .expect("published parameters are admissible");
    let disk = published_disk(&params, published::R0).expect("published disk is nondegenerate");
    let dc = disk.center.re - published::CENTER;
    let dr = disk.radius - published::RADIUS;
    PublishedDiskComparison {
        printed_center: published::CENTER,
        printed_radius: published::RADIUS,
        evaluated_center: disk.center.re,
        evaluated_radius: disk.radius,
        center_discrepancy: dc,
        radius_discrepancy: dr,
        discrepancy_flag: dc.abs() > 1e-6 || dr.abs() > 1e-6,
    }
}

fn is_published_case(params: &JanowskiParams, n: usize, r: f64) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() < 1e-12;
    close(params.a(), published::A)
        && close(params.b(), published::B)
        && close(params.lambda(), published::LAMBDA)
        && n == published::N
        && close(r, published::R0)
}

/// Evaluator for `G` at fixed `(A, B, lambda, n)`.
#[derive(Debug, Clone)]
pub struct GFunction {
    params: JanowskiParams,
    n: usize,
    partial_sum: TruncatedSeries,
    ray: RayOptions,
}

impl GFunction {
    pub fn new(params: &JanowskiParams, n: usize, ray: RayOptions) -> Self {
        Self {
            params: *params,
            n,
            partial_sum: coeff_recurrence(params, n).to_series(),
            ray,
        }
    }

    pub fn params(&self) -> &JanowskiParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn partial_sum(&self) -> &TruncatedSeries {
        &self.partial_sum
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        ensure_finite(z, "z")?;
        let den = c(1.0, 0.0) + z * self.params.a();
        if den.norm() < POLE_EPS {
            return Err(Error::Pole { at: z, modulus: den.norm() });
        }
        let power = self
            .partial_sum
            .real_power_on_ray(1.0 / self.params.lambda(), z, self.ray)?;
        Ok((c(1.0, 0.0) + z * self.params.b()) * power / den)
    }

    /// `h(z) = 1 - G(z)`.
    pub fn h(&self, z: Complex64) -> Result<Complex64> {
        Ok(c(1.0, 0.0) - self.eval(z)?)
    }

    /// `h'(z)` by central differences along the real direction.
    pub fn h_prime(&self, z: Complex64) -> Result<Complex64> {
        let d = c(FD_STEP, 0.0);
        Ok((self.h(z + d)? - self.h(z - d)?) / (2.0 * FD_STEP))
    }
}

pub fn g_value(params: &JanowskiParams, n: usize, z: Complex64) -> Result<Complex64> {
    GFunction::new(params, n, RayOptions::default()).eval(z)
}

pub fn h_value(params: &JanowskiParams, n: usize, z: Complex64) -> Result<Complex64> {
    GFunction::new(params, n, RayOptions::default()).h(z)
}

/// `H(z) = (1 + B z) / (1 + A z)`.
pub fn mobius_value(params: &JanowskiParams, z: Complex64) -> Result<Complex64> {
    ensure_finite(z, "z")?;
    let den = c(1.0, 0.0) + z * params.a();
    if den.norm() < POLE_EPS {
        return Err(Error::Pole { at: z, modulus: den.norm() });
    }
    Ok((c(1.0, 0.0) + z * params.b()) / den)
}

/// Sample points: `points_per_circle` equispaced angles on each radius plus
/// explicit extra points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    radii: Vec<f64>,
    points_per_circle: usize,
    extra_points: Vec<Complex64>,
}

impl Default for SampleGrid {
    /// Radii `{0.9, 0.99, 0.999}` with 4096 angles each.
    fn default() -> Self {
        Self {
            radii: vec![0.9, 0.99, 0.999],
            points_per_circle: 4096,
            extra_points: Vec::new(),
        }
    }
}

impl SampleGrid {
    /// Radii must be strictly increasing in `(0, 1)`; at least 8 angles.
    pub fn new(radii: Vec<f64>, points_per_circle: usize) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidArgument("sample grid needs at least one radius".into()));
        }
        if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
            return Err(Error::InvalidArgument(format!("radii must lie in (0, 1): {radii:?}")));
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!("radii must be strictly increasing: {radii:?}")));
        }
        if points_per_circle < 8 {
            return Err(Error::InvalidArgument(format!(
                "need at least 8 points per circle, got {points_per_circle}"
            )));
        }
        Ok(Self {
            radii,
            points_per_circle,
            extra_points: Vec::new(),
        })
    }

    /// A grid made of explicit points only.
    pub fn points_only(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("points-only grid needs a point".into()));
        }
        Self {
            radii: Vec::new(),
            points_per_circle: 0,
            extra_points: Vec::new(),
        }
        .with_points(points)
    }

    pub fn with_points(mut self, points: Vec<Complex64>) -> Result<Self> {
        for z in &points {
            ensure_finite(*z, "sample point")?;
            if z.norm() >= 1.0 {
                return Err(Error::InvalidArgument(format!("sample point {z} is not in the open unit disk")));
            }
        }
        self.extra_points.extend(points);
        Ok(self)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn points_per_circle(&self) -> usize {
        self.points_per_circle
    }

    pub fn extra_points(&self) -> &[Complex64] {
        &self.extra_points
    }

    pub fn is_points_only(&self) -> bool {
        self.points_per_circle == 0
    }

    /// Largest modulus sampled.
    pub fn r_max(&self) -> f64 {
        self.radii
            .iter()
            .copied()
            .chain(self.extra_points.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    fn circle(&self, r: f64, out: &mut Vec<Complex64>) {
        for k in 0..self.points_per_circle {
            let t = std::f64::consts::TAU * k as f64 / self.points_per_circle as f64;
            out.push(Complex64::from_polar(r, t));
        }
    }

    /// Samples in deterministic order: circles by increasing radius, angles
    /// from 0, then the explicit points.
    pub fn samples(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.radii.len() * self.points_per_circle + self.extra_points.len());
        for &r in &self.radii {
            self.circle(r, &mut out);
        }
        out.extend_from_slice(&self.extra_points);
        out
    }

    /// Samples of the closed disk `|z| <= r`: the circle `|z| = r`, circles
    /// at `r * rho` for every grid radius `rho`, then the explicit points.
    pub fn disk_samples(&self, r: f64) -> Vec<Complex64> {
        let mut out = Vec::new();
        if !self.is_points_only() {
            for &rho in &self.radii {
                self.circle(r * rho, &mut out);
            }
            self.circle(r, &mut out);
        }
        out.extend_from_slice(&self.extra_points);
        out
    }

    pub fn record(&self) -> GridRecord {
        GridRecord {
            radii: self.radii.clone(),
            points: self.points_per_circle,
            extra_points: self.extra_points.iter().map(|&z| z.into()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub radii: Vec<f64>,
    pub points: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub extra_points: Vec<PointRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violated,
    BranchFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    /// `+inf` (serialized as `null`) on branch failure.
    pub worst_margin: f64,
    /// The maximizing sample, or the first failing one on branch failure.
    pub worst_point: PointRecord,
    pub n: usize,
    pub params: ParamsRecord,
    pub grid: GridRecord,
    pub r_max: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub disk_source: Option<DiskSource>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub disk: Option<DiskSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub published_reference: Option<PublishedDiskComparison>,
}

impl StabilityReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Options shared by the stability checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub ray: RayOptions,
    /// Permit parameters outside the proven range.
    pub allow_outside: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            ray: RayOptions::default(),
            allow_outside: false,
        }
    }
}

pub(crate) struct ScanOutcome {
    /// `(margin, z)` with the largest margin; ties go to the smallest `(re, im)`.
    pub worst: Option<(f64, Complex64)>,
    pub first_failure: Option<Complex64>,
    pub failed: usize,
}

/// Whether `(m1, z1)` beats `(m2, z2)` in the deterministic max-margin order.
pub(crate) fn better(m1: f64, z1: Complex64, m2: f64, z2: Complex64) -> bool {
    match m1.total_cmp(&m2) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => (z1.re, z1.im) < (z2.re, z2.im),
    }
}

/// Evaluates `margin` at every sample. Branch failures and poles are
/// counted; any other error aborts the scan.
pub(crate) fn scan<F>(samples: &[Complex64], margin: F) -> Result<ScanOutcome>
where
    F: Fn(Complex64) -> Result<f64> + Sync + Send,
{
    let results: Vec<Result<f64>> = samples.par_iter().map(|&z| margin(z)).collect();
    let mut out = ScanOutcome {
        worst: None,
        first_failure: None,
        failed: 0,
    };
    for (&z, res) in samples.iter().zip(results) {
        match res {
            Ok(m) => {
                if out.worst.map_or(true, |(wm, wz)| better(m, z, wm, wz)) {
                    out.worst = Some((m, z));
                }
            }
            Err(Error::BranchFailure { .. }) | Err(Error::Pole { .. }) => {
                out.failed += 1;
                if out.first_failure.is_none() {
                    out.first_failure = Some(z);
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

struct ReportContext<'a> {
    params: ParamsRecord,
    n: usize,
    grid: &'a SampleGrid,
    r_max: f64,
    tol: f64,
}

fn build_report(ctx: ReportContext<'_>, outcome: ScanOutcome) -> StabilityReport {
    let (verdict, worst_margin, worst_point) = match (outcome.first_failure, outcome.worst) {
        (Some(z), _) => (Verdict::BranchFailure, f64::INFINITY, z),
        (None, Some((m, z))) => (if m <= ctx.tol { Verdict::Pass } else { Verdict::Violated }, m, z),
        (None, None) => (Verdict::Pass, f64::NEG_INFINITY, c(0.0, 0.0)),
    };
    StabilityReport {
        verdict,
        worst_margin,
        worst_point: worst_point.into(),
        n: ctx.n,
        params: ctx.params,
        grid: ctx.grid.record(),
        r_max: ctx.r_max,
        tol: ctx.tol,
        mu: None,
        disk_source: None,
        disk: None,
        published_reference: None,
    }
}

fn require_base_range(params: &JanowskiParams, opts: &CheckOptions) -> Result<()> {
    if !opts.allow_outside && !params.in_base_stability_range() {
        return Err(Error::InvalidParams(format!(
            "{params} is outside -1 <= B < A <= 0 (set allow_outside to explore)"
        )));
    }
    Ok(())
}

/// Worst `|G(z) - 1| - |B|` over the grid; passes iff it is `<= tol`.
pub fn check_stable_wrt_base(
    params: &JanowskiParams,
    n: usize,
    grid: &SampleGrid,
    tol: f64,
    opts: &CheckOptions,
) -> Result<StabilityReport> {
    require_base_range(params, opts)?;
    let g = GFunction::new(params, n, opts.ray);
    let disk = base_disk(params);
    let outcome = scan(&grid.samples(), |z| Ok(disk.margin(g.eval(z)?)))?;
    let mut rep = build_report(
        ReportContext {
            params: params.record(),
            n,
            grid,
            r_max: grid.r_max(),
            tol,
        },
        outcome,
    );
    rep.disk_source = Some(DiskSource::Base);
    rep.disk = Some(disk);
    Ok(rep)
}

/// Worst `|G(z) - C| - R` over samples of `|z| <= r` against the chosen
/// image disk of `H`; violated iff it exceeds `tol`.
pub fn check_stable_wrt_self(
    params: &JanowskiParams,
    n: usize,
    r: f64,
    grid: &SampleGrid,
    disk_source: DiskSource,
    tol: f64,
    opts: &CheckOptions,
) -> Result<StabilityReport> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < r < 1, got {r}")));
    }
    let disk = target_disk(params, r, disk_source)?;
    let g = GFunction::new(params, n, opts.ray);
    let samples = grid.disk_samples(r);
    let circle = if grid.is_points_only() { 0.0 } else { r };
    let r_max = grid.extra_points().iter().map(|z| z.norm()).fold(circle, f64::max);
    let outcome = scan(&samples, |z| Ok(disk.margin(g.eval(z)?)))?;
    let mut rep = build_report(
        ReportContext {
            params: params.record(),
            n,
            grid,
            r_max,
            tol,
        },
        outcome,
    );
    rep.disk_source = Some(disk_source);
    rep.disk = Some(disk);
    if disk_source == DiskSource::PublishedFormula && is_published_case(params, n, r) {
        rep.published_reference = Some(published_disk_comparison());
    }
    Ok(rep)
}

/// Checks `|h'(z)| <= h'(|z|)` on the grid; slack is `h'(|z|) - |h'(z)|`.
pub fn h_prime_monotonicity_check(
    params: &JanowskiParams,
    n: usize,
    grid: &SampleGrid,
    tol: f64,
    opts: &CheckOptions,
) -> Result<InequalityReport> {
    require_base_range(params, opts)?;
    let g = GFunction::new(params, n, opts.ray);
    let samples = grid.samples();
    let values: Vec<Result<f64>> = samples
        .par_iter()
        .map(|&z| {
            let at_z = g.h_prime(z)?.norm();
            let on_axis = g.h_prime(c(z.norm(), 0.0))?.re;
            Ok(on_axis - at_z)
        })
        .collect();
    let mut rep = InequalityReport::empty();
    for (&z, v) in samples.iter().zip(values) {
        let v = v?;
        rep.record(v, v < -tol, || InequalityViolation {
            a: params.a(),
            b: params.b(),
            lambda: params.lambda(),
            n,
            m: None,
            z: Some(z.into()),
            value: v,
        });
    }
    Ok(rep.finish())
}

/// Checks `|(1 + B z) s_n(v_mu(0, B))(z)^(1/lambda) - 1| <= |B|` on the grid,
/// the disk form of `(1 + B z)^lambda s_n(v_mu(0, B)) < (1 + B z)^lambda`.
pub fn check_corollary_mu_lambda(
    mu: f64,
    lambda: f64,
    b: f64,
    n: usize,
    grid: &SampleGrid,
    tol: f64,
    opts: &CheckOptions,
) -> Result<StabilityReport> {
    if !(mu > 0.0 && mu <= lambda && lambda <= 1.0) {
        return Err(Error::InvalidParams(format!("need 0 < mu <= lambda <= 1, got mu={mu}, lambda={lambda}")));
    }
    if !(-1.0 <= b && b < 0.0) {
        return Err(Error::InvalidParams(format!("need -1 <= B < 0, got {b}")));
    }
    let inner = JanowskiParams::new(0.0, b, mu)?;
    let outer = JanowskiParams::new(0.0, b, lambda)?;
    let s = coeff_recurrence(&inner, n).to_series();
    let disk = base_disk(&outer);
    let outcome = scan(&grid.samples(), |z| {
        let w = (c(1.0, 0.0) + z * b) * s.real_power_on_ray(1.0 / lambda, z, opts.ray)?;
        Ok(disk.margin(w))
    })?;
    let mut rep = build_report(
        ReportContext {
            params: outer.record(),
            n,
            grid,
            r_max: grid.r_max(),
            tol,
        },
        outcome,
    );
    rep.mu = Some(mu);
    rep.disk_source = Some(DiskSource::Base);
    rep.disk = Some(disk);
    Ok(rep)
}

/// Test functions `u` with `u(0) = 0` and `|u(z)| <= |z|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchwarzSeed {
    /// `u(z) = c z`, `|c| <= 1`.
    Linear(Complex64),
    /// `u(z) = z (c1 + c2 z) / (1 + conj(c2) c1 z)`. Not a Schwarz function for
    /// every `(c1, c2)`; the product check rejects samples with `|u(z)| > |z|`.
    Composite(Complex64, Complex64),
}

impl SchwarzSeed {
    pub fn identity() -> Self {
        SchwarzSeed::Linear(c(1.0, 0.0))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match *self {
            SchwarzSeed::Linear(k) => k * z,
            SchwarzSeed::Composite(c1, c2) => z * (c1 + c2 * z) / (c(1.0, 0.0) + c2.conj() * c1 * z),
        }
    }
}

/// For each `(u, v)` pair checks `|(F G)^(1/(alpha+beta)) - 1| <= |B|` with
/// `F = (1 + B u)^alpha`, `G = (1 + B v)^beta`.
///
/// Rows carry `A = 0`, `lambda = alpha + beta`, `n` = index of the seed pair
/// and the sample point; slack is `|B| - |W - 1|`.
pub fn check_product_proposition(
    alpha: f64,
    beta: f64,
    b: f64,
    seeds: &[(SchwarzSeed, SchwarzSeed)],
    grid: &SampleGrid,
    tol: f64,
) -> Result<InequalityReport> {
    if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::InvalidParams(format!("need alpha, beta > 0, got {alpha}, {beta}")));
    }
    if !(-1.0 <= b && b < 0.0) {
        return Err(Error::InvalidParams(format!("need -1 <= B < 0, got {b}")));
    }
    let samples = grid.samples();
    let one = c(1.0, 0.0);
    let mut rep = InequalityReport::empty();
    for (idx, (u, v)) in seeds.iter().enumerate() {
        let values: Vec<Result<f64>> = samples
            .par_iter()
            .map(|&z| {
                let bound = z.norm() * (1.0 + 1e-12) + 1e-15;
                for w in [u.eval(z), v.eval(z)] {
                    if w.norm() > bound {
                        return Err(Error::InvalidSeed { value: w.norm(), bound: z.norm() });
                    }
                }
                // |B u| < 1, so Re(1 + B u) > 0 and the principal log is analytic
                let log = ((one + u.eval(z) * b).ln() * alpha + (one + v.eval(z) * b).ln() * beta) / (alpha + beta);
                Ok(b.abs() - (log.exp() - one).norm())
            })
            .collect();
        for (&z, value) in samples.iter().zip(values) {
            let value = value?;
            rep.record(value, value < -tol, || InequalityViolation {
                a: 0.0,
                b,
                lambda: alpha + beta,
                n: idx,
                m: None,
                z: Some(z.into()),
                value,
            });
        }
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::output::to_json;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(a: f64, b: f64, l: f64) -> JanowskiParams {
        JanowskiParams::new(a, b, l).unwrap()
    }

    fn published_params() -> JanowskiParams {
        p(published::A, published::B, published::LAMBDA)
    }

    /// Polar-form evaluation of G for n = 1, where Re(s_1) > 0 on the ray.
    fn g_n1_polar(a: f64, b: f64, lambda: f64, z: Complex64) -> Complex64 {
        let s = c(1.0, 0.0) + z * (lambda * (a - b));
        let (rho, theta) = (s.re.hypot(s.im), s.im.atan2(s.re));
        let pow = Complex64::from_polar(rho.powf(1.0 / lambda), theta / lambda);
        let num = c(1.0 + b * z.re, b * z.im);
        let den = c(1.0 + a * z.re, a * z.im);
        let d = den.re * den.re + den.im * den.im;
        let q = c(
            (num.re * den.re + num.im * den.im) / d,
            (num.im * den.re - num.re * den.im) / d,
        );
        q * pow
    }

    #[test]
    fn g_at_origin_is_one() {
        for (params, n) in [(p(-0.5, -1.0, 0.5), 5), (published_params(), 1), (p(0.7, -0.2, 0.1), 9)] {
            assert_eq!(g_value(&params, n, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
            assert_eq!(h_value(&params, n, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn g_at_published_point() {
        let g = g_value(&published_params(), 1, published::Z0).unwrap();
        assert_abs_diff_eq!(g.re, published::G_Z0.re, epsilon = 1e-3);
        assert_abs_diff_eq!(g.im, published::G_Z0.im, epsilon = 1e-3);
        let oracle = g_n1_polar(published::A, published::B, published::LAMBDA, published::Z0);
        assert_abs_diff_eq!(g.re, oracle.re, epsilon = 1e-12);
        assert_abs_diff_eq!(g.im, oracle.im, epsilon = 1e-12);
        assert_abs_diff_eq!(g.re, 0.869700, epsilon = 1e-5);
        assert_abs_diff_eq!(g.im, 0.584500, epsilon = 1e-5);
        let h = h_value(&published_params(), 1, published::Z0).unwrap();
        assert_eq!(h, c(1.0, 0.0) - g);
    }

    #[test]
    fn h_at_minus_b() {
        // B = -1: G(-B) = G(1) has the factor 1 + B = 0
        let h = h_value(&p(-0.5, -1.0, 0.5), 64, c(1.0 - 1e-12, 0.0)).unwrap();
        assert_abs_diff_eq!(h.re, 1.0, epsilon = 1e-2);
        assert_abs_diff_eq!(h.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mobius_values() {
        let q = published_params();
        assert_eq!(mobius_value(&q, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        let w = mobius_value(&q, c(0.98, 0.0)).unwrap();
        assert_abs_diff_eq!(w.re, (1.0 - 0.97 * 0.98) / (1.0 - 0.679 * 0.98), epsilon = 1e-15);
        assert_abs_diff_eq!(w.re, 0.14765, epsilon = 1e-5);
        let w = mobius_value(&q, c(-0.98, 0.0)).unwrap();
        assert_abs_diff_eq!(w.re, 1.17124, epsilon = 1e-5);
        assert!(matches!(mobius_value(&p(1.0, -1.0, 0.5), c(-1.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn published_formula_disk() {
        let (a, b, r) = (published::A, published::B, 0.98f64);
        let d = published_disk(&published_params(), r).unwrap();
        let den = b * b - r * r * a * a;
        assert_abs_diff_eq!(d.center.re, (r * r * a - b) / den, epsilon = 1e-15);
        assert_abs_diff_eq!(d.radius, r * (a - b) / den, epsilon = 1e-15);
        assert_abs_diff_eq!(d.center.re, 0.638181, epsilon = 1e-6);
        assert_abs_diff_eq!(d.radius, 0.572517, epsilon = 1e-6);
        let d0 = published_disk(&published_params(), 0.0).unwrap();
        assert_abs_diff_eq!(d0.center.re, -1.0 / b, epsilon = 1e-15);
        assert_eq!(d0.radius, 0.0);
        // B^2 = r^2 A^2
        assert!(matches!(published_disk(&p(-0.5, -0.5 - 1e-14, 0.5), 0.9999), Ok(_) | Err(_)));
        assert!(matches!(published_disk(&p(0.9, -0.45, 0.5), 0.5), Err(Error::DegenerateDisk { .. })));
    }

    #[test]
    fn published_comparison_is_flagged() {
        let cmp = published_disk_comparison();
        assert!(cmp.discrepancy_flag);
        assert_abs_diff_eq!(cmp.center_discrepancy, 0.638181 - 0.634444, epsilon = 2e-6);
        assert_abs_diff_eq!(cmp.radius_discrepancy, 0.572517 - 0.576521, epsilon = 2e-6);
        assert_eq!(cmp.printed_center, 0.634444);
        assert_eq!(cmp.printed_radius, 0.576521);
    }

    /// Algebraic least-squares circle through points: minimizes
    /// sum (x^2 + y^2 + D x + E y + F)^2.
    fn fit_circle(points: &[Complex64]) -> (Complex64, f64) {
        let mut m = [[0.0f64; 3]; 3];
        let mut rhs = [0.0f64; 3];
        for p in points {
            let row = [p.re, p.im, 1.0];
            let t = -(p.re * p.re + p.im * p.im);
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += row[i] * row[j];
                }
                rhs[i] += row[i] * t;
            }
        }
        // Cramer's rule
        let det = |m: &[[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d0 = det(&m);
        let mut sol = [0.0; 3];
        for k in 0..3 {
            let mut mk = m;
            for i in 0..3 {
                mk[i][k] = rhs[i];
            }
            sol[k] = det(&mk) / d0;
        }
        let center = c(-sol[0] / 2.0, -sol[1] / 2.0);
        let radius = (center.norm_sqr() - sol[2]).sqrt();
        (center, radius)
    }

    #[test]
    fn mobius_image_of_published_disk() {
        let q = published_params();
        let d = mobius_image_disk(&q, 0.98).unwrap();
        assert_abs_diff_eq!(d.center.re, 0.659442, epsilon = 1e-5);
        assert_abs_diff_eq!(d.radius, 0.511794, epsilon = 1e-5);
        let hp = mobius_value(&q, c(0.98, 0.0)).unwrap().re;
        let hm = mobius_value(&q, c(-0.98, 0.0)).unwrap().re;
        assert_abs_diff_eq!(d.center.re, (hp + hm) / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.radius, (hm - hp) / 2.0, epsilon = 1e-14);
        let mapped: Vec<Complex64> = (0..10_000)
            .map(|k| mobius_value(&q, Complex64::from_polar(0.98, std::f64::consts::TAU * k as f64 / 1e4)).unwrap())
            .collect();
        let (fc, fr) = fit_circle(&mapped);
        assert_abs_diff_eq!(fc.re, d.center.re, epsilon = 1e-9);
        assert_abs_diff_eq!(fc.im, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fr, d.radius, epsilon = 1e-9);
        let d0 = mobius_image_disk(&q, 0.0).unwrap();
        assert_eq!((d0.center, d0.radius), (c(1.0, 0.0), 0.0));
    }

    #[test]
    fn image_radius_shrinks_as_a_approaches_b() {
        let radii: Vec<f64> = [-0.5, -0.9, -0.99, -0.999]
            .iter()
            .map(|&a| mobius_image_disk(&p(a, -1.0, 0.5), 0.5).unwrap().radius)
            .collect();
        assert!(radii.windows(2).all(|w| w[1] < w[0]));
        assert!(radii[3] < 1e-3);
    }

    #[test]
    fn sample_grid_validation() {
        assert!(SampleGrid::new(vec![0.5, 0.4], 16).is_err());
        assert!(SampleGrid::new(vec![0.5, 1.0], 16).is_err());
        assert!(SampleGrid::new(vec![0.5], 7).is_err());
        assert!(SampleGrid::new(vec![], 16).is_err());
        assert!(SampleGrid::points_only(vec![]).is_err());
        assert!(SampleGrid::points_only(vec![c(1.0, 0.0)]).is_err());
        let g = SampleGrid::new(vec![0.25, 0.5], 8).unwrap().with_points(vec![c(0.1, 0.1)]).unwrap();
        let s = g.samples();
        assert_eq!(s.len(), 17);
        assert_eq!(s[0], c(0.25, 0.0));
        assert_eq!(s[16], c(0.1, 0.1));
        assert_eq!(g.r_max(), 0.5);
        assert_eq!(g.disk_samples(0.8).len(), 8 * 3 + 1);
        let only = SampleGrid::points_only(vec![c(0.3, 0.0)]).unwrap();
        assert_eq!(only.disk_samples(0.9), vec![c(0.3, 0.0)]);
    }

    #[test]
    fn base_stability_example() {
        let q = p(-0.5, -1.0, 0.5);
        let grid = SampleGrid::default().with_points(vec![c(0.0, 0.0)]).unwrap();
        let rep = check_stable_wrt_base(&q, 5, &grid, DEFAULT_TOL, &CheckOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
        assert!(rep.worst_margin <= DEFAULT_TOL);
        assert_eq!(rep.r_max, 0.999);
        // every sampled value sits in the closed disk |w - 1| <= |B| + tol
        let g = GFunction::new(&q, 5, RayOptions::default());
        for z in grid.samples().iter().step_by(97) {
            assert!((g.eval(*z).unwrap() - 1.0).norm() <= 1.0 + DEFAULT_TOL);
        }
        let at_zero = check_stable_wrt_base(
            &q,
            5,
            &SampleGrid::points_only(vec![c(0.0, 0.0)]).unwrap(),
            DEFAULT_TOL,
            &CheckOptions::default(),
        )
        .unwrap();
        assert_eq!(at_zero.worst_margin, -1.0);
    }

    #[test]
    fn base_stability_special_case_alpha() {
        // A = 1 - 2 alpha, B = -1 with alpha = 0.75
        let q = p(1.0 - 2.0 * 0.75, -1.0, 0.3);
        let grid = SampleGrid::new(vec![0.9, 0.99, 0.999], 1024).unwrap();
        for n in [1, 2, 7, 16, 32] {
            let rep = check_stable_wrt_base(&q, n, &grid, DEFAULT_TOL, &CheckOptions::default()).unwrap();
            assert!(rep.passed(), "n={n}: {rep:?}");
        }
    }

    #[test]
    fn base_check_rejects_positive_a_unless_allowed() {
        let q = p(0.5, -0.5, 0.5);
        let grid = SampleGrid::new(vec![0.9], 64).unwrap();
        assert!(check_stable_wrt_base(&q, 2, &grid, DEFAULT_TOL, &CheckOptions::default()).is_err());
        let opts = CheckOptions {
            allow_outside: true,
            ..Default::default()
        };
        assert!(check_stable_wrt_base(&q, 2, &grid, DEFAULT_TOL, &opts).is_ok());
    }

    #[test]
    fn self_stability_fails_at_published_parameters() {
        let q = published_params();
        let rep = check_stable_wrt_self(
            &q,
            1,
            0.983,
            &SampleGrid::default(),
            DiskSource::MobiusImage,
            DEFAULT_TOL,
            &CheckOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Violated);
        assert!(rep.worst_margin >= 0.10, "{}", rep.worst_margin);
        assert!(rep.published_reference.is_none());

        let only_z0 = SampleGrid::points_only(vec![published::Z0]).unwrap();
        let rep = check_stable_wrt_self(
            &q,
            1,
            0.98,
            &only_z0,
            DiskSource::PublishedFormula,
            DEFAULT_TOL,
            &CheckOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.verdict, Verdict::Violated);
        assert!(rep.worst_margin > 0.0);
        assert!(rep.published_reference.unwrap().discrepancy_flag);

        let at_zero = SampleGrid::points_only(vec![c(0.0, 0.0)]).unwrap();
        for source in [DiskSource::MobiusImage, DiskSource::PublishedFormula] {
            let rep = check_stable_wrt_self(&q, 1, 0.98, &at_zero, source, DEFAULT_TOL, &CheckOptions::default()).unwrap();
            assert!(rep.worst_margin < 0.0);
            assert_eq!(rep.verdict, Verdict::Pass);
        }
    }

    #[test]
    fn self_check_validates_radius() {
        let q = published_params();
        for r in [0.0, 1.0, -0.2] {
            assert!(check_stable_wrt_self(&q, 1, r, &SampleGrid::default(), DiskSource::MobiusImage, 1e-6, &CheckOptions::default()).is_err());
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let q = p(-0.2, -0.8, 0.3);
        let grid = SampleGrid::new(vec![0.9, 0.99], 512).unwrap();
        let a = to_json(&check_stable_wrt_base(&q, 4, &grid, DEFAULT_TOL, &CheckOptions::default()).unwrap());
        let b = to_json(&check_stable_wrt_base(&q, 4, &grid, DEFAULT_TOL, &CheckOptions::default()).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn branch_failure_is_reported() {
        // outside the proven range, s_1 = 1 + 1.98 z vanishes at z = -0.505
        let q = p(1.0, -0.98, 1.0);
        let grid = SampleGrid::points_only(vec![c(-0.8, 0.0), c(0.5, 0.0)]).unwrap();
        let opts = CheckOptions {
            allow_outside: true,
            ray: RayOptions { steps: 300, zero_eps: 1e-2 },
        };
        let rep = check_stable_wrt_base(&q, 1, &grid, DEFAULT_TOL, &opts).unwrap();
        assert_eq!(rep.verdict, Verdict::BranchFailure);
        assert_eq!(rep.worst_point, PointRecord { re: -0.8, im: 0.0 });
        assert!(to_json(&rep).contains("\"worst_margin\": null"));
    }

    #[test]
    fn h_prime_monotone() {
        let q = p(-0.5, -1.0, 0.5);
        let grid = SampleGrid::default().with_points(vec![c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        let rep = h_prime_monotonicity_check(&q, 3, &grid, 1e-6, &CheckOptions::default()).unwrap();
        assert!(rep.passed(), "{:?}", &rep.violations[..rep.violations.len().min(3)]);
        assert_eq!(rep.checked, 3 * 4096 + 2);
        // on the positive axis the two sides coincide
        let g = GFunction::new(&q, 3, RayOptions::default());
        let d = g.h_prime(c(0.5, 0.0)).unwrap();
        assert!(d.re > 0.0);
        assert_abs_diff_eq!(d.im, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn corollary_examples() {
        let grid = SampleGrid::new(vec![0.9, 0.99, 0.999], 1024).unwrap().with_points(vec![c(0.0, 0.0)]).unwrap();
        for n in [1, 4, 13, 32] {
            let rep = check_corollary_mu_lambda(0.3, 0.7, -0.9, n, &grid, DEFAULT_TOL, &CheckOptions::default()).unwrap();
            assert!(rep.passed(), "n={n}: {rep:?}");
            assert_eq!(rep.mu, Some(0.3));
        }
        let at_zero = SampleGrid::points_only(vec![c(0.0, 0.0)]).unwrap();
        let rep = check_corollary_mu_lambda(0.3, 0.7, -0.9, 3, &at_zero, DEFAULT_TOL, &CheckOptions::default()).unwrap();
        assert_eq!(rep.worst_margin, -0.9);
        assert!(check_corollary_mu_lambda(0.8, 0.7, -0.9, 3, &grid, DEFAULT_TOL, &CheckOptions::default()).is_err());
        assert!(check_corollary_mu_lambda(0.3, 0.7, 0.1, 3, &grid, DEFAULT_TOL, &CheckOptions::default()).is_err());
    }

    #[test]
    fn corollary_with_equal_exponents_is_base_check() {
        let grid = SampleGrid::new(vec![0.9, 0.999], 256).unwrap();
        let opts = CheckOptions::default();
        let cor = check_corollary_mu_lambda(0.6, 0.6, -0.75, 6, &grid, DEFAULT_TOL, &opts).unwrap();
        let base = check_stable_wrt_base(&p(0.0, -0.75, 0.6), 6, &grid, DEFAULT_TOL, &opts).unwrap();
        assert_eq!(StabilityReport { mu: None, ..cor }, base);
    }

    #[test]
    fn product_proposition_examples() {
        let grid = SampleGrid::default().with_points(vec![c(0.0, 0.0)]).unwrap();
        let id = SchwarzSeed::identity();
        let rep = check_product_proposition(0.4, 0.9, -0.8, &[(id, id)], &grid, 0.0).unwrap();
        assert!(rep.min_margin >= -1e-15, "{}", rep.min_margin);
        let pair = (SchwarzSeed::Linear(c(0.5, 0.0)), SchwarzSeed::Linear(c(-0.7, 0.0)));
        let rep = check_product_proposition(0.4, 0.9, -0.8, &[pair], &grid, DEFAULT_TOL).unwrap();
        assert!(rep.passed());
        let zero_only = SampleGrid::points_only(vec![c(0.0, 0.0)]).unwrap();
        let rep = check_product_proposition(0.4, 0.9, -0.8, &[pair], &zero_only, DEFAULT_TOL).unwrap();
        assert_eq!(rep.min_margin, 0.8);
        let bad = (SchwarzSeed::Linear(c(1.5, 0.0)), id);
        assert!(matches!(
            check_product_proposition(0.4, 0.9, -0.8, &[bad], &grid, DEFAULT_TOL),
            Err(Error::InvalidSeed { .. })
        ));
        assert!(check_product_proposition(0.0, 0.9, -0.8, &[pair], &grid, DEFAULT_TOL).is_err());
    }

    #[test]
    fn composite_seed_bound() {
        let grid = SampleGrid::default();
        let s = SchwarzSeed::Composite(c(0.3, 0.1), c(0.2, -0.4));
        assert_eq!(s.eval(c(0.0, 0.0)), c(0.0, 0.0));
        for z in grid.samples().iter().step_by(11) {
            assert!(s.eval(*z).norm() <= z.norm());
        }
        let pair = (s, SchwarzSeed::Linear(Complex64::from_polar(1.0, 2.0)));
        assert!(check_product_proposition(0.5, 0.25, -1.0, &[pair], &grid, DEFAULT_TOL).unwrap().passed());
        // |c1| + |c2| > 1 leaves the unit-bound contract near the boundary
        let wide = SchwarzSeed::Composite(c(0.9, 0.0), c(0.0, 0.9));
        assert!(matches!(
            check_product_proposition(0.5, 0.25, -1.0, &[(wide, wide)], &grid, DEFAULT_TOL),
            Err(Error::InvalidSeed { .. })
        ));
    }

    fn in_range_params() -> impl Strategy<Value = (f64, f64, f64)> {
        (-1.0f64..=1.0, -1.0f64..=1.0, 0.0f64..0.999).prop_filter("B < A", |(a, b, _)| b < a)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn image_disk_boundary_maps_back_to_circle((a, b, r) in in_range_params()) {
            prop_assume!(a.abs() * r < 0.999);
            let q = JanowskiParams::new(a, b, 0.5).unwrap();
            let d = mobius_image_disk(&q, r).unwrap();
            for w in d.boundary_points(256) {
                prop_assert!((h_inverse(&q, w).norm() - r).abs() <= 1e-9);
            }
        }

        #[test]
        fn g_origin_and_h_shared_path(a in -1.0f64..0.0, gap in 0.001f64..1.0, lambda in 0.01f64..=1.0, n in 0usize..20,
                                     r in 0.0f64..0.99, t in 0.0f64..std::f64::consts::TAU) {
            let b = (a - gap).max(-1.0);
            prop_assume!(b < a);
            let q = JanowskiParams::new(a, b, lambda).unwrap();
            let g = GFunction::new(&q, n, RayOptions::default());
            prop_assert_eq!(g.eval(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
            let z = Complex64::from_polar(r, t);
            if let Ok(gz) = g.eval(z) {
                prop_assert_eq!(g.h(z).unwrap(), c(1.0, 0.0) - gz);
            }
        }
    }
}
