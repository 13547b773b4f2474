//! Counterexample search for self-stability.
//!
//! A coarse polar grid over `|z| <= r` is scanned for the margin of `G(z)`
//! outside the target disk; the best local maxima are then refined by
//! coordinate moves in `(|z|, arg z)` with shrinking steps. Any point with
//! positive margin is a witness of non-subordination.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::janowski::{JanowskiParams, ParamsRecord};
use crate::output::{csv_string, format_f64};
use crate::series::{PointRecord, RayOptions};
use crate::subordination::{better, target_disk, DiskSource, DiskSpec, GFunction};

/// At most this many coarse local maxima are refined per cell.
pub const MAX_SEEDS: usize = 16;

/// Refined points closer than this are reported once.
const DEDUP_DIST: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchGrid {
    pub coarse_radii: usize,
    pub coarse_angles: usize,
    pub refine_iters: usize,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            coarse_radii: 64,
            coarse_angles: 256,
            refine_iters: 40,
        }
    }
}

impl SearchGrid {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_radii < 16 || self.coarse_angles < 16 {
            return Err(Error::InvalidArgument(format!(
                "coarse grid must be at least 16 x 16, got {} x {}",
                self.coarse_radii, self.coarse_angles
            )));
        }
        Ok(())
    }
}

fn validate_r(r: f64) -> Result<()> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidArgument(format!("need 0 < r < 1, got {r}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpec {
    pub params: JanowskiParams,
    pub n_values: Vec<usize>,
    pub r: f64,
    pub grid: SearchGrid,
    pub disk_source: DiskSource,
    pub ray: RayOptions,
}

impl SearchSpec {
    pub fn new(params: JanowskiParams, n_values: Vec<usize>, r: f64) -> Self {
        Self {
            params,
            n_values,
            r,
            grid: SearchGrid::default(),
            disk_source: DiskSource::MobiusImage,
            ray: RayOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_r(self.r)?;
        self.grid.validate()?;
        if self.n_values.is_empty() {
            return Err(Error::InvalidArgument("n_values is empty".into()));
        }
        Ok(())
    }
}

/// A sampled point with its margin outside the target disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub params: ParamsRecord,
    pub n: usize,
    pub r: f64,
    pub z: PointRecord,
    #[serde(rename = "G_of_z")]
    pub g_of_z: PointRecord,
    pub disk_source: DiskSource,
    pub disk: DiskSpec,
    pub margin: f64,
    /// Best margin after each refinement round.
    #[serde(skip)]
    pub refine_history: Vec<f64>,
}

impl Violation {
    /// `|G(z) - center| - radius` from the stored fields.
    pub fn stored_margin(&self) -> f64 {
        self.disk.margin(self.g_of_z.into())
    }

    /// Recomputes `G(z)` and the disk from scratch and returns the absolute
    /// difference to the stored margin.
    pub fn verify(&self, ray: RayOptions) -> Result<f64> {
        let params = JanowskiParams::new(self.params.a, self.params.b, self.params.lambda)?;
        let disk = target_disk(&params, self.r, self.disk_source)?;
        let g = GFunction::new(&params, self.n, ray).eval(self.z.into())?;
        Ok((disk.margin(g) - self.margin).abs())
    }
}

/// Result of searching one `(params, n)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    /// Best point found; its margin may be nonpositive.
    pub best: Option<Violation>,
    /// Positive-margin points, by descending margin.
    pub violations: Vec<Violation>,
    pub evaluated: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub violations: Vec<Violation>,
    pub evaluated: usize,
    pub skipped: usize,
}

struct Cell<'a> {
    params: &'a JanowskiParams,
    n: usize,
    r: f64,
    grid: SearchGrid,
    disk_source: DiskSource,
    disk: DiskSpec,
    g: GFunction,
}

impl Cell<'_> {
    fn point(&self, rho: f64, theta: f64) -> Complex64 {
        Complex64::from_polar(rho, theta)
    }

    fn margin(&self, z: Complex64) -> Result<(f64, Complex64)> {
        let g = self.g.eval(z)?;
        Ok((self.disk.margin(g), g))
    }

    fn coarse_polar(&self, idx: usize) -> (f64, f64) {
        let i = idx / self.grid.coarse_angles;
        let k = idx % self.grid.coarse_angles;
        (
            self.r * (i + 1) as f64 / self.grid.coarse_radii as f64,
            TAU * k as f64 / self.grid.coarse_angles as f64,
        )
    }

    fn violation(&self, z: Complex64, g: Complex64, margin: f64, history: Vec<f64>) -> Violation {
        Violation {
            params: self.params.record(),
            n: self.n,
            r: self.r,
            z: z.into(),
            g_of_z: g.into(),
            disk_source: self.disk_source,
            disk: self.disk,
            margin,
            refine_history: history,
        }
    }

    /// Coordinate moves from `(rho, theta)`; a round without improvement
    /// halves both steps. Returns the final point and per-round best margin.
    fn refine(&self, rho: f64, theta: f64, start: (f64, Complex64), skipped: &mut usize) -> (Complex64, Complex64, f64, Vec<f64>) {
        let (mut rho, mut theta) = (rho, theta);
        let (mut best, mut best_g) = start;
        let mut step_rho = self.r / self.grid.coarse_radii as f64;
        let mut step_theta = TAU / self.grid.coarse_angles as f64;
        let mut history = vec![best];
        for _ in 0..self.grid.refine_iters {
            let candidates = [
                ((rho + step_rho).min(self.r), theta),
                ((rho - step_rho).max(0.0), theta),
                (rho, theta + step_theta),
                (rho, theta - step_theta),
            ];
            let mut moved = None;
            for (cr, ct) in candidates {
                match self.margin(self.point(cr, ct)) {
                    Ok((m, g)) if m > best => {
                        best = m;
                        best_g = g;
                        moved = Some((cr, ct));
                    }
                    Ok(_) => {}
                    Err(_) => *skipped += 1,
                }
            }
            match moved {
                Some((cr, ct)) => {
                    rho = cr;
                    theta = ct;
                }
                None => {
                    step_rho /= 2.0;
                    step_theta /= 2.0;
                }
            }
            history.push(best);
        }
        (self.point(rho, theta), best_g, best, history)
    }

    fn run(&self) -> Result<CellOutcome> {
        let (nr, na) = (self.grid.coarse_radii, self.grid.coarse_angles);
        let total = nr * na;
        let coarse: Vec<Option<(f64, Complex64)>> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let (rho, theta) = self.coarse_polar(idx);
                match self.margin(self.point(rho, theta)) {
                    Ok(v) => Ok(Some(v)),
                    Err(Error::BranchFailure { .. }) | Err(Error::Pole { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<_>>()?;
        let mut skipped = coarse.iter().filter(|v| v.is_none()).count();
        if 2 * skipped > total {
            return Err(Error::TooManyFailures { failed: skipped, total });
        }
        let margin_at = |i: usize, k: usize| coarse[i * na + k].map(|v| v.0);
        let mut seeds: Vec<(f64, usize)> = Vec::new();
        let mut global: Option<(f64, usize)> = None;
        for idx in 0..total {
            let Some((m, _)) = coarse[idx] else { continue };
            let (i, k) = (idx / na, idx % na);
            if global.map_or(true, |(gm, _)| m > gm) {
                global = Some((m, idx));
            }
            let mut neighbours = vec![margin_at(i, (k + 1) % na), margin_at(i, (k + na - 1) % na)];
            if i > 0 {
                neighbours.push(margin_at(i - 1, k));
            }
            if i + 1 < nr {
                neighbours.push(margin_at(i + 1, k));
            }
            if m > 0.0 && neighbours.into_iter().flatten().all(|x| m >= x) {
                seeds.push((m, idx));
            }
        }
        seeds.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        seeds.truncate(MAX_SEEDS);
        if let Some(g) = global {
            if !seeds.iter().any(|s| s.1 == g.1) {
                seeds.push(g);
            }
        }

        let mut refined: Vec<Violation> = Vec::new();
        for &(_, idx) in &seeds {
            let (rho, theta) = self.coarse_polar(idx);
            let start = coarse[idx].expect("seeds are valid samples");
            let (z, g, m, history) = self.refine(rho, theta, start, &mut skipped);
            refined.push(self.violation(z, g, m, history));
        }
        refined.sort_by(|x, y| {
            let (zx, zy): (Complex64, Complex64) = (x.z.into(), y.z.into());
            if better(x.margin, zx, y.margin, zy) {
                std::cmp::Ordering::Less
            } else if better(y.margin, zy, x.margin, zx) {
                std::cmp::Ordering::Greater
            } else {
                std::cmp::Ordering::Equal
            }
        });
        let mut kept: Vec<Violation> = Vec::new();
        for v in refined {
            let z: Complex64 = v.z.into();
            if kept.iter().all(|k| (Complex64::from(k.z) - z).norm() > DEDUP_DIST) {
                kept.push(v);
            }
        }
        let best = kept.first().cloned();
        let violations = kept.into_iter().filter(|v| v.margin > 0.0).collect();
        Ok(CellOutcome {
            best,
            violations,
            evaluated: total,
            skipped,
        })
    }
}

/// Searches one `(params, n)` cell.
pub fn search_cell(
    params: &JanowskiParams,
    n: usize,
    r: f64,
    grid: SearchGrid,
    disk_source: DiskSource,
    ray: RayOptions,
) -> Result<CellOutcome> {
    validate_r(r)?;
    grid.validate()?;
    let cell = Cell {
        params,
        n,
        r,
        grid,
        disk_source,
        disk: target_disk(params, r, disk_source)?,
        g: GFunction::new(params, n, ray),
    };
    cell.run()
}

/// All positive-margin points found for every `n` in the spec, by
/// descending margin.
pub fn find_self_stability_violation(spec: &SearchSpec) -> Result<SearchOutcome> {
    spec.validate()?;
    let mut out = SearchOutcome {
        violations: Vec::new(),
        evaluated: 0,
        skipped: 0,
    };
    for &n in &spec.n_values {
        let cell = search_cell(&spec.params, n, spec.r, spec.grid, spec.disk_source, spec.ray)?;
        out.violations.extend(cell.violations);
        out.evaluated += cell.evaluated;
        out.skipped += cell.skipped;
    }
    // stable sort keeps the n order among equal margins
    out.violations.sort_by(|x, y| y.margin.total_cmp(&x.margin));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    pub lambda_values: Vec<f64>,
    pub n_values: Vec<usize>,
    pub r: f64,
    pub grid: SearchGrid,
    pub disk_source: DiskSource,
    pub ray: RayOptions,
    /// Permit `A >= 0`.
    pub allow_outside: bool,
}

impl SweepSpec {
    /// Cells in `(A, B, lambda)` order; pairs with `B >= A` are left out.
    pub fn params(&self) -> Result<Vec<JanowskiParams>> {
        let mut out = Vec::new();
        for &a in &self.a_values {
            if !self.allow_outside && a >= 0.0 {
                return Err(Error::InvalidParams(format!("sweep needs A < 0, got {a} (set allow_outside)")));
            }
            for &b in &self.b_values {
                if b >= a {
                    continue;
                }
                for &lambda in &self.lambda_values {
                    out.push(JanowskiParams::new(a, b, lambda)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: JanowskiParams,
    pub n: usize,
    pub best: Violation,
    pub skipped: usize,
}

pub const SWEEP_CSV_HEADER: [&str; 13] = [
    "A",
    "B",
    "lambda",
    "n",
    "margin",
    "z_re",
    "z_im",
    "G_re",
    "G_im",
    "disk_center_re",
    "disk_center_im",
    "disk_radius",
    "disk_source",
];

/// Best margin and witness for every `(A, B, lambda, n)` cell.
pub fn sweep_parameter_grid(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    validate_r(spec.r)?;
    spec.grid.validate()?;
    if spec.n_values.is_empty() {
        return Err(Error::InvalidArgument("n_values is empty".into()));
    }
    let cells: Vec<(JanowskiParams, usize)> = spec
        .params()?
        .into_iter()
        .flat_map(|p| spec.n_values.iter().map(move |&n| (p, n)))
        .collect();
    cells
        .par_iter()
        .map(|(p, n)| {
            let cell = search_cell(p, *n, spec.r, spec.grid, spec.disk_source, spec.ray)?;
            let best = cell.best.ok_or(Error::TooManyFailures {
                failed: cell.skipped,
                total: cell.evaluated,
            })?;
            Ok(SweepRow {
                params: *p,
                n: *n,
                best,
                skipped: cell.skipped,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    csv_string(
        &SWEEP_CSV_HEADER,
        rows.iter().map(|row| {
            let v = &row.best;
            vec![
                format_f64(row.params.a()),
                format_f64(row.params.b()),
                format_f64(row.params.lambda()),
                row.n.to_string(),
                format_f64(v.margin),
                format_f64(v.z.re),
                format_f64(v.z.im),
                format_f64(v.g_of_z.re),
                format_f64(v.g_of_z.im),
                format_f64(v.disk.center.re),
                format_f64(v.disk.center.im),
                format_f64(v.disk.radius),
                v.disk_source.to_string(),
            ]
        }),
    )
}
