//! The `janowski` command line.
//!
//! Exit codes: 0 pass, 1 violations found, 2 invalid input, 3 branch failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Error;
use crate::inequalities::{
    check_alternating_identity, check_coeff_inequality, check_lemma1, check_lemma2, lattice,
    scan_lemma2_statement_literal, GridSpec, InequalityReport,
};
use crate::janowski::{coefficients, CoeffMethod, JanowskiParams, ParamsRecord};
use crate::output::{csv_string, format_f64, to_json, write_atomic};
use crate::plot::{figure_data, read_csvs, render_svg, write_csvs};
use crate::search::{sweep_csv, sweep_parameter_grid, SearchGrid, SweepSpec};
use crate::series::RayOptions;
use crate::subordination::{
    check_stable_wrt_base, check_stable_wrt_self, published, CheckOptions, DiskSource, SampleGrid, StabilityReport,
    Verdict,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BRANCH: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "janowski", version, about = "Coefficients, inequality sweeps and subordination checks for ((1+Az)/(1+Bz))^lambda")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Taylor coefficients a_0..a_{n_max}.
    Coeffs(CoeffsArgs),
    /// Coefficient inequalities over a parameter lattice.
    VerifyLemmas(VerifyArgs),
    /// Stability with respect to (1+Bz)^-lambda, one report per n.
    CheckStability(StabilityArgs),
    /// Containment of G(|z| <= r) in H(|z| <= r).
    SelfCheck(SelfCheckArgs),
    /// Counterexample search over a parameter grid, CSV output.
    Search(SearchArgs),
    /// SVG figure of the disks, the G curve and G(z0).
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Convolution,
    Recurrence,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiskSourceArg {
    #[value(name = "mobius_image")]
    MobiusImage,
    #[value(name = "published_formula")]
    PublishedFormula,
}

impl From<DiskSourceArg> for DiskSource {
    fn from(d: DiskSourceArg) -> Self {
        match d {
            DiskSourceArg::MobiusImage => DiskSource::MobiusImage,
            DiskSourceArg::PublishedFormula => DiskSource::PublishedFormula,
        }
    }
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long = "A", allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long = "B", allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long)]
    pub lambda: f64,
}

/// Parameters defaulting to the published counterexample.
#[derive(Debug, Args)]
pub struct CounterexampleParams {
    #[arg(long = "A", allow_hyphen_values = true, default_value_t = published::A)]
    pub a: f64,
    #[arg(long = "B", allow_hyphen_values = true, default_value_t = published::B)]
    pub b: f64,
    #[arg(long, default_value_t = published::LAMBDA)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RayArgs {
    /// Sub-steps when continuing powers along the ray from 0.
    #[arg(long, default_value_t = crate::series::DEFAULT_RAY_STEPS)]
    pub ray_steps: usize,
}

impl RayArgs {
    fn options(&self) -> Result<RayOptions, Error> {
        if self.ray_steps == 0 {
            return Err(Error::InvalidArgument("--ray-steps must be >= 1".into()));
        }
        Ok(RayOptions {
            steps: self.ray_steps,
            ..RayOptions::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Recurrence)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check a single point instead of the lattice (needs --B and --lambda).
    #[arg(long = "A", allow_hyphen_values = true, requires_all = ["b", "lambda"])]
    pub a: Option<f64>,
    #[arg(long = "B", allow_hyphen_values = true, requires = "a")]
    pub b: Option<f64>,
    #[arg(long, requires = "a")]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
    pub a_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub a_max: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -1.0)]
    pub b_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub b_max: f64,
    /// Lattice step for A and B.
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long, default_value_t = 0.05)]
    pub lambda_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub lambda_step: f64,
    #[arg(long, default_value_t = 500)]
    pub n_max: usize,
    /// Bound on m and n for the two-index inequality.
    #[arg(long, default_value_t = 100)]
    pub lemma2_max: usize,
    #[arg(long, default_value_t = 100)]
    pub alt_n_max: usize,
    #[arg(long, default_value_t = crate::inequalities::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub lemma2_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub alt_tol: f64,
    /// Permit A > 0.
    #[arg(long)]
    pub allow_outside: bool,
    /// Also scan the two-index inequality with B^(n+1-k) taken literally.
    #[arg(long)]
    pub lemma2_literal: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.9, 0.99, 0.999])]
    pub radii: Vec<f64>,
    /// Angles per circle.
    #[arg(long, default_value_t = 4096)]
    pub samples: usize,
    /// Extra sample point `re,im`; repeatable.
    #[arg(long = "point", value_parser = parse_point, allow_hyphen_values = true)]
    pub points: Vec<Complex64>,
    /// Sample only the --point values.
    #[arg(long, requires = "points")]
    pub points_only: bool,
}

impl SampleArgs {
    fn grid(&self) -> Result<SampleGrid, Error> {
        if self.points_only {
            SampleGrid::points_only(self.points.clone())
        } else {
            SampleGrid::new(self.radii.clone(), self.samples)?.with_points(self.points.clone())
        }
    }
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    #[command(flatten)]
    pub sampling: SampleArgs,
    #[arg(long, default_value_t = crate::subordination::DEFAULT_TOL)]
    pub tol: f64,
    /// Permit A > 0.
    #[arg(long)]
    pub allow_outside: bool,
    #[command(flatten)]
    pub ray: RayArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SelfCheckArgs {
    #[command(flatten)]
    pub params: CounterexampleParams,
    #[arg(long, default_value_t = published::N)]
    pub n: usize,
    #[arg(long, default_value_t = 0.983)]
    pub r: f64,
    #[arg(long, value_enum, default_value_t = DiskSourceArg::MobiusImage)]
    pub disk_source: DiskSourceArg,
    #[command(flatten)]
    pub sampling: SampleArgs,
    #[arg(long, default_value_t = crate::subordination::DEFAULT_TOL)]
    pub tol: f64,
    #[command(flatten)]
    pub ray: RayArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long = "A", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [published::A])]
    pub a_values: Vec<f64>,
    #[arg(long = "B", value_delimiter = ',', allow_hyphen_values = true, default_values_t = [published::B])]
    pub b_values: Vec<f64>,
    #[arg(long = "lambda", value_delimiter = ',', default_values_t = [published::LAMBDA])]
    pub lambda_values: Vec<f64>,
    #[arg(long = "n", value_delimiter = ',', default_values_t = [published::N])]
    pub n_values: Vec<usize>,
    #[arg(long, default_value_t = 0.983)]
    pub r: f64,
    #[arg(long, default_value_t = 64)]
    pub coarse_radii: usize,
    #[arg(long, default_value_t = 256)]
    pub coarse_angles: usize,
    #[arg(long, default_value_t = 40)]
    pub refine_iters: usize,
    #[arg(long, value_enum, default_value_t = DiskSourceArg::MobiusImage)]
    pub disk_source: DiskSourceArg,
    /// Permit A >= 0.
    #[arg(long)]
    pub allow_outside: bool,
    #[command(flatten)]
    pub ray: RayArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub params: CounterexampleParams,
    #[arg(long, default_value_t = published::N)]
    pub n: usize,
    #[arg(long, default_value_t = published::R0)]
    pub r: f64,
    /// Marked point `re,im`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0.915282,-0.357037")]
    pub z0: Complex64,
    #[arg(long, default_value_t = crate::plot::MIN_CURVE_POINTS)]
    pub curve_points: usize,
    /// SVG output file.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the point sets as CSV into this directory.
    #[arg(long)]
    pub csv_dir: Option<PathBuf>,
    /// Render from CSV files written by --csv-dir instead of computing.
    #[arg(long, conflicts_with = "csv_dir")]
    pub from_csv: Option<PathBuf>,
    #[command(flatten)]
    pub ray: RayArgs,
}

fn parse_point(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected `re,im`, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}"));
    let z = Complex64::new(parse(re)?, parse(im)?);
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("point `{s}` is not finite"));
    }
    Ok(z)
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(PathBuf, std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(Error::BranchFailure { .. } | Error::Pole { .. } | Error::TooManyFailures { .. }) => EXIT_BRANCH,
            _ => EXIT_INVALID,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Lib(Error::InvalidArgument(msg.into()))
}

fn params(a: f64, b: f64, lambda: f64) -> Result<JanowskiParams, CliError> {
    Ok(JanowskiParams::new(a, b, lambda)?)
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, body.as_bytes()).map_err(|e| CliError::Io(path.to_path_buf(), e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(PathBuf::from("<stdout>"), e))
        }
    }
}

fn check_tol(tol: f64, flag: &str) -> Result<(), CliError> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(invalid(format!("{flag} must be finite and >= 0, got {tol}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct CoeffsJson<'a> {
    params: ParamsRecord,
    method: &'a str,
    n_max: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficients: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    convolution: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    recurrence: Option<&'a [f64]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_abs_diff: Option<f64>,
}

pub fn cmd_coeffs(args: &CoeffsArgs) -> Result<i32, CliError> {
    let p = params(args.params.a, args.params.b, args.params.lambda)?;
    let n_max = args.n_max;
    let body = match args.method {
        MethodArg::Convolution | MethodArg::Recurrence => {
            let method = if args.method == MethodArg::Convolution {
                CoeffMethod::Convolution
            } else {
                CoeffMethod::Recurrence
            };
            let seq = coefficients(&p, n_max, method);
            match args.format {
                FormatArg::Csv => csv_string(
                    &["n", "a_n"],
                    seq.values().iter().enumerate().map(|(n, a)| vec![n.to_string(), format_f64(*a)]),
                ),
                FormatArg::Json => to_json(&CoeffsJson {
                    params: p.record(),
                    method: &method.to_string(),
                    n_max,
                    coefficients: Some(seq.values()),
                    convolution: None,
                    recurrence: None,
                    max_abs_diff: None,
                }),
            }
        }
        MethodArg::Both => {
            let conv = coefficients(&p, n_max, CoeffMethod::Convolution);
            let rec = coefficients(&p, n_max, CoeffMethod::Recurrence);
            let diffs: Vec<f64> = conv.values().iter().zip(rec.values()).map(|(x, y)| (x - y).abs()).collect();
            match args.format {
                FormatArg::Csv => csv_string(
                    &["n", "convolution", "recurrence", "abs_diff"],
                    (0..=n_max).map(|n| {
                        vec![
                            n.to_string(),
                            format_f64(conv.values()[n]),
                            format_f64(rec.values()[n]),
                            format_f64(diffs[n]),
                        ]
                    }),
                ),
                FormatArg::Json => to_json(&CoeffsJson {
                    params: p.record(),
                    method: "both",
                    n_max,
                    coefficients: None,
                    convolution: Some(conv.values()),
                    recurrence: Some(rec.values()),
                    max_abs_diff: Some(diffs.iter().copied().fold(0.0, f64::max)),
                }),
            }
        }
    };
    emit(args.out.out.as_deref(), &body)?;
    Ok(EXIT_PASS)
}

#[derive(Serialize)]
struct Tolerances {
    lemma1: f64,
    coeff_inequality: f64,
    lemma2: f64,
    alternating_identity: f64,
}

#[derive(Serialize)]
struct VerifyJson {
    passed: bool,
    grid: GridSpec,
    alt_n_max: usize,
    tolerances: Tolerances,
    lemma1: InequalityReport,
    alternating_identity: InequalityReport,
    coeff_inequality: InequalityReport,
    lemma2: InequalityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    lemma2_statement_literal: Option<InequalityReport>,
}

fn checked_lattice(lo: f64, hi: f64, step: f64, name: &str) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite() && step > 0.0 && hi >= lo) {
        return Err(invalid(format!("{name}: need finite min <= max and step > 0")));
    }
    Ok(lattice(lo, hi, step))
}

pub fn cmd_verify_lemmas(args: &VerifyArgs) -> Result<i32, CliError> {
    for (tol, flag) in [(args.tol, "--tol"), (args.lemma2_tol, "--lemma2-tol"), (args.alt_tol, "--alt-tol")] {
        check_tol(tol, flag)?;
    }
    let mut grid = match (args.a, args.b, args.lambda) {
        (Some(a), Some(b), Some(lambda)) => {
            let p = params(a, b, lambda)?;
            GridSpec::single(&p, args.n_max, args.lemma2_max)
        }
        _ => GridSpec {
            a_values: checked_lattice(args.a_min, args.a_max, args.step, "A range")?,
            b_values: checked_lattice(args.b_min, args.b_max, args.step, "B range")?,
            lambda_values: checked_lattice(args.lambda_min, args.lambda_max, args.lambda_step, "lambda range")?,
            n_max: args.n_max,
            m_max: args.lemma2_max,
            lemma2_n_max: args.lemma2_max,
            allow_outside: args.allow_outside,
        },
    };
    grid.lemma2_n_max = args.lemma2_max;
    grid.m_max = args.lemma2_max;
    let a_top = grid.a_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if a_top > 0.0 && !args.allow_outside {
        return Err(CliError::Lib(Error::InvalidParams(format!(
            "A = {a_top} is outside A <= 0 (pass --allow-outside)"
        ))));
    }
    grid.allow_outside = args.allow_outside;
    grid.validate()?;

    let mut lambdas = grid.lambda_values.clone();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let mut alternating = InequalityReport::empty();
    for &lambda in &lambdas {
        alternating = alternating.merge(check_alternating_identity(lambda, args.alt_n_max, args.alt_tol)?);
    }
    let report = VerifyJson {
        lemma1: check_lemma1(&grid, args.tol),
        alternating_identity: alternating.finish(),
        coeff_inequality: check_coeff_inequality(&grid, args.tol),
        lemma2: check_lemma2(&grid, args.lemma2_tol),
        lemma2_statement_literal: args.lemma2_literal.then(|| scan_lemma2_statement_literal(&grid)),
        passed: false,
        alt_n_max: args.alt_n_max,
        tolerances: Tolerances {
            lemma1: args.tol,
            coeff_inequality: args.tol,
            lemma2: args.lemma2_tol,
            alternating_identity: args.alt_tol,
        },
        grid,
    };
    let passed = report.lemma1.passed()
        && report.alternating_identity.passed()
        && report.coeff_inequality.passed()
        && report.lemma2.passed();
    emit(args.out.out.as_deref(), &to_json(&VerifyJson { passed, ..report }))?;
    Ok(if passed { EXIT_PASS } else { EXIT_VIOLATION })
}

fn verdict_code<'a>(reports: impl IntoIterator<Item = &'a StabilityReport>) -> i32 {
    let mut code = EXIT_PASS;
    for r in reports {
        match r.verdict {
            Verdict::BranchFailure => return EXIT_BRANCH,
            Verdict::Violated => code = EXIT_VIOLATION,
            Verdict::Pass => {}
        }
    }
    code
}

#[derive(Serialize)]
struct StabilityJson<'a> {
    passed: bool,
    reports: &'a [StabilityReport],
}

pub fn cmd_check_stability(args: &StabilityArgs) -> Result<i32, CliError> {
    check_tol(args.tol, "--tol")?;
    if args.n_max < 1 {
        return Err(invalid("--n-max must be >= 1"));
    }
    let p = params(args.params.a, args.params.b, args.params.lambda)?;
    let grid = args.sampling.grid()?;
    let opts = CheckOptions {
        ray: args.ray.options()?,
        allow_outside: args.allow_outside,
    };
    let reports = (1..=args.n_max)
        .map(|n| check_stable_wrt_base(&p, n, &grid, args.tol, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let code = verdict_code(&reports);
    emit(
        args.out.out.as_deref(),
        &to_json(&StabilityJson {
            passed: code == EXIT_PASS,
            reports: &reports,
        }),
    )?;
    Ok(code)
}

pub fn cmd_self_check(args: &SelfCheckArgs) -> Result<i32, CliError> {
    check_tol(args.tol, "--tol")?;
    let p = params(args.params.a, args.params.b, args.params.lambda)?;
    let grid = args.sampling.grid()?;
    let opts = CheckOptions {
        ray: args.ray.options()?,
        allow_outside: true,
    };
    let report = check_stable_wrt_self(&p, args.n, args.r, &grid, args.disk_source.into(), args.tol, &opts)?;
    emit(args.out.out.as_deref(), &to_json(&report))?;
    Ok(verdict_code([&report]))
}

pub fn cmd_search(args: &SearchArgs) -> Result<i32, CliError> {
    let spec = SweepSpec {
        a_values: args.a_values.clone(),
        b_values: args.b_values.clone(),
        lambda_values: args.lambda_values.clone(),
        n_values: args.n_values.clone(),
        r: args.r,
        grid: SearchGrid {
            coarse_radii: args.coarse_radii,
            coarse_angles: args.coarse_angles,
            refine_iters: args.refine_iters,
        },
        disk_source: args.disk_source.into(),
        ray: args.ray.options()?,
        allow_outside: args.allow_outside,
    };
    let rows = sweep_parameter_grid(&spec)?;
    emit(args.out.out.as_deref(), &sweep_csv(&rows))?;
    Ok(EXIT_PASS)
}

pub fn cmd_plot(args: &PlotArgs) -> Result<i32, CliError> {
    let data = match &args.from_csv {
        Some(dir) => read_csvs(dir)?,
        None => {
            let p = params(args.params.a, args.params.b, args.params.lambda)?;
            figure_data(&p, args.n, args.r, args.z0, args.curve_points, args.ray.options()?)?
        }
    };
    if let Some(dir) = &args.csv_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.clone(), e))?;
        write_csvs(&data, dir).map_err(|e| CliError::Io(dir.clone(), e))?;
    }
    emit(Some(&args.out), &render_svg(&data))?;
    Ok(EXIT_PASS)
}

pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Coeffs(a) => cmd_coeffs(a),
        Command::VerifyLemmas(a) => cmd_verify_lemmas(a),
        Command::CheckStability(a) => cmd_check_stability(a),
        Command::SelfCheck(a) => cmd_self_check(a),
        Command::Search(a) => cmd_search(a),
        Command::Plot(a) => cmd_plot(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Errors go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_PASS };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
