//! The `opcalc` command line: reads matrices, dispatches to the calculus and
//! writes result matrices plus a versioned JSON report.

pub mod io;
mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opcalc_core::calculus::{self, CalculusOptions};
use opcalc_core::holofun::{parse_f1, parse_f2};
use opcalc_core::sylvester::{self, SteinMethod, SylvesterMethod, SylvesterProblem};
use opcalc_core::{frechet, pencil, Complex64, ComplexMatrix, EnclosureMode, ErrorCategory};
use thiserror::Error;

use crate::io::{read_matrix, write_matrix, IoError, MatrixFormat};
pub use crate::report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "opcalc", version, about = "Holomorphic functional calculus of one and two matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Quadrature acceptance tolerance.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Contour margin around spectra; chosen from the spectrum when omitted.
    #[arg(long, global = true)]
    pub margin: Option<f64>,
    #[arg(long, global = true, default_value_t = 64)]
    pub start_nodes: usize,
    #[arg(long, global = true, default_value_t = 4096)]
    pub node_cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Enclosure::Eigen)]
    pub enclosure: Enclosure,
    /// Relative residual a solver result must reach to be accepted.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub residual_tol: f64,
    /// Output file, or directory for commands with several results.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub out_format: Option<OutFormat>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Json)]
    pub report_format: ReportFormat,
    /// Include wall-clock timings in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Enclosure {
    Eigen,
    Gershgorin,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutFormat {
    Mtx,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SylvesterBackend {
    Contour,
    ExpIntegral,
    Series,
    Kron,
    SignForm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SteinBackend {
    Boxtimes,
    Kron,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Oracle {
    Kron,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// f(A).
    Funm {
        #[arg(long)]
        f: String,
        #[arg(long = "A", value_name = "PATH")]
        a: PathBuf,
    },
    /// The two-contour transformator of f(λ, μ) applied to C.
    Funm2 {
        #[arg(long)]
        f: String,
        #[arg(long = "A", value_name = "PATH")]
        a: PathBuf,
        #[arg(long = "B", value_name = "PATH")]
        b: PathBuf,
        #[arg(long = "C", value_name = "PATH")]
        c: PathBuf,
    },
    /// The single-contour transformator of f(λ) applied to C.
    Boxdot {
        #[arg(long)]
        f: String,
        #[arg(long = "A", value_name = "PATH")]
        a: PathBuf,
        #[arg(long = "B", value_name = "PATH")]
        b: PathBuf,
        #[arg(long = "C", value_name = "PATH")]
        c: PathBuf,
    },
    /// Solve AZ − ZB = C.
    Sylvester {
        #[arg(long = "A", value_name = "PATH")]
        a: PathBuf,
        #[arg(long = "B", value_name = "PATH")]
        b: PathBuf,
        #[arg(long = "C", value_name = "PATH")]
        c: PathBuf,
        #[arg(long, value_enum, default_value_t = SylvesterBackend::Contour)]
        method: SylvesterBackend,
        /// Cross-check against a dense Kronecker solve.
        #[arg(long, value_enum)]
        verify: Option<Oracle>,
        #[arg(long, default_value_t = 1e-7)]
        verify_tol: f64,
    },
    /// Solve Z − AZB = C.
    Stein {
        #[arg(long = "A", value_name = "PATH")]
        a: PathBuf,
        #[arg(long = "B", value_name = "PATH")]
        b: PathBuf,
        #[arg(long = "C", value_name = "PATH")]
        c: PathBuf,
        #[arg(long, value_enum, default_value_t = SteinBackend::Boxtimes)]
        method: SteinBackend,
        #[arg(long, value_enum)]
        verify: Option<Oracle>,
        #[arg(long, default_value_t = 1e-7)]
        verify_tol: f64,
    },
    /// Impulse response T(t) and its derivative for λ²E + λF + H.
    PencilResponse {
        #[command(flatten)]
        pencil: PencilArgs,
        /// Comma-separated list of non-negative times.
        #[arg(long = "t", value_delimiter = ',', required = true)]
        t: Vec<f64>,
        /// Right solvent factor; with --A2 the factored path is used.
        #[arg(long = "A1", value_name = "PATH", requires = "a2")]
        a1: Option<PathBuf>,
        #[arg(long = "A2", value_name = "PATH", requires = "a1")]
        a2: Option<PathBuf>,
    },
    /// Solve E y'' + F y' + H y = 0 with y(0) = y0, y'(0) = y1.
    PencilIvp {
        #[command(flatten)]
        pencil: PencilArgs,
        #[arg(long, value_name = "PATH")]
        y0: PathBuf,
        #[arg(long, value_name = "PATH")]
        y1: PathBuf,
        #[arg(long = "t", value_delimiter = ',', required = true)]
        t: Vec<f64>,
    },
    /// Newton iteration for a right solvent of λ² + λF + H.
    Solvent {
        #[arg(long = "F", value_name = "PATH")]
        f: PathBuf,
        #[arg(long = "H", value_name = "PATH")]
        h: PathBuf,
        #[arg(long = "X0", value_name = "PATH")]
        x0: PathBuf,
        /// Check the resulting factorization at seeded sample points.
        #[arg(long)]
        verify: bool,
    },
    /// Fréchet differential of f at A in direction dA.
    Frechet {
        #[arg(long)]
        f: String,
        #[arg(long = "A", value_name = "PATH")]
        a: PathBuf,
        #[arg(long = "dA", value_name = "PATH")]
        da: PathBuf,
        /// Cross-check against the block-triangular oracle.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1e-7)]
        verify_tol: f64,
        /// Apply the differential of the inverse function instead.
        #[arg(long)]
        inverse: bool,
        /// Also estimate the operator norm of the differential.
        #[arg(long)]
        condition: bool,
    },
    /// Spectrum {f(λᵢ, μⱼ)} of the transformator of f.
    SpectrumMap {
        #[arg(long)]
        f: String,
        #[arg(long = "A", value_name = "PATH")]
        a: PathBuf,
        #[arg(long = "B", value_name = "PATH")]
        b: PathBuf,
        /// Also materialize the transformator and report its eigenvalues.
        #[arg(long)]
        verify: bool,
    },
}

#[derive(Debug, Args)]
pub struct PencilArgs {
    /// Leading coefficient; identity when omitted.
    #[arg(long = "E", value_name = "PATH")]
    pub e: Option<PathBuf>,
    #[arg(long = "F", value_name = "PATH")]
    pub f: PathBuf,
    #[arg(long = "H", value_name = "PATH")]
    pub h: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] opcalc_core::Error),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Config(String),
    #[error("verification failed: {what} differs by {distance:.3e} (tolerance {tolerance:.1e})")]
    Verification { what: &'static str, distance: f64, tolerance: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(e) => match e.category() {
                ErrorCategory::Input => EXIT_CONFIG,
                ErrorCategory::Precondition => EXIT_PRECONDITION,
                ErrorCategory::Numerical => EXIT_NUMERICAL,
            },
            Self::Io(_) | Self::Config(_) => EXIT_CONFIG,
            Self::Verification { .. } => EXIT_NUMERICAL,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = e.exit_code();
            let kind = match code {
                EXIT_PRECONDITION => "precondition failed",
                EXIT_NUMERICAL => "numerical failure",
                _ => "error",
            };
            eprintln!("opcalc: {kind}: {e}");
            code
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("OPCALC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("OPCALC_THREADS must be a positive integer, got `{v}`")))?;
    // a pool that already exists (repeated in-process runs) keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn options(c: &Common) -> CliResult<CalculusOptions> {
    let opts = CalculusOptions {
        tol: c.tol,
        margin: c.margin,
        start_nodes: c.start_nodes,
        node_cap: c.node_cap,
        enclosure_mode: match c.enclosure {
            Enclosure::Eigen => EnclosureMode::Eigen,
            Enclosure::Gershgorin => EnclosureMode::Gershgorin,
        },
        residual_tol: c.residual_tol,
    };
    opts.validate()?;
    Ok(opts)
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let start = Instant::now();
    configure_threads()?;
    let opts = options(&cli.common)?;
    let mut report = Report::new(command_name(&cli.command), &opts);
    let outputs = dispatch(&cli.command, &opts, &mut report)?;
    let written = write_outputs(&cli.common, &outputs)?;
    if cli.common.out.is_none() {
        for (name, m) in &outputs {
            report.output(name, io::to_json_value(m));
        }
    }
    report.written(written);
    if cli.common.timings {
        report.timing("total_s", start.elapsed().as_secs_f64());
    } else {
        report.drop_timings();
    }
    let text = match cli.common.report_format {
        ReportFormat::Json => report.to_json(),
        ReportFormat::Text => report.to_text(),
    };
    match &cli.common.report {
        Some(path) => std::fs::write(path, text)
            .map_err(|source| IoError::File { path: path.display().to_string(), source })?,
        None => print!("{text}"),
    }
    Ok(())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Funm { .. } => "funm",
        Command::Funm2 { .. } => "funm2",
        Command::Boxdot { .. } => "boxdot",
        Command::Sylvester { .. } => "sylvester",
        Command::Stein { .. } => "stein",
        Command::PencilResponse { .. } => "pencil-response",
        Command::PencilIvp { .. } => "pencil-ivp",
        Command::Solvent { .. } => "solvent",
        Command::Frechet { .. } => "frechet",
        Command::SpectrumMap { .. } => "spectrum-map",
    }
}

fn write_outputs(c: &Common, outputs: &[(String, ComplexMatrix)]) -> CliResult<Vec<String>> {
    let Some(out) = &c.out else {
        return Ok(Vec::new());
    };
    let format = |p: &Path| match c.out_format {
        Some(OutFormat::Mtx) => MatrixFormat::MatrixMarket,
        Some(OutFormat::Json) => MatrixFormat::Json,
        None => MatrixFormat::for_path(p),
    };
    match outputs {
        [] => Ok(Vec::new()),
        [(_, m)] => {
            write_matrix(out, m, format(out))?;
            Ok(vec![out.display().to_string()])
        }
        many => {
            std::fs::create_dir_all(out).map_err(|source| IoError::File { path: out.display().to_string(), source })?;
            let fmt = match c.out_format {
                Some(OutFormat::Mtx) => MatrixFormat::MatrixMarket,
                _ => MatrixFormat::Json,
            };
            let mut paths = Vec::with_capacity(many.len());
            for (name, m) in many {
                let path = out.join(format!("{name}.{}", fmt.extension()));
                write_matrix(&path, m, fmt)?;
                paths.push(path.display().to_string());
            }
            Ok(paths)
        }
    }
}

fn timed<T>(report: &mut Report, key: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let v = f();
    report.timing(key, start.elapsed().as_secs_f64());
    v
}

fn dispatch(cmd: &Command, opts: &CalculusOptions, report: &mut Report) -> CliResult<Vec<(String, ComplexMatrix)>> {
    match cmd {
        Command::Funm { f, a } => {
            let f = parse_f1(f)?;
            let a = read_matrix(a)?;
            report.function(&f.to_string());
            let r = timed(report, "compute_s", || calculus::funm_result(&f, &a, opts))?;
            report.quadrature("funm", r.nodes_used, r.error_estimate);
            Ok(vec![("F".into(), r.value)])
        }
        Command::Funm2 { f, a, b, c } => {
            let f = parse_f2(f)?;
            let (a, b, c) = (read_matrix(a)?, read_matrix(b)?, read_matrix(c)?);
            report.function(&f.to_string());
            let r = timed(report, "compute_s", || calculus::boxtimes_result(&f, &a, &b, &c, opts))?;
            report.quadrature("boxtimes", r.nodes_used, r.error_estimate);
            Ok(vec![("Y".into(), r.value)])
        }
        Command::Boxdot { f, a, b, c } => {
            let f = parse_f1(f)?;
            let (a, b, c) = (read_matrix(a)?, read_matrix(b)?, read_matrix(c)?);
            report.function(&f.to_string());
            let r = timed(report, "compute_s", || calculus::boxdot_result(&f, &a, &b, &c, opts))?;
            report.quadrature("boxdot", r.nodes_used, r.error_estimate);
            Ok(vec![("Y".into(), r.value)])
        }
        Command::Sylvester { a, b, c, method, verify, verify_tol } => {
            let p = SylvesterProblem::new(read_matrix(a)?, read_matrix(b)?, read_matrix(c)?)?;
            let method = match method {
                SylvesterBackend::Contour => SylvesterMethod::Contour,
                SylvesterBackend::ExpIntegral => SylvesterMethod::ExpIntegral,
                SylvesterBackend::Series => SylvesterMethod::Series,
                SylvesterBackend::Kron => SylvesterMethod::KronOracle,
                SylvesterBackend::SignForm => SylvesterMethod::SignForm,
            };
            report.detail("method", method.to_string().into());
            let sol = timed(report, "compute_s", || sylvester::solve_sylvester(&p, method, opts))?;
            report.residual("relative", sol.relative_residual);
            if let Some(n) = sol.nodes_used {
                report.quadrature("solve", n, sol.error_estimate.unwrap_or(0.0));
            }
            if verify.is_some() {
                let oracle = sylvester::kron_sylvester(&p.a, &p.b, &p.c)?;
                check_oracle(report, "kron_relative_distance", sol.z.rel_dist(&oracle), *verify_tol)?;
            }
            Ok(vec![("Z".into(), sol.z)])
        }
        Command::Stein { a, b, c, method, verify, verify_tol } => {
            let p = SylvesterProblem::new(read_matrix(a)?, read_matrix(b)?, read_matrix(c)?)?;
            let method = match method {
                SteinBackend::Boxtimes => SteinMethod::Boxtimes,
                SteinBackend::Kron => SteinMethod::KronOracle,
            };
            let sol = timed(report, "compute_s", || sylvester::solve_stein(&p, method, opts))?;
            report.residual("relative", sol.relative_residual);
            if let Some(n) = sol.nodes_used {
                report.quadrature("solve", n, sol.error_estimate.unwrap_or(0.0));
            }
            if verify.is_some() {
                let oracle = sylvester::solve_stein(&p, SteinMethod::KronOracle, opts)?.z;
                check_oracle(report, "kron_relative_distance", sol.z.rel_dist(&oracle), *verify_tol)?;
            }
            Ok(vec![("Z".into(), sol.z)])
        }
        Command::PencilResponse { pencil: pa, t, a1, a2 } => {
            let p = read_pencil(pa)?;
            report.detail("times", serde_json::json!(t));
            let responses = match (a1, a2) {
                (Some(a1), Some(a2)) => {
                    let fact = pencil::PencilFactorization::new(read_matrix(a1)?, read_matrix(a2)?)?;
                    let check = pencil::verify_factorization(&p, &fact, 5, 0, 1e-8)?;
                    report.residual("factorization_coefficients", check.coefficient_error);
                    report.residual("factorization_resolvent", check.resolvent_error);
                    report.detail("path", "factored".into());
                    timed(report, "compute_s", || {
                        t.iter()
                            .map(|&t| pencil::impulse_response_factored(&fact, p.e(), t, opts))
                            .collect::<opcalc_core::Result<Vec<_>>>()
                    })?
                }
                _ => {
                    report.detail("path", "direct".into());
                    timed(report, "compute_s", || pencil::impulse_responses(&p, t, opts))?
                }
            };
            let mut out = Vec::with_capacity(2 * responses.len());
            for (k, r) in responses.into_iter().enumerate() {
                report.quadrature(&format!("t{k}"), r.nodes_used, r.error_estimate);
                out.push((format!("T_{k}"), r.value));
                out.push((format!("Tdot_{k}"), r.derivative));
            }
            Ok(out)
        }
        Command::PencilIvp { pencil: pa, y0, y1, t } => {
            let p = read_pencil(pa)?;
            let (y0, y1) = (read_matrix(y0)?, read_matrix(y1)?);
            report.detail("times", serde_json::json!(t));
            let ys = timed(report, "compute_s", || pencil::solve_ivp_many(&p, &y0, &y1, t, opts))?;
            Ok(ys.into_iter().enumerate().map(|(k, y)| (format!("y_{k}"), y)).collect())
        }
        Command::Solvent { f, h, x0, verify } => {
            let (f, h, x0) = (read_matrix(f)?, read_matrix(h)?, read_matrix(x0)?);
            let sol = timed(report, "compute_s", || pencil::right_solvent_newton(&f, &h, &x0, opts))?;
            report.residual("relative", sol.residual);
            report.detail("iterations", sol.iterations.into());
            if *verify {
                let p = pencil::QuadraticPencil::monic(f.clone(), h)?;
                let fact = pencil::PencilFactorization::from_right_solvent(&f, &sol.x)?;
                let check = pencil::verify_factorization(&p, &fact, 5, 0, 1e-8)?;
                report.residual("factorization_coefficients", check.coefficient_error);
                report.residual("factorization_resolvent", check.resolvent_error);
            }
            Ok(vec![("X".into(), sol.x)])
        }
        Command::Frechet { f, a, da, oracle, verify_tol, inverse, condition } => {
            let f = parse_f1(f)?;
            report.function(&f.to_string());
            let req = frechet::DifferentialRequest::new(f.clone(), read_matrix(a)?, read_matrix(da)?)?;
            let value = if *inverse {
                report.detail("mode", "inverse".into());
                timed(report, "compute_s", || frechet::inverse_frechet(&f, &req.a, &req.delta, opts))?
            } else {
                let r = timed(report, "compute_s", || frechet::frechet_result(&req, opts))?;
                report.quadrature("boxdot", r.nodes_used, r.error_estimate);
                r.value
            };
            if *oracle {
                let check = if *inverse {
                    // forward differential of the inverse result must give back ΔB
                    let back = frechet::frechet(&frechet::DifferentialRequest::new(f.clone(), req.a.clone(), value.clone())?, opts)?;
                    back.rel_dist(&req.delta)
                } else {
                    value.rel_dist(&frechet::frechet_block_oracle(&f, &req.a, &req.delta, opts)?)
                };
                check_oracle(report, "oracle_relative_distance", check, *verify_tol)?;
            }
            if *condition {
                let norm = frechet::frechet_norm_estimate(&f, &req.a, opts)?;
                report.detail("differential_norm_estimate", norm.into());
            }
            Ok(vec![("dF".into(), value)])
        }
        Command::SpectrumMap { f, a, b, verify } => {
            let f = parse_f2(f)?;
            let (a, b) = (read_matrix(a)?, read_matrix(b)?);
            report.function(&f.to_string());
            let mapped = calculus::transformator_spectrum(&f, &a, &b)?;
            report.detail("spectrum", complex_list(&mapped));
            if *verify {
                let lifted = timed(report, "compute_s", || {
                    calculus::transformator_matrix(&f, &a, &b, opts).and_then(|t| t.eigenvalues())
                })?;
                report.detail("lifted_eigenvalues", complex_list(&lifted));
                report.residual("hausdorff_distance", hausdorff(&mapped, &lifted));
            }
            Ok(Vec::new())
        }
    }
}

fn read_pencil(pa: &PencilArgs) -> CliResult<pencil::QuadraticPencil> {
    let f = read_matrix(&pa.f)?;
    let h = read_matrix(&pa.h)?;
    let e = match &pa.e {
        Some(path) => read_matrix(path)?,
        None => ComplexMatrix::identity(f.rows()),
    };
    Ok(pencil::QuadraticPencil::new(e, f, h)?)
}

fn check_oracle(report: &mut Report, key: &str, distance: f64, tolerance: f64) -> CliResult<()> {
    report.residual(key, distance);
    if distance <= tolerance {
        Ok(())
    } else {
        Err(CliError::Verification { what: "result and oracle", distance, tolerance })
    }
}

fn complex_list(zs: &[Complex64]) -> serde_json::Value {
    serde_json::json!(zs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

/// Symmetric nearest-point distance between two point sets.
fn hausdorff(x: &[Complex64], y: &[Complex64]) -> f64 {
    let one_way = |p: &[Complex64], q: &[Complex64]| {
        p.iter()
            .map(|a| q.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(x, y).max(one_way(y, x))
}
