//! Command-line front end: verification suites, restricted-sum experiments,
//! sup-norm scans and `θ(q)`.
//!
//! Exit codes: 0 when every assertion holds, 1 when one fails (the failing
//! case is part of the report), 2 for usage, parameter and I/O errors.

pub mod checks;
pub mod experiment;
pub mod manifest;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gelfond_tau::asymptotics::{default_grid, ExperimentSpec};
use gelfond_tau::digits::MAX_LIMIT;
use gelfond_tau::divisor::DEFAULT_SEGMENT;
use gelfond_tau::expsum::{lemma1_bound, sup_norm_scan, theta, ExpSumError, ScanMode};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use checks::Check;
use manifest::{resolve_timestamp, RunManifest, SCHEMA};
use output::{emit, to_json};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Parser)]
#[command(
    name = "gelfond-tau",
    version,
    about = "Digit-restricted divisor sums and exponential-sum checks"
)]
pub struct Cli {
    /// Timestamp recorded in the manifest (RFC 3339); defaults to SOURCE_DATE_EPOCH or now.
    #[arg(long, global = true)]
    pub timestamp: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run a verification suite; exit 1 if any check fails.
    Verify(VerifyArgs),
    /// Exact restricted sums and error terms on an x grid, written as CSV and JSON.
    Experiment(ExperimentArgs),
    /// Grid sup of |S_Q(α, z)| with local refinement.
    Scan(ScanArgs),
    /// θ(q) and the gate θ(q) < 1/k.
    Theta(ThetaArgs),
    /// Rerun the command recorded in a report's manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Lemma1,
    Lemma2,
    Lemma4,
    Digits,
    Divisor,
    All,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Base for lemma1/lemma4 (default: the built-in sweep).
    #[arg(long)]
    pub q: Option<u64>,
    /// Modulus for lemma1/lemma4 (default: the built-in sweep).
    #[arg(long)]
    pub p: Option<u64>,
    /// Character numerator for lemma1/lemma4 (default: 1 for lemma1, every z for lemma4).
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<i64>,
    /// Largest digit length Q (default 6 for identities, 20 for lemma1, 8 for lemma4).
    #[arg(long = "Qmax")]
    pub qmax: Option<u32>,
    /// Random cases per parameter set (defaults depend on the check).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Relative tolerance for identities and the binary sup-norm bound.
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
    /// Allowed negative slack in the large-sieve inequality.
    #[arg(long, default_value_t = 1e-6)]
    pub slack_tol: f64,
    /// Absolute quadrature tolerance for L¹ norms.
    #[arg(long, default_value_t = 1e-8)]
    pub quad_tol: f64,
    /// Uniform grid size for sup-norm scans.
    #[arg(long, default_value_t = 1 << 16)]
    pub grid: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub q: u64,
    #[arg(long)]
    pub p: u64,
    /// Largest x, e.g. 1e7; selects the grid round(10^{3+j/2}) up to it.
    #[arg(long)]
    pub xmax: Option<String>,
    /// Explicit comma-separated grid, e.g. 1e3,1e4,1e5.
    #[arg(long)]
    pub grid: Option<String>,
    /// Residues a to report (default: all).
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<u64>>,
    #[arg(long, default_value_t = DEFAULT_SEGMENT)]
    pub segment: u64,
    /// Output directory for errors.csv and summary.json.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ScanArgs {
    #[arg(long = "Q")]
    pub digits: u32,
    #[arg(long, default_value_t = 2)]
    pub q: u64,
    #[arg(long, default_value_t = 2)]
    pub p: u64,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub z: i64,
    #[arg(long, default_value_t = 1 << 16)]
    pub grid: u64,
    /// Allow parameters outside the Gelfond regime.
    #[arg(long)]
    pub scan_only: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub rel_tol: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ThetaArgs {
    #[arg(long)]
    pub q: u64,
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// A report or summary embedding a manifest, or a bare manifest.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output path (a directory for experiments).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `1000`, `1e7` or `2.5e6` as an exact non-negative integer.
pub fn parse_limit(s: &str) -> Result<u64, CliError> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s
        .parse()
        .map_err(|_| CliError::Usage(format!("not a number: {s:?}")))?;
    if !f.is_finite() || f < 0.0 || f.fract() != 0.0 || f > MAX_LIMIT as f64 {
        return Err(CliError::Usage(format!(
            "not a non-negative integer below 2^63: {s:?}"
        )));
    }
    Ok(f as u64)
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Outcome of a command: the exit code after the report has been written.
pub type Outcome = Result<i32, CliError>;

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Serialize)]
struct VerifyReport<'a> {
    schema: u32,
    manifest: &'a RunManifest,
    suite: Suite,
    passed: bool,
    checks: Vec<Check>,
}

fn suite_checks(args: &VerifyArgs, suite: Suite) -> Result<Vec<Check>, CliError> {
    let seed = args.seed;
    let n = |default: usize| args.samples.unwrap_or(default);
    Ok(match suite {
        Suite::Identities => vec![
            checks::product_vs_direct(args.qmax.unwrap_or(6), 10, 7, n(1000), args.rel_tol, seed),
            checks::periodicity(n(1000), seed),
            checks::splitting_identity(n(1000), args.rel_tol, seed),
            checks::factor_bound(n(10_000), seed),
        ],
        Suite::Lemma1 => {
            let (q, p) = (args.q.unwrap_or(2), args.p.unwrap_or(2));
            let z = args.z.unwrap_or(1);
            let qmax = args.qmax.unwrap_or(20);
            if lemma1_bound(qmax, q, p).is_some() && z.rem_euclid(2) == 1 {
                vec![checks::lemma1_binary(qmax, args.grid, args.rel_tol)]
            } else {
                vec![checks::lambda_scan(q, p, z, qmax, args.grid)]
            }
        }
        Suite::Lemma2 => vec![checks::gallagher_sweep(n(1000), args.slack_tol, seed)],
        Suite::Lemma4 => {
            let qs = args.q.map_or(vec![2, 3, 5, 10, 50], |q| vec![q]);
            let ps = args.p.map_or(vec![2, 3, 13], |p| vec![p]);
            let zs = args.z.map(|z| vec![z]);
            vec![
                checks::l1_closed_form(args.quad_tol.min(1e-9), 1e-6),
                checks::l1_bound(
                    &qs,
                    &ps,
                    zs.as_deref(),
                    args.qmax.unwrap_or(8),
                    args.quad_tol,
                ),
                checks::kernel_sweep(n(10_000), 100, 13, seed),
            ]
        }
        Suite::Digits => vec![
            checks::digit_round_trip(n(100_000), seed),
            checks::stream_consistency(1_000_000, n(10_000), seed),
            checks::digit_dp_vs_brute(100_000, &[2, 3, 10, 16], &[2, 3, 5], &[1, 2, 3]),
            checks::gelfond_binary(10, 24),
        ],
        Suite::Divisor => vec![
            checks::sieve_vs_pointwise(100_000, 5),
            checks::summatory_vs_hyperbola(n(1000), 100_000_000, seed),
            checks::summatory_vs_recursion(100_000, 5, n(1000).min(200), seed),
            checks::vinogradov_identity(10_000),
            checks::multiplicativity(n(10_000), 1_000_000, seed),
        ],
        Suite::All => {
            let mut all = Vec::new();
            for s in [
                Suite::Identities,
                Suite::Lemma1,
                Suite::Lemma2,
                Suite::Lemma4,
                Suite::Digits,
                Suite::Divisor,
            ] {
                all.extend(suite_checks(args, s)?);
            }
            all
        }
    })
}

fn cmd_verify(args: &VerifyArgs, timestamp: String) -> Outcome {
    if !(args.rel_tol >= 0.0 && args.slack_tol >= 0.0 && args.quad_tol > 0.0) {
        return Err(usage("tolerances must be non-negative (quad-tol positive)"));
    }
    if args.grid == 0 {
        return Err(usage("--grid must be positive"));
    }
    if args.q.is_some_and(|q| q < 2) || args.p.is_some_and(|p| p < 2) {
        return Err(usage("need q >= 2 and p >= 2"));
    }
    let manifest = RunManifest::new("verify", args, Some(args.seed), timestamp)?;
    let checks = suite_checks(args, args.suite)?;
    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        schema: SCHEMA,
        manifest: &manifest,
        suite: args.suite,
        passed,
        checks,
    };
    for c in &report.checks {
        eprintln!(
            "{:<24} {} cases={} min_slack={:e}",
            c.name,
            if c.passed { "ok  " } else { "FAIL" },
            c.cases,
            c.min_slack
        );
    }
    emit(args.out.as_deref(), to_json(&report)?)?;
    Ok(if passed { EXIT_PASS } else { EXIT_ASSERTION })
}

// ---------------------------------------------------------------------------
// experiment

fn experiment_grid(args: &ExperimentArgs) -> Result<Vec<u64>, CliError> {
    let xmax = args.xmax.as_deref().map(parse_limit).transpose()?;
    let grid = match (&args.grid, xmax) {
        (Some(g), _) => {
            let mut pts = g
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(parse_limit)
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(x) = xmax {
                pts.retain(|&v| v <= x);
            }
            pts
        }
        (None, Some(x)) => default_grid(x),
        (None, None) => return Err(usage("experiment needs --xmax or --grid")),
    };
    if grid.is_empty() {
        return Err(usage("the x grid is empty"));
    }
    Ok(grid)
}

fn cmd_experiment(args: &ExperimentArgs, timestamp: String) -> Outcome {
    let out = args
        .out
        .as_deref()
        .ok_or_else(|| usage("experiment needs --out DIR"))?;
    let grid = experiment_grid(args)?;
    let spec = ExperimentSpec::new(args.k, args.q, args.p, grid, args.a.clone()).map_err(usage)?;
    if args.segment == 0 {
        return Err(usage("--segment must be positive"));
    }
    let manifest = RunManifest::new("experiment", args, None, timestamp)?;
    let report = experiment::run(&spec, args.segment, &manifest, out)?;
    eprintln!(
        "wrote {} rows to {}; lambda_hat={:?} r2={:?} gate={}",
        report.rows.len(),
        out.display(),
        report.lambda_hat,
        report.fit_r2,
        report.gate
    );
    Ok(EXIT_PASS)
}

// ---------------------------------------------------------------------------
// scan and theta

fn cmd_scan(args: &ScanArgs, timestamp: String) -> Outcome {
    let mode = if args.scan_only {
        ScanMode::ScanOnly
    } else {
        ScanMode::Assert
    };
    let manifest = RunManifest::new("scan", args, None, timestamp)?;
    let res =
        sup_norm_scan(args.digits, args.q, args.p, args.z, args.grid, mode).map_err(
            |e| match e {
                ExpSumError::NotGelfondRegime => {
                    usage(format!("{e}; pass --scan-only to scan anyway"))
                }
                e => usage(e),
            },
        )?;
    let bound = if mode == ScanMode::Assert && args.z.rem_euclid(2) == 1 {
        lemma1_bound(args.digits, args.q, args.p)
    } else {
        None
    };
    let within = bound.map(|b| res.sup_abs <= b * (1.0 + args.rel_tol));
    let report = json!({
        "schema": SCHEMA,
        "manifest": manifest,
        "sup_abs": res.sup_abs,
        "argmax_alpha": res.argmax_alpha,
        "lambda_hat": res.lambda_hat,
        "grid_size": res.grid_size,
        "bound": bound,
        "within_bound": within,
    });
    emit(args.out.as_deref(), to_json(&report)?)?;
    Ok(if within == Some(false) {
        EXIT_ASSERTION
    } else {
        EXIT_PASS
    })
}

fn cmd_theta(args: &ThetaArgs, timestamp: String) -> Outcome {
    if args.k < 2 {
        return Err(usage("k must be at least 2"));
    }
    let th = theta(args.q).map_err(usage)?;
    let manifest = RunManifest::new("theta", args, None, timestamp)?;
    let report = json!({
        "schema": SCHEMA,
        "manifest": manifest,
        "theta": th,
        "gate": th < 1.0 / args.k as f64,
    });
    emit(args.out.as_deref(), to_json(&report)?)?;
    Ok(EXIT_PASS)
}

// ---------------------------------------------------------------------------
// replay

fn load_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{} is not JSON: {e}", path.display())))?;
    let m = value.get("manifest").cloned().unwrap_or(value);
    serde_json::from_value(m).map_err(|e| usage(format!("no manifest in {}: {e}", path.display())))
}

fn params<T: serde::de::DeserializeOwned>(m: &RunManifest) -> Result<T, CliError> {
    serde_json::from_value(m.params.clone()).map_err(|e| usage(format!("bad manifest params: {e}")))
}

fn cmd_replay(args: &ReplayArgs) -> Outcome {
    let m = load_manifest(&args.manifest)?;
    if m.version != env!("CARGO_PKG_VERSION") {
        eprintln!(
            "warning: manifest written by version {}, running {}",
            m.version,
            env!("CARGO_PKG_VERSION")
        );
    }
    let out = args.out.clone();
    let command = match m.command.as_str() {
        "verify" => Command::Verify(VerifyArgs { out, ..params(&m)? }),
        "experiment" => Command::Experiment(ExperimentArgs { out, ..params(&m)? }),
        "scan" => Command::Scan(ScanArgs { out, ..params(&m)? }),
        "theta" => Command::Theta(ThetaArgs { out, ..params(&m)? }),
        other => return Err(usage(format!("unknown command in manifest: {other:?}"))),
    };
    execute(&command, m.timestamp)
}

fn execute(command: &Command, timestamp: String) -> Outcome {
    match command {
        Command::Verify(a) => cmd_verify(a, timestamp),
        Command::Experiment(a) => cmd_experiment(a, timestamp),
        Command::Scan(a) => cmd_scan(a, timestamp),
        Command::Theta(a) => cmd_theta(a, timestamp),
        Command::Replay(a) => cmd_replay(a),
    }
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var(gelfond_tau::THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => gelfond_tau::threads_from_env().map(Some).ok_or_else(|| {
            usage(format!(
                "{} must be a positive integer, got {v:?}",
                gelfond_tau::THREADS_ENV
            ))
        }),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
        }
    };
    let outcome = (|| {
        let threads = thread_cap()?;
        let timestamp = resolve_timestamp(cli.timestamp.as_deref())?;
        gelfond_tau::with_threads(threads, || execute(&cli.command, timestamp))
    })();
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
