//! Command-line front end: `simulate`, `estimate`, `experiment`, `validate`.
//!
//! Exit codes: 0 success, 1 validation failure, 2 invalid arguments or config,
//! 3 output I/O failure, 4 unreadable or unparsable input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::covariance::factorize;
use crate::error::Error;
use crate::estimators::MleEstimator;
use crate::harness::{run_experiment_with, ExperimentConfig, DEFAULT_ROOT_SEED};
use crate::model::{HurstExponent, ModelParams, ObservationPath, SamplingGrid};
use crate::parallel::Execution;
use crate::synthesis::{build_sampler, SamplerKind, SimulationSeed};
use crate::table::{emit_table, TableFormat};
use crate::validate::{run_suite, Level};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_OUTPUT_IO: i32 = 3;
pub const EXIT_INPUT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "fbm-mle", version, about = "Exact MLE of drift and scale for drift fractional Brownian motion")]
pub struct Cli {
    /// Maximum worker threads for Monte Carlo work (0 = all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one path of Y_t = mu t + sigma B^H_t and write it as CSV (index,time,value).
    Simulate {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long = "sigma-sq", default_value_t = 1.0)]
        sigma_sq: f64,
        #[arg(long, default_value_t = 0.5)]
        hurst: f64,
        /// Grid step.
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        /// Number of observations.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_ROOT_SEED)]
        seed: u64,
        /// cholesky or davies_harte.
        #[arg(long, default_value = "cholesky")]
        sampler: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate mu and sigma^2 from a CSV path; prints a JSON report.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        hurst: f64,
        /// Grid step; taken from the time column when omitted.
        #[arg(long)]
        h: Option<f64>,
        /// Known true sigma^2, used for the exact standard error of mu_hat.
        #[arg(long = "sigma-sq")]
        sigma_sq: Option<f64>,
    },
    /// Run a Monte Carlo experiment from a JSON or TOML config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// text, csv or json.
        #[arg(long, default_value = "text")]
        format: String,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the built-in property suite.
    Validate {
        /// quick or full.
        #[arg(long, default_value = "quick")]
        level: String,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::new(EXIT_INVALID, e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let exec = Execution::from_thread_cap(cli.threads);
    let result = match cli.command {
        Command::Simulate {
            mu,
            sigma_sq,
            hurst,
            h,
            n,
            seed,
            sampler,
            out,
        } => cmd_simulate(mu, sigma_sq, hurst, h, n, seed, &sampler, out.as_deref(), stdout, stderr),
        Command::Estimate {
            input,
            hurst,
            h,
            sigma_sq,
        } => cmd_estimate(&input, hurst, h, sigma_sq, stdout),
        Command::Experiment { config, format, out } => {
            cmd_experiment(&config, &format, out.as_deref(), exec, stdout, stderr)
        }
        Command::Validate { level } => cmd_validate(&level, exec, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn write_output(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    let res = match out {
        Some(path) => fs::write(path, text),
        None => stdout.write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure::new(EXIT_OUTPUT_IO, format!("writing output: {e}")))
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    mu: f64,
    sigma_sq: f64,
    hurst: f64,
    h: f64,
    n: usize,
    seed: u64,
    sampler: &str,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let hurst = HurstExponent::new(hurst).map_err(invalid)?;
    let params = ModelParams::new(mu, sigma_sq, hurst).map_err(invalid)?;
    let grid = SamplingGrid::new(h, n).map_err(invalid)?;
    let kind: SamplerKind = sampler.parse().map_err(invalid)?;
    let _ = writeln!(
        stderr,
        "simulate: mu={mu} sigma_sq={sigma_sq} hurst={hurst} h={h} n={n} seed={seed} sampler={kind}"
    );
    let path = build_sampler(kind, &grid, hurst)
        .and_then(|s| s.sample(&params, SimulationSeed::new(seed, 0)))
        .map_err(invalid)?;
    write_output(out, &path_to_csv(&path), stdout)?;
    Ok(EXIT_OK)
}

/// CSV with header `index,time,value`, one row per observation.
pub fn path_to_csv(path: &ObservationPath) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["index", "time", "value"]).expect("in-memory write");
    let grid = path.grid();
    for (k, v) in path.values().iter().enumerate() {
        w.write_record(&[(k + 1).to_string(), grid.time(k + 1).to_string(), v.to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Rows `(index, time, value)` of a path CSV.
pub fn read_path_csv(text: &str) -> Result<Vec<(usize, f64, f64)>, String> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["index", "time", "value"] {
        return Err(format!("expected header index,time,value, got {}", headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let field = |i: usize| rec.get(i).ok_or_else(|| format!("row {}: missing column", line + 1));
        let index: usize = field(0)?.parse().map_err(|e| format!("row {}: index: {e}", line + 1))?;
        let time: f64 = field(1)?.parse().map_err(|e| format!("row {}: time: {e}", line + 1))?;
        let value: f64 = field(2)?.parse().map_err(|e| format!("row {}: value: {e}", line + 1))?;
        if index != line + 1 {
            return Err(format!("row {}: expected index {}, got {index}", line + 1, line + 1));
        }
        rows.push((index, time, value));
    }
    Ok(rows)
}

fn cmd_estimate(
    input: &Path,
    hurst: f64,
    h: Option<f64>,
    sigma_sq: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<i32, Failure> {
    let hurst = HurstExponent::new(hurst).map_err(invalid)?;
    let text = fs::read_to_string(input)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("reading {}: {e}", input.display())))?;
    let rows = read_path_csv(&text).map_err(|e| Failure::new(EXIT_INPUT, format!("parsing {}: {e}", input.display())))?;
    let step = match h {
        Some(h) => h,
        None => {
            let h = rows.first().map(|r| r.1).unwrap_or(1.0);
            let uniform = rows
                .iter()
                .all(|&(k, t, _)| (t - k as f64 * h).abs() <= 1e-9 * t.abs().max(1.0));
            if !uniform {
                return Err(invalid("time column is not a uniform grid t_k = k h; pass --h"));
            }
            h
        }
    };
    let grid = SamplingGrid::new(step, rows.len()).map_err(invalid)?;
    let path = ObservationPath::new(grid, rows.iter().map(|r| r.2).collect()).map_err(invalid)?;
    let estimator = factorize(&grid, hurst)
        .and_then(MleEstimator::new)
        .map_err(invalid)?;
    let mut report = estimator.estimate(&path).map_err(invalid)?;
    if let Some(s2) = sigma_sq {
        if !(s2.is_finite() && s2 >= 0.0) {
            return Err(invalid(Error::InvalidParameter(format!("sigma_sq must be non-negative, got {s2}"))));
        }
        report = report.with_true_sigma_sq(s2, estimator.t_gi_t());
    }
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_output(None, &json, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_experiment(
    config_path: &Path,
    format: &str,
    out: Option<&Path>,
    exec: Execution,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let format: TableFormat = format.parse().map_err(invalid)?;
    let text = fs::read_to_string(config_path)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("reading {}: {e}", config_path.display())))?;
    let config = ExperimentConfig::parse(&text, Some(config_path)).map_err(invalid)?;
    let _ = writeln!(
        stderr,
        "experiment: mu={} sigma_sq={} h={} N={} replications={} root_seed={} sampler={}",
        config.mu,
        config.sigma_sq,
        config.grid.step(),
        config.grid.len(),
        config.replications,
        config.root_seed,
        config.sampler
    );
    let summary = run_experiment_with(&config, exec).map_err(invalid)?;
    let doc = emit_table(&summary, format).map_err(invalid)?;
    write_output(out, &doc, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_validate(level: &str, exec: Execution, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let level: Level = level.parse().map_err(invalid)?;
    let results = run_suite(level, exec);
    let mut text = String::new();
    for r in &results {
        text.push_str(&format!(
            "[{}] {}: {}\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        ));
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    text.push_str(&format!("{} checks, {} failed\n", results.len(), failed));
    write_output(None, &text, stdout)?;
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VALIDATION_FAILED })
}
