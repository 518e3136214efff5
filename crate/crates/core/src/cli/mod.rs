//! The `duality-lab` command-line driver.
//!
//! ```text
//! duality-lab <command> --config <path> [--out <dir>] [--format csv|json] [--seed <u64>]
//! ```
//!
//! Each run writes `report.csv` or `report.json` into the output directory,
//! plus `run.log` with timestamps. Reports contain no timestamps, so rerunning
//! a config reproduces them byte for byte. Exit status is 0 when every
//! assertable check passes, 1 when a check fails or the run errors, and 2 when
//! the config is rejected.

mod config;
mod report;
mod suites;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::Value;

pub use config::{Command, ExperimentConfig, Format};
pub use report::{Cell, Report};

use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "duality-lab", version, about = "Verify duality relations between population-genetics processes")]
pub struct Args {
    /// check-algebra, check-exact, check-pointwise, run-mc or reproduce-examples
    pub command: String,
    /// Flat JSON object of parameters; omitted keys take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long)]
    pub out: Option<String>,
    /// csv or json (overrides `format`).
    #[arg(long)]
    pub format: Option<String>,
    /// Random seed for run-mc (overrides `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Outcome of one run.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub report_path: PathBuf,
    pub status: i32,
}

/// Resolves the config for `args`, reading the config file if given.
pub fn resolve(args: &Args) -> Result<ExperimentConfig> {
    let command: Command = args.command.parse()?;
    let text = match &args.config {
        Some(p) => Some(fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?),
        None => None,
    };
    let mut overrides: Vec<(&str, Value)> = Vec::new();
    if let Some(o) = &args.out {
        overrides.push(("out", Value::String(o.clone())));
    }
    if let Some(f) = &args.format {
        overrides.push(("format", Value::String(f.clone())));
    }
    if let Some(s) = args.seed {
        if command != Command::RunMc {
            return Err(Error::Config(format!("--seed applies to run-mc only, not {command}")));
        }
        overrides.push(("seed", Value::from(s)));
    }
    ExperimentConfig::resolve(command, text.as_deref(), &overrides)
}

/// Runs the suite for `cfg` and computes its report.
pub fn execute(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.command {
        Command::CheckAlgebra => suites::check_algebra(cfg),
        Command::CheckExact => suites::check_exact(cfg),
        Command::CheckPointwise => suites::check_pointwise(cfg),
        Command::RunMc => suites::run_mc(cfg),
        Command::ReproduceExamples => suites::reproduce_examples(cfg),
    }
}

/// Executes `cfg` and writes the report and log into its output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let started = Instant::now();
    let out = Path::new(cfg.out()?).to_path_buf();
    fs::create_dir_all(&out)?;
    let mut log = fs::File::create(out.join("run.log"))?;
    let config_json = cfg.canonical_json();
    writeln!(log, "{} start {}", timestamp(), cfg.command)?;
    writeln!(log, "{} config {config_json}", timestamp())?;
    let report = match execute(cfg) {
        Ok(r) => r,
        Err(e) => {
            writeln!(log, "{} error {e}", timestamp())?;
            return Err(e);
        }
    };
    let (name, body) = match cfg.format()? {
        Format::Csv => ("report.csv", report.to_csv(&config_json)?),
        Format::Json => ("report.json", report.to_json(&config_json)?),
    };
    let report_path = out.join(name);
    fs::write(&report_path, body)?;
    // Discrepancies in the worked examples are reported, never fatal.
    let status = if report.ok || cfg.command == Command::ReproduceExamples { EXIT_OK } else { EXIT_CHECK_FAILED };
    writeln!(
        log,
        "{} done status={status} rows={} elapsed={:.3}s report={}",
        timestamp(),
        report.rows.len(),
        started.elapsed().as_secs_f64(),
        report_path.display()
    )?;
    Ok(Outcome { report, report_path, status })
}

fn timestamp() -> String {
    let d = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
    format!("{}.{:03}", d.as_secs(), d.subsec_millis())
}

/// Status code for an error: rejected config values are 2, everything else 1.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::InvalidParameter(_) => EXIT_CONFIG,
        _ => EXIT_CHECK_FAILED,
    }
}

/// Parses `argv`, runs, prints the table and returns the exit status.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cfg = match resolve(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("duality-lab: {e}");
            return EXIT_CONFIG;
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            print!("{}", outcome.report.to_table());
            println!("report: {}", outcome.report_path.display());
            if outcome.status != EXIT_OK {
                eprintln!("duality-lab: at least one check failed");
            }
            outcome.status
        }
        Err(e) => {
            eprintln!("duality-lab: {e}");
            exit_code(&e)
        }
    }
}
