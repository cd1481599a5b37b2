//! Batch front end: strict JSON experiment configs, deterministic reports and
//! an exit-code contract.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | ran; any hypothesis failure was the expected one |
//! | 1 | diagnostic failure (e.g. insufficient spread for a fit) |
//! | 2 | invalid config, unreadable input or unwritable output |
//! | 3 | degenerate basis |
//! | 4 | violation or verdict mismatch where none was expected |

pub mod commands;
pub mod config;
pub mod error;
pub mod examples;
pub mod report;

use std::path::PathBuf;

use serde_json::Value;

pub use config::ExperimentConfig;
pub use error::CliError;

use crate::error::{EXIT_FAILURE, EXIT_VIOLATION};

pub const THREADS_ENV: &str = "SPR_LAB_THREADS";

/// What a run produced: the full report, where it went, and the exit code.
pub struct RunOutcome {
    pub report: Value,
    pub path: Option<PathBuf>,
    /// Report text when it was not written to a file.
    pub stdout: Option<String>,
    pub exit_code: i32,
    pub message: Option<String>,
}

fn out_path(config: &ExperimentConfig) -> Option<PathBuf> {
    match config {
        ExperimentConfig::Basis(_) => None,
        ExperimentConfig::Check(p) => Some(p.report.clone()),
        ExperimentConfig::Sidon(p) => Some(p.out.clone()),
        ExperimentConfig::Retrieve(p) => Some(p.out.clone()),
        ExperimentConfig::Stability(p) => Some(p.out.clone()),
        ExperimentConfig::Identity(p) => Some(p.out.clone()),
        ExperimentConfig::ReproduceExample(p) => p.out.clone(),
    }
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let seed = || match config {
        ExperimentConfig::Stability(p) => p.seed.unwrap_or_default(),
        ExperimentConfig::Identity(p) => p.seed.unwrap_or_default(),
        _ => 0,
    };
    let mut example = None;
    let mut diagnostic = None;
    let (results, unexpected) = match config {
        ExperimentConfig::Basis(p) => split(commands::run_basis(p)?),
        ExperimentConfig::Check(p) => split(commands::run_check(p)?),
        ExperimentConfig::Sidon(p) => split(commands::run_sidon(p)?),
        ExperimentConfig::Retrieve(p) => split(commands::run_retrieve(p)?),
        ExperimentConfig::Stability(p) => {
            let out = commands::run_stability(p, seed())?;
            diagnostic = out.diagnostic;
            (out.results, out.unexpected)
        }
        ExperimentConfig::Identity(p) => split(commands::run_identity(p, seed())?),
        ExperimentConfig::ReproduceExample(p) => {
            example = Some(p.target.name());
            let (results, ok) = examples::reproduce(p)?;
            let msg = (!ok).then(|| format!("{}: verdict does not match expectation", p.target.name()));
            (results, msg)
        }
    };

    let mut report = report::build(config, results, example);
    if let ExperimentConfig::Sidon(_) = config {
        for key in ["h", "method", "terms"] {
            report[key] = report["results"][key].clone();
        }
    }
    let path = out_path(config);
    let stdout = match config {
        ExperimentConfig::Basis(_) => Some(report::render(&report)?),
        _ => report::emit(&report, path.as_deref())?,
    };
    Ok(RunOutcome {
        report,
        path,
        stdout,
        exit_code: match (&unexpected, &diagnostic) {
            (Some(_), _) => EXIT_VIOLATION,
            (None, Some(_)) => EXIT_FAILURE,
            (None, None) => 0,
        },
        message: unexpected.or(diagnostic),
    })
}

fn split(o: commands::CommandOutput) -> (Value, Option<String>) {
    (o.results, o.unexpected)
}

/// `--threads` wins over the environment variable; neither means rayon's default.
pub fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) if !v.trim().is_empty() => Some(v.trim().parse().map_err(|_| {
                CliError::config(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))
            })?),
            _ => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(CliError::config("thread count must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(e.to_string()))?;
    }
    Ok(())
}
