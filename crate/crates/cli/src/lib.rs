//! Experiment driver for the `prequant-core` probes.
//!
//! A run reads one [`config::ExperimentConfig`], executes the named sweep,
//! and produces a [`report::Report`]: CSV rows with the columns
//! [`report::CSV_COLUMNS`] plus a JSON document carrying the configuration,
//! every row, and a [`summary::Summary`].

pub mod config;
pub mod experiments;
pub mod report;
pub mod summary;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use config::ExperimentConfig;
use report::{Report, Row};

/// Process exit status when every row passes.
pub const EXIT_PASS: i32 = 0;
/// Process exit status when a row fails its criterion or errors.
pub const EXIT_FAIL: i32 = 1;
/// Process exit status for unreadable or invalid configurations.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Executes the sweep on `jobs` worker threads (all cores when `None`).
/// Rows come out in plan order whatever the thread count.
pub fn run(config: &ExperimentConfig, jobs: Option<usize>) -> Result<Report, ConfigError> {
    config.validate()?;
    let plan = experiments::plan(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| ConfigError::Invalid(format!("cannot start {jobs:?} workers: {e}")))?;
    let rows: Vec<Row> = pool.install(|| plan.par_iter().map(|job| job()).collect::<Vec<_>>()).into_iter().flatten().collect();
    let summary = summary::summarize(&rows);
    Ok(Report {
        experiment: config.experiment.to_string(),
        config: config.clone(),
        rows,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`, creating it if needed.
pub fn write_report(report: &Report, dir: &Path) -> io::Result<OutputPaths> {
    fs::create_dir_all(dir)?;
    let stem = report.config.output.stem.clone().unwrap_or_else(|| report.experiment.clone());
    let paths = OutputPaths {
        csv: dir.join(format!("{stem}.csv")),
        json: dir.join(format!("{stem}.json")),
    };
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(io::Error::other)?;
    fs::write(&paths.csv, csv)?;
    fs::write(&paths.json, report.to_json())?;
    Ok(paths)
}

pub fn read_report(path: &Path) -> Result<Report, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))
}
