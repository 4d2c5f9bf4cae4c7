//! Result files: one CSV row per simulation and a JSON summary.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::ResultRow;
use super::HarnessError;

#[derive(Serialize)]
struct CsvRecord<'a> {
    index: usize,
    total: Option<f64>,
    failure: &'a str,
    delta: Option<f64>,
    solve_seconds: Option<f64>,
    backups: Option<usize>,
    episodes: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    mean: f64,
    two_se: f64,
    n: usize,
    failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    epsilon_sweep: &'a [(f64, f64)],
    #[serde(skip_serializing_if = "Option::is_none")]
    episode_means: Option<&'a [f64]>,
}

pub fn write_csv(row: &ResultRow, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in &row.records {
        w.serialize(CsvRecord {
            index: r.index,
            total: r.failure.is_none().then_some(r.total),
            failure: r.failure.as_deref().unwrap_or(""),
            delta: r.delta,
            solve_seconds: r.solve_seconds,
            backups: r.backups,
            episodes: r.episode_rewards.len(),
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_json(cfg: &ExperimentConfig, row: &ResultRow) -> Result<String, HarnessError> {
    Ok(serde_json::to_string_pretty(&Summary {
        config: cfg,
        mean: row.mean,
        two_se: row.two_se,
        n: row.n,
        failures: row.failures,
        epsilon: row.epsilon,
        epsilon_sweep: &row.epsilon_sweep,
        episode_means: row.episode_means.as_deref(),
    })?)
}

/// Writes `<stem>.csv` and `<stem>.json`, returning both paths.
pub fn write_results(cfg: &ExperimentConfig, row: &ResultRow, stem: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let csv_path = stem.with_extension("csv");
    let json_path = stem.with_extension("json");
    write_csv(row, &csv_path)?;
    std::fs::write(&json_path, summary_json(cfg, row)?)?;
    Ok((csv_path, json_path))
}
