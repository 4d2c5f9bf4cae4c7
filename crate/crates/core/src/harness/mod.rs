//! Experiment orchestration: configs, seed derivation, parallel simulation
//! batches, statistics and result files.

mod config;
mod output;
mod presets;
mod run;
mod seed;
mod stats;

use thiserror::Error;

use crate::mcbrl::McbrlError;

pub use config::{default_epsilon_grid, AlgorithmKey, ExperimentConfig};
pub use output::{summary_json, write_csv, write_results};
pub use presets::{run_table, table1, table2, table3, Scale, CHAIN_STEPS, IPD_PLAYS, IPD_STEPS, TIGER_EPISODES, TIGER_MAX_STEPS};
pub use run::{
    learning_curve, run_experiment, simulate, worker_pool, ResultRow, ResultTable, SimulationRecord, WORKERS_VAR,
};
pub use seed::{child_seed, Phase};
pub use stats::{episode_means, summarize};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("statistics: {0}")]
    Stats(String),
    #[error(transparent)]
    Mcbrl(#[from] McbrlError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("config parse: {0}")]
    TomlParse(#[from] toml::de::Error),
    #[error("config write: {0}")]
    TomlWrite(#[from] toml::ser::Error),
}
