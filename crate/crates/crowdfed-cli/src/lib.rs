//! Experiment harness: configuration files, scheme execution over replicate
//! seeds, convergence summaries, and CSV emission.

pub mod config_file;
pub mod csv;
pub mod experiment;

pub use config_file::{load_config, FileConfig};
pub use experiment::{
    converged_stats, moving_average, run_experiment, run_quality_sweep, ConvergedStats,
    ExperimentSpec, MetricRow, Scheme, SchemeSummary, SweepOutcome, SweepPoint,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("config file {path}: {message}")]
    ConfigFile { path: String, message: String },
    #[error(transparent)]
    Env(#[from] crowdfed::env::EnvError),
    #[error(transparent)]
    Agent(#[from] crowdfed::agent::AgentError),
    #[error(transparent)]
    Baseline(#[from] crowdfed::baselines::BaselineError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
