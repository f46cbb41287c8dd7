//! Non-learning policies and exact small-instance solvers used as
//! comparison points and oracles: a greedy allocator, a per-device uniform
//! random allocator, tabular Q-learning, and value iteration.

mod policies;
mod qtable;
mod value_iteration;

pub use policies::{greedy_action, random_action};
pub use qtable::{tabular_q_learning, QTable, StepSize, TabularConfig};
pub use value_iteration::{bellman_residual, optimal_q_table, value_iteration, ValueIterationResult};

use thiserror::Error;

/// Largest state-action table the tabular methods will allocate.
pub const MAX_TABLE_ENTRIES: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("instance too large to tabulate: {entries} state-action entries exceeds {limit}")]
    TooLarge { entries: usize, limit: usize },
    #[error(transparent)]
    Env(#[from] crate::env::EnvError),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}
