//! The resource-management MDP.
//!
//! State: per-device CPU shares and stored energy units. Action: per-device
//! data and energy allotments, constrained by battery level and by the CPU
//! frequency the training workload would demand. Reward: weighted accumulated
//! data minus normalized energy and latency costs. Transitions: Poisson
//! energy arrivals truncated at battery capacity, uniformly resampled CPU
//! shares.

mod config;
mod dynamics;
mod feasible;
mod reward;
mod state;

pub use config::{Config, DeviceParams, EnvParams, Normalizers, RewardWeights};
pub use dynamics::{poisson_pmf, sample_poisson, StepMetrics, StepOutcome};
pub use feasible::FeasibleTable;
pub use reward::RewardTerms;
pub use state::{Allocation, DeviceState, JointAction, SystemState};

use thiserror::Error;

/// Errors produced by environment construction and queries.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("action is infeasible in the given state")]
    Infeasible,
    #[error("index {index} out of range for space of size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("expected {expected} devices, got {got}")]
    DeviceCountMismatch { expected: usize, got: usize },
    #[error("component out of grid bounds for device {device}")]
    OutOfBounds { device: usize },
    #[error("instance too large: {entries} entries exceeds limit {limit}")]
    TooLarge { entries: usize, limit: usize },
}
