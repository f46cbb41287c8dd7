//! Double-DQN agent: experience replay, ε-greedy behavior with feasibility
//! masking, and the training loop.

mod ddqn;
mod replay;

pub use ddqn::{double_q_target, epsilon_at, select_action, train, AgentConfig, TrainOutput};
pub use replay::{Experience, ReplayMemory};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Env(#[from] crate::env::EnvError),
    #[error(transparent)]
    Nn(#[from] crate::nn::NnError),
}
