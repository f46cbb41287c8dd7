//! A small dense Q-network trained by hand-rolled backprop and Adam.
//!
//! The architecture is fixed by the problem: the input encodes the system
//! state (two features per device), rectifier hidden layers, and a linear
//! output with one Q-value per point of the full action grid. The loss is
//! mean squared error on the output unit of each sample's taken action only.

mod adam;
mod encode;
mod gradcheck;
mod io;
mod network;

pub use adam::{AdamParams, AdamState};
pub use encode::encode_state;
pub use gradcheck::grad_check;
pub use network::{Gradients, QNetwork, SelectedSample};

use thiserror::Error;

/// Errors from network construction, evaluation, and parameter I/O.
#[derive(Debug, Error)]
pub enum NnError {
    #[error("input length {got} does not match network input size {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("output index {index} out of range for output size {size}")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("batch must not be empty")]
    EmptyBatch,
    #[error("gradient/optimizer shapes do not match the network")]
    ShapeMismatch,
    #[error("invalid parameter file: {0}")]
    InvalidFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
