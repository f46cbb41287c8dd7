//! Simulation and learning toolkit for server-side resource management in
//! crowd-sourced federated training.
//!
//! A server coordinates a fleet of battery-powered mobile devices that train a
//! shared model. Each round it decides how many data units and energy units
//! every device should spend, trading off accumulated data against total
//! energy consumption and round latency. Device batteries recharge randomly
//! and CPU availability fluctuates, so the decision problem is a discounted
//! Markov decision process.
//!
//! The crate provides:
//!
//! - [`env`] — the MDP itself: device/state/action types, feasibility rules,
//!   reward, stochastic step dynamics, and the exact transition distribution.
//! - [`nn`] — a small dense Q-network with backprop, Adam, and a
//!   finite-difference gradient checker.
//! - [`agent`] — a double-DQN training loop with experience replay,
//!   feasibility-masked action selection, and a target network.
//! - [`baselines`] — greedy and random policies, tabular Q-learning, and an
//!   exact value-iteration solver for small instances.
//!
//! Everything is deterministic given a seed: all randomness flows through a
//! single [`SimRng`] per run.

pub mod agent;
pub mod baselines;
pub mod env;
pub mod nn;
pub mod rollout;

mod rng;

pub use rng::SimRng;
