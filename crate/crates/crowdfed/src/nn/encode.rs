//! State featurization for the Q-network.

use crate::env::{Config, SystemState};

/// Encodes a state as a length-2N vector of per-device features
/// `[f₁/F₁, c₁/C₁, …]`, each in [0, 1].
pub fn encode_state(state: &SystemState, cfg: &Config) -> Vec<f64> {
    let mut features = Vec::with_capacity(2 * state.devices.len());
    for (dev, p) in state.devices.iter().zip(cfg.devices()) {
        features.push(f64::from(dev.cpu_shares) / f64::from(p.max_cpu_shares));
        features.push(f64::from(dev.energy_units) / f64::from(p.energy_capacity));
    }
    features
}
