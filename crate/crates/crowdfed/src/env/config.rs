//! Environment configuration: physical constants, per-device limits, reward
//! weights, and the normalizers derived from them.

use super::EnvError;

/// Scale factors applied to the normalized reward components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    /// Weight on accumulated data (positive contribution).
    pub data: f64,
    /// Weight on round latency (cost).
    pub latency: f64,
    /// Weight on total energy spent (cost).
    pub energy: f64,
}

impl Default for RewardWeights {
    /// Weights under which harvesting data is actually worthwhile: with all
    /// three at 1.0 every feasible training action has negative reward at
    /// desk-scale constants and never training becomes optimal.
    fn default() -> Self {
        Self {
            data: 1.0,
            latency: 0.8,
            energy: 0.3,
        }
    }
}

/// Static per-device parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParams {
    /// Data quality weight η of this device's local data.
    pub quality: f64,
    /// Maximum data units the device can train in one round (D).
    pub max_data: u32,
    /// Energy storage capacity in energy units (C).
    pub energy_capacity: u32,
    /// Maximum number of CPU shares (F).
    pub max_cpu_shares: u32,
    /// Fixed model download + upload time in seconds.
    pub transmission_time_s: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self {
            quality: 1.0,
            max_data: 3,
            energy_capacity: 3,
            max_cpu_shares: 3,
            transmission_time_s: 5.0,
        }
    }
}

/// Maximum values of the three reward components, used to normalize them.
///
/// Computed once at [`Config`] construction and never mutated afterwards:
///
/// - `data`: weighted data with every device at its cap, Σηₙ·Dₙ / Σηₙ.
/// - `energy`: all batteries fully drained, Σₙ Cₙ.
/// - `latency`: the slowest feasible round — max data trained on a single
///   energy unit, maxₙ(√(τ·ν³·Dₙ³/δ) + tₙ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalizers {
    pub data: f64,
    pub energy: f64,
    pub latency: f64,
}

/// Raw environment parameters, validated into a [`Config`] by
/// [`Config::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct EnvParams {
    /// Joules per energy unit (δ).
    pub energy_unit_joules: f64,
    /// CPU cycles per second contributed by one CPU share (μ).
    pub cpu_share_hz: f64,
    /// CPU cycles needed to train one data unit (ν).
    pub cycles_per_data_unit: f64,
    /// Effective switched capacitance of the device chips (τ).
    pub switched_capacitance: f64,
    /// Mean energy units charged per round (ω, Poisson rate).
    pub arrival_rate: f64,
    /// Discount factor γ of the MDP.
    pub discount: f64,
    /// Reward scale factors.
    pub reward_weights: RewardWeights,
    /// Per-device parameters; the length sets the number of devices.
    pub devices: Vec<DeviceParams>,
}

impl Default for EnvParams {
    /// Three identical devices with the desk-scale constants: δ=1 J,
    /// μ=0.6 GHz, ν=10¹⁰ cycles, τ=10⁻²⁸, γ=0.9, capacities of 3.
    fn default() -> Self {
        Self {
            energy_unit_joules: 1.0,
            cpu_share_hz: 0.6e9,
            cycles_per_data_unit: 1e10,
            switched_capacitance: 1e-28,
            arrival_rate: 2.0,
            discount: 0.9,
            reward_weights: RewardWeights::default(),
            devices: vec![DeviceParams::default(); 3],
        }
    }
}

impl EnvParams {
    /// Validates the parameters and derives the normalizers.
    pub fn build(self) -> Result<Config, EnvError> {
        Config::new(self)
    }
}

/// A validated environment. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    params: EnvParams,
    norm: Normalizers,
}

impl Config {
    pub fn new(params: EnvParams) -> Result<Self, EnvError> {
        validate(&params)?;
        let norm = normalizers(&params);
        Ok(Self { params, norm })
    }

    pub fn num_devices(&self) -> usize {
        self.params.devices.len()
    }

    pub fn devices(&self) -> &[DeviceParams] {
        &self.params.devices
    }

    pub fn device(&self, n: usize) -> &DeviceParams {
        &self.params.devices[n]
    }

    /// δ — joules per energy unit.
    pub fn energy_unit_joules(&self) -> f64 {
        self.params.energy_unit_joules
    }

    /// μ — cycles per second per CPU share.
    pub fn cpu_share_hz(&self) -> f64 {
        self.params.cpu_share_hz
    }

    /// ν — cycles per data unit.
    pub fn cycles_per_data_unit(&self) -> f64 {
        self.params.cycles_per_data_unit
    }

    /// τ — effective switched capacitance.
    pub fn switched_capacitance(&self) -> f64 {
        self.params.switched_capacitance
    }

    /// ω — mean energy units charged per round.
    pub fn arrival_rate(&self) -> f64 {
        self.params.arrival_rate
    }

    /// γ — discount factor.
    pub fn discount(&self) -> f64 {
        self.params.discount
    }

    pub fn reward_weights(&self) -> &RewardWeights {
        &self.params.reward_weights
    }

    pub fn normalizers(&self) -> &Normalizers {
        &self.norm
    }

    /// The raw parameters this config was built from.
    pub fn params(&self) -> &EnvParams {
        &self.params
    }
}

impl Default for Config {
    fn default() -> Self {
        Config::new(EnvParams::default()).expect("default params are valid")
    }
}

fn validate(p: &EnvParams) -> Result<(), EnvError> {
    let bad = |msg: &str| Err(EnvError::InvalidConfig(msg.to_string()));
    if p.devices.is_empty() {
        return bad("at least one device is required");
    }
    if !(p.energy_unit_joules > 0.0) {
        return bad("energy_unit_joules must be > 0");
    }
    if !(p.cpu_share_hz > 0.0) {
        return bad("cpu_share_hz must be > 0");
    }
    if !(p.cycles_per_data_unit > 0.0) {
        return bad("cycles_per_data_unit must be > 0");
    }
    if !(p.switched_capacitance > 0.0) {
        return bad("switched_capacitance must be > 0");
    }
    if !(p.arrival_rate >= 0.0 && p.arrival_rate.is_finite()) {
        return bad("arrival_rate must be finite and >= 0");
    }
    if !(p.discount >= 0.0 && p.discount < 1.0) {
        return bad("discount must lie in [0, 1)");
    }
    let w = &p.reward_weights;
    if !(w.data >= 0.0 && w.latency >= 0.0 && w.energy >= 0.0)
        || !(w.data.is_finite() && w.latency.is_finite() && w.energy.is_finite())
    {
        return bad("reward weights must be finite and >= 0");
    }
    for (n, d) in p.devices.iter().enumerate() {
        if !(d.quality > 0.0 && d.quality.is_finite()) {
            return Err(EnvError::InvalidConfig(format!(
                "device {n}: quality must be finite and > 0"
            )));
        }
        if d.max_data < 1 || d.energy_capacity < 1 || d.max_cpu_shares < 1 {
            return Err(EnvError::InvalidConfig(format!(
                "device {n}: all caps must be >= 1"
            )));
        }
        if !(d.transmission_time_s >= 0.0 && d.transmission_time_s.is_finite()) {
            return Err(EnvError::InvalidConfig(format!(
                "device {n}: transmission_time_s must be finite and >= 0"
            )));
        }
    }
    Ok(())
}

fn normalizers(p: &EnvParams) -> Normalizers {
    let quality_sum: f64 = p.devices.iter().map(|d| d.quality).sum();
    let data = p
        .devices
        .iter()
        .map(|d| d.quality * f64::from(d.max_data))
        .sum::<f64>()
        / quality_sum;
    let energy = p
        .devices
        .iter()
        .map(|d| f64::from(d.energy_capacity))
        .sum();
    let nu = p.cycles_per_data_unit;
    let latency = p
        .devices
        .iter()
        .map(|d| {
            let dmax = f64::from(d.max_data);
            let slowest =
                (p.switched_capacitance * nu * nu * nu * dmax * dmax * dmax / p.energy_unit_joules)
                    .sqrt();
            slowest + d.transmission_time_s
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Normalizers {
        data,
        energy,
        latency,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_builds() {
        let cfg = Config::default();
        assert_eq!(cfg.num_devices(), 3);
        assert_eq!(cfg.device(0).max_data, 3);
    }

    #[test]
    fn normalizers_match_hand_computation() {
        // Symmetric Table-style setup: D_max = 3, E_max = 9,
        // L_max = sqrt(1e-28 * 1e30 * 27) + 5 = sqrt(2700) + 5.
        let cfg = Config::default();
        let n = cfg.normalizers();
        assert!((n.data - 3.0).abs() < 1e-12);
        assert!((n.energy - 9.0).abs() < 1e-12);
        assert!((n.latency - (2700.0_f64.sqrt() + 5.0)).abs() < 1e-9);
    }

    #[test]
    fn normalizers_strictly_positive() {
        let mut params = EnvParams::default();
        params.devices[1].quality = 0.25;
        params.devices[2].max_data = 1;
        let cfg = params.build().unwrap();
        let n = cfg.normalizers();
        assert!(n.data > 0.0 && n.energy > 0.0 && n.latency > 0.0);
    }

    #[test]
    fn asymmetric_quality_weights_data_normalizer() {
        let mut params = EnvParams::default();
        params.devices[0].quality = 2.0;
        let cfg = params.build().unwrap();
        // (2*3 + 3 + 3) / 4 = 3
        assert!((cfg.normalizers().data - 3.0).abs() < 1e-12);
        params = cfg.params().clone();
        params.devices[0].max_data = 1;
        let cfg = params.build().unwrap();
        // (2*1 + 3 + 3) / 4 = 2
        assert!((cfg.normalizers().data - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut p = EnvParams::default();
        p.discount = 1.0;
        assert!(matches!(p.build(), Err(EnvError::InvalidConfig(_))));

        let mut p = EnvParams::default();
        p.devices[0].quality = 0.0;
        assert!(p.build().is_err());

        let mut p = EnvParams::default();
        p.devices[2].max_cpu_shares = 0;
        assert!(p.build().is_err());

        let mut p = EnvParams::default();
        p.devices.clear();
        assert!(p.build().is_err());

        let mut p = EnvParams::default();
        p.arrival_rate = -1.0;
        assert!(p.build().is_err());
    }
}
