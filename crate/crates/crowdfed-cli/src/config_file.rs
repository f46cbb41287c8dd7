//! Flat key/value configuration files.
//!
//! The format is TOML restricted to dotted scalar keys — every line is
//! `section.key = value` (arrays allowed), e.g.:
//!
//! ```text
//! env.num_devices = 3
//! env.arrival_rate = 2.0
//! env.data_quality = [2.0, 1.0, 1.0]
//! agent.episodes = 500
//! experiment.scheme = "ddqn"
//! experiment.seeds = [1, 2, 3, 4, 5]
//! ```
//!
//! Every key is optional and defaults to the values below; CLI flags
//! override file values.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crowdfed::agent::AgentConfig;
use crowdfed::env::{DeviceParams, EnvParams, RewardWeights};

use crate::experiment::{ExperimentSpec, Scheme};
use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub env: EnvSection,
    pub agent: AgentSection,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub num_devices: usize,
    pub energy_unit_joules: f64,
    pub cpu_share_hz: f64,
    pub cycles_per_data_unit: f64,
    pub switched_capacitance: f64,
    pub arrival_rate: f64,
    pub discount: f64,
    pub reward_weight_data: f64,
    pub reward_weight_latency: f64,
    pub reward_weight_energy: f64,
    pub max_data: u32,
    pub energy_capacity: u32,
    pub max_cpu_shares: u32,
    pub transmission_time_s: f64,
    /// Per-device quality weights; a single value is broadcast to all
    /// devices.
    pub data_quality: Vec<f64>,
}

impl Default for EnvSection {
    fn default() -> Self {
        let p = EnvParams::default();
        let d = p.devices[0];
        Self {
            num_devices: p.devices.len(),
            energy_unit_joules: p.energy_unit_joules,
            cpu_share_hz: p.cpu_share_hz,
            cycles_per_data_unit: p.cycles_per_data_unit,
            switched_capacitance: p.switched_capacitance,
            arrival_rate: p.arrival_rate,
            discount: p.discount,
            reward_weight_data: p.reward_weights.data,
            reward_weight_latency: p.reward_weights.latency,
            reward_weight_energy: p.reward_weights.energy,
            max_data: d.max_data,
            energy_capacity: d.energy_capacity,
            max_cpu_shares: d.max_cpu_shares,
            transmission_time_s: d.transmission_time_s,
            data_quality: vec![d.quality],
        }
    }
}

impl EnvSection {
    pub fn to_params(&self) -> Result<EnvParams, HarnessError> {
        if self.num_devices == 0 {
            return Err(HarnessError::InvalidSpec(
                "env.num_devices must be >= 1".to_string(),
            ));
        }
        let quality = match self.data_quality.len() {
            1 => vec![self.data_quality[0]; self.num_devices],
            n if n == self.num_devices => self.data_quality.clone(),
            n => {
                return Err(HarnessError::InvalidSpec(format!(
                    "env.data_quality has {n} entries but num_devices = {}",
                    self.num_devices
                )))
            }
        };
        let devices = quality
            .into_iter()
            .map(|q| DeviceParams {
                quality: q,
                max_data: self.max_data,
                energy_capacity: self.energy_capacity,
                max_cpu_shares: self.max_cpu_shares,
                transmission_time_s: self.transmission_time_s,
            })
            .collect();
        Ok(EnvParams {
            energy_unit_joules: self.energy_unit_joules,
            cpu_share_hz: self.cpu_share_hz,
            cycles_per_data_unit: self.cycles_per_data_unit,
            switched_capacitance: self.switched_capacitance,
            arrival_rate: self.arrival_rate,
            discount: self.discount,
            reward_weights: RewardWeights {
                data: self.reward_weight_data,
                latency: self.reward_weight_latency,
                energy: self.reward_weight_energy,
            },
            devices,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentSection {
    pub gamma: f64,
    pub batch_size: usize,
    pub target_reset_period: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_fraction: f64,
    pub episodes: usize,
    pub iterations_per_episode: usize,
    pub replay_capacity: usize,
    pub learning_rate: f64,
}

impl Default for AgentSection {
    fn default() -> Self {
        let a = AgentConfig::default();
        Self {
            gamma: a.gamma,
            batch_size: a.batch_size,
            target_reset_period: a.target_reset_period,
            epsilon_start: a.epsilon_start,
            epsilon_end: a.epsilon_end,
            epsilon_decay_fraction: a.epsilon_decay_fraction,
            episodes: a.episodes,
            iterations_per_episode: a.iterations_per_episode,
            replay_capacity: a.replay_capacity,
            learning_rate: a.learning_rate,
        }
    }
}

impl AgentSection {
    pub fn to_agent_config(&self, seed: u64) -> AgentConfig {
        AgentConfig {
            gamma: self.gamma,
            batch_size: self.batch_size,
            target_reset_period: self.target_reset_period,
            epsilon_start: self.epsilon_start,
            epsilon_end: self.epsilon_end,
            epsilon_decay_fraction: self.epsilon_decay_fraction,
            episodes: self.episodes,
            iterations_per_episode: self.iterations_per_episode,
            replay_capacity: self.replay_capacity,
            learning_rate: self.learning_rate,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub scheme: String,
    pub seeds: Vec<u64>,
    pub output: String,
    pub window: usize,
    pub sweep_values: Vec<f64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            scheme: "ddqn".to_string(),
            seeds: vec![1, 2, 3, 4, 5],
            output: "metrics.csv".to_string(),
            window: 50,
            sweep_values: vec![1.0, 1.5, 2.0, 2.5, 3.0],
        }
    }
}

impl FileConfig {
    pub fn to_spec(&self) -> Result<ExperimentSpec, HarnessError> {
        let scheme = Scheme::from_str(&self.experiment.scheme)
            .map_err(HarnessError::InvalidSpec)?;
        let spec = ExperimentSpec {
            env: self.env.to_params()?,
            agent: self.agent.to_agent_config(0),
            scheme,
            seeds: self.experiment.seeds.clone(),
            output: self.experiment.output.clone().into(),
            window: self.experiment.window,
            sweep_values: self.experiment.sweep_values.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Parses a config file, rejecting unknown keys.
pub fn load_config(path: &Path) -> Result<FileConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::ConfigFile {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text).map_err(|message| HarnessError::ConfigFile {
        path: path.display().to_string(),
        message,
    })
}

pub fn parse_config(text: &str) -> Result<FileConfig, String> {
    toml::from_str(text).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = FileConfig::default();
        let text = cfg.to_toml();
        let parsed = parse_config(&text).unwrap();
        assert_eq!(cfg, parsed);
    }

    #[test]
    fn dotted_flat_keys_parse() {
        let cfg = parse_config(
            "env.num_devices = 2\nenv.arrival_rate = 1.5\nagent.episodes = 7\nexperiment.scheme = \"greedy\"\nexperiment.seeds = [9]\n",
        )
        .unwrap();
        assert_eq!(cfg.env.num_devices, 2);
        assert_eq!(cfg.env.arrival_rate, 1.5);
        assert_eq!(cfg.agent.episodes, 7);
        assert_eq!(cfg.experiment.scheme, "greedy");
        assert_eq!(cfg.experiment.seeds, vec![9]);
        // untouched keys keep their defaults
        assert_eq!(cfg.env.max_data, 3);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse_config("env.num_device = 3\n").is_err());
        assert!(parse_config("typo.section = 1\n").is_err());
    }

    #[test]
    fn quality_broadcast_and_mismatch() {
        let mut section = EnvSection::default();
        section.num_devices = 3;
        section.data_quality = vec![2.0];
        let params = section.to_params().unwrap();
        assert!(params.devices.iter().all(|d| d.quality == 2.0));

        section.data_quality = vec![2.0, 1.0];
        assert!(section.to_params().is_err());

        section.data_quality = vec![2.0, 1.0, 0.5];
        let params = section.to_params().unwrap();
        assert_eq!(params.devices[2].quality, 0.5);
    }

    #[test]
    fn bad_scheme_rejected() {
        let mut cfg = FileConfig::default();
        cfg.experiment.scheme = "dql".to_string();
        assert!(cfg.to_spec().is_err());
    }
}
