//! Reward: weighted accumulated data minus normalized latency and energy.

use super::{Config, EnvError, JointAction, SystemState};

/// The three raw reward components of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardTerms {
    /// Quality-weighted accumulated data D = Σηₙdₙ / Σηₙ.
    pub data: f64,
    /// Total energy units spent, E = Σeₙ.
    pub energy: f64,
    /// Round latency L = maxₙ Lₙ in seconds; idle devices contribute 0.
    pub latency: f64,
}

impl Config {
    /// Wall-clock training time νd/f̄ in seconds for one device, which
    /// simplifies to √(τ·ν³·d³/(δ·e)). Zero for the idle request.
    pub fn training_time(&self, data_units: u32, energy_units: u32) -> f64 {
        if data_units == 0 {
            return 0.0;
        }
        let cycles = self.cycles_per_data_unit() * f64::from(data_units);
        cycles / self.required_cpu_freq(data_units, energy_units)
    }

    /// Computes (D, E, L) for a feasible action.
    pub fn reward_components(
        &self,
        state: &SystemState,
        action: &JointAction,
    ) -> Result<RewardTerms, EnvError> {
        if !self.action_feasible(state, action) {
            return Err(EnvError::Infeasible);
        }
        let quality_sum: f64 = self.devices().iter().map(|d| d.quality).sum();
        let mut weighted_data = 0.0;
        let mut energy = 0.0;
        let mut latency = 0.0_f64;
        for (n, a) in action.allocations.iter().enumerate() {
            let p = self.device(n);
            weighted_data += p.quality * f64::from(a.data_units);
            energy += f64::from(a.energy_units);
            if a.data_units > 0 {
                let l = self.training_time(a.data_units, a.energy_units) + p.transmission_time_s;
                latency = latency.max(l);
            }
        }
        Ok(RewardTerms {
            data: weighted_data / quality_sum,
            energy,
            latency,
        })
    }

    /// Weighted normalized reward for already-computed components.
    pub fn reward_from_terms(&self, terms: &RewardTerms) -> f64 {
        let w = self.reward_weights();
        let n = self.normalizers();
        w.data * terms.data / n.data
            - w.latency * terms.latency / n.latency
            - w.energy * terms.energy / n.energy
    }

    /// R(s, a) for a feasible action.
    pub fn reward(&self, state: &SystemState, action: &JointAction) -> Result<f64, EnvError> {
        Ok(self.reward_from_terms(&self.reward_components(state, action)?))
    }
}
