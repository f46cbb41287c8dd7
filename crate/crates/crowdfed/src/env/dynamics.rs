//! Stochastic step dynamics and the exact transition distribution.
//!
//! Energy: c′ = min(c − e + A, C) with A ~ Poisson(ω). CPU: f′ ~ U{0,…,F},
//! independent of everything else. Devices evolve independently.

use rand::Rng;

use super::{Config, DeviceState, EnvError, JointAction, SystemState};

/// Everything measured inside one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    /// Quality-weighted accumulated data D.
    pub data: f64,
    /// Total energy units spent E.
    pub energy: f64,
    /// Round latency L in seconds.
    pub latency: f64,
    /// Data units taken from each device.
    pub data_units: Vec<u32>,
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: SystemState,
    pub reward: f64,
    pub metrics: StepMetrics,
}

/// Draws one Poisson(rate) sample by Knuth's multiplicative method.
///
/// Exact for the desk-scale rates used here (ω ≤ 10); cost grows linearly
/// with the rate.
pub fn sample_poisson<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u32 {
    assert!(rate >= 0.0, "poisson rate must be >= 0");
    if rate == 0.0 {
        return 0;
    }
    let threshold = (-rate).exp();
    let mut k = 0u32;
    let mut product = 1.0;
    loop {
        product *= rng.gen::<f64>();
        if product <= threshold {
            return k;
        }
        k += 1;
    }
}

/// Poisson probability mass e^{−rate}·rateᵏ/k!, computed iteratively.
pub fn poisson_pmf(rate: f64, k: u32) -> f64 {
    assert!(rate >= 0.0, "poisson rate must be >= 0");
    if rate == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let mut p = (-rate).exp();
    for i in 1..=k {
        p *= rate / f64::from(i);
    }
    p
}

impl Config {
    /// Samples one transition. Per device, in device order: the energy
    /// arrival is drawn first, then the new CPU share count.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &SystemState,
        action: &JointAction,
        rng: &mut R,
    ) -> Result<StepOutcome, EnvError> {
        let terms = self.reward_components(state, action)?;
        let reward = self.reward_from_terms(&terms);
        let mut devices = Vec::with_capacity(self.num_devices());
        for (n, (dev, a)) in state.devices.iter().zip(&action.allocations).enumerate() {
            let p = self.device(n);
            let arrival = sample_poisson(self.arrival_rate(), rng);
            let energy_units =
                (dev.energy_units - a.energy_units + arrival).min(p.energy_capacity);
            let cpu_shares = rng.gen_range(0..=p.max_cpu_shares);
            devices.push(DeviceState {
                cpu_shares,
                energy_units,
            });
        }
        Ok(StepOutcome {
            next_state: SystemState::new(devices),
            reward,
            metrics: StepMetrics {
                data: terms.data,
                energy: terms.energy,
                latency: terms.latency,
                data_units: action.allocations.iter().map(|a| a.data_units).collect(),
            },
        })
    }

    /// Per-device marginal over the next energy level: `(values, probs)`
    /// where values run from c − e up to the capacity, and the capacity
    /// absorbs the whole Poisson upper tail.
    pub(crate) fn energy_marginal(&self, n: usize, residual: u32) -> (Vec<u32>, Vec<f64>) {
        let cap = self.device(n).energy_capacity;
        let rate = self.arrival_rate();
        let mut values = Vec::new();
        let mut probs = Vec::new();
        let mut below_cap = 0.0;
        for v in residual..cap {
            let p = poisson_pmf(rate, v - residual);
            below_cap += p;
            values.push(v);
            probs.push(p);
        }
        values.push(cap);
        probs.push((1.0 - below_cap).max(0.0));
        (values, probs)
    }

    /// The exact distribution over next states for a feasible action.
    ///
    /// Enumerated as a product across devices (device 0 most significant,
    /// energy level before CPU shares); probabilities sum to 1 within 1e−12.
    pub fn transition_distribution(
        &self,
        state: &SystemState,
        action: &JointAction,
    ) -> Result<Vec<(SystemState, f64)>, EnvError> {
        if !self.action_feasible(state, action) {
            return Err(EnvError::Infeasible);
        }
        // Per device: the list of (DeviceState, probability) outcomes.
        let per_device: Vec<Vec<(DeviceState, f64)>> = state
            .devices
            .iter()
            .zip(&action.allocations)
            .enumerate()
            .map(|(n, (dev, a))| {
                let residual = dev.energy_units - a.energy_units;
                let (values, probs) = self.energy_marginal(n, residual);
                let shares = self.device(n).max_cpu_shares;
                let cpu_prob = 1.0 / f64::from(shares + 1);
                let mut outcomes = Vec::with_capacity(values.len() * (shares as usize + 1));
                for (&energy_units, &pe) in values.iter().zip(&probs) {
                    for cpu_shares in 0..=shares {
                        outcomes.push((
                            DeviceState {
                                cpu_shares,
                                energy_units,
                            },
                            pe * cpu_prob,
                        ));
                    }
                }
                outcomes
            })
            .collect();

        let total: usize = per_device.iter().map(Vec::len).product();
        let mut out = Vec::with_capacity(total);
        let mut current = vec![
            (
                DeviceState {
                    cpu_shares: 0,
                    energy_units: 0
                },
                0.0
            );
            per_device.len()
        ];
        joint_rec(&per_device, 0, &mut current, &mut out);
        Ok(out)
    }

    /// Start-of-episode state: full batteries, CPU shares drawn uniformly.
    pub fn initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> SystemState {
        SystemState::new(
            self.devices()
                .iter()
                .map(|p| DeviceState {
                    cpu_shares: rng.gen_range(0..=p.max_cpu_shares),
                    energy_units: p.energy_capacity,
                })
                .collect(),
        )
    }
}

fn joint_rec(
    per_device: &[Vec<(DeviceState, f64)>],
    depth: usize,
    current: &mut Vec<(DeviceState, f64)>,
    out: &mut Vec<(SystemState, f64)>,
) {
    if depth == per_device.len() {
        let prob: f64 = current.iter().map(|(_, p)| *p).product();
        let state = SystemState::new(current.iter().map(|(d, _)| *d).collect());
        out.push((state, prob));
        return;
    }
    for outcome in &per_device[depth] {
        current[depth] = *outcome;
        joint_rec(per_device, depth + 1, current, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Allocation, EnvParams};
    use crate::SimRng;
    use rand::SeedableRng;

    fn alloc(d: u32, e: u32) -> Allocation {
        Allocation {
            data_units: d,
            energy_units: e,
        }
    }

    #[test]
    fn poisson_zero_rate_is_degenerate() {
        let mut rng = SimRng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(sample_poisson(0.0, &mut rng), 0);
        }
        assert_eq!(poisson_pmf(0.0, 0), 1.0);
        assert_eq!(poisson_pmf(0.0, 3), 0.0);
    }

    #[test]
    fn poisson_moments() {
        let mut rng = SimRng::seed_from_u64(42);
        let n = 100_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| f64::from(sample_poisson(2.0, &mut rng)))
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        assert!((mean - 2.0).abs() < 0.05, "mean {mean}");
        assert!((var - 2.0).abs() < 0.1, "var {var}");
        let p0 = samples.iter().filter(|&&x| x == 0.0).count() as f64 / n as f64;
        assert!((p0 - (-2.0_f64).exp()).abs() < 0.01, "p0 {p0}");
    }

    #[test]
    fn pmf_matches_direct_formula() {
        for &rate in &[0.5_f64, 2.0, 5.0] {
            let mut fact = 1.0;
            for k in 0..15u32 {
                if k > 0 {
                    fact *= f64::from(k);
                }
                let direct = (-rate).exp() * f64::powi(rate, k as i32) / fact;
                assert!((poisson_pmf(rate, k) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn full_depletion_with_no_arrival() {
        let mut p = EnvParams::default();
        p.arrival_rate = 0.0;
        let cfg = p.build().unwrap();
        let state = SystemState::uniform(3, 3, 3);
        let action = JointAction::new(vec![alloc(3, 3); 3]);
        let mut rng = SimRng::seed_from_u64(1);
        let out = cfg.step(&state, &action, &mut rng).unwrap();
        for dev in &out.next_state.devices {
            assert_eq!(dev.energy_units, 0);
        }
    }

    #[test]
    fn step_preserves_bounds_and_floor() {
        let cfg = Config::default();
        let mut rng = SimRng::seed_from_u64(3);
        let state = SystemState::uniform(3, 3, 3);
        let action = JointAction::new(vec![alloc(3, 2), alloc(0, 0), alloc(1, 1)]);
        for _ in 0..5_000 {
            let out = cfg.step(&state, &action, &mut rng).unwrap();
            for (n, dev) in out.next_state.devices.iter().enumerate() {
                let p = cfg.device(n);
                let floor = state.devices[n].energy_units - action.allocations[n].energy_units;
                assert!(dev.energy_units >= floor);
                assert!(dev.energy_units <= p.energy_capacity);
                assert!(dev.cpu_shares <= p.max_cpu_shares);
            }
        }
    }

    #[test]
    fn arrival_mean_without_truncation() {
        // Large capacity so min(c - e + A, C) never clips: the mean of
        // c' - c + e must equal the arrival rate.
        let mut p = EnvParams::default();
        p.devices.truncate(1);
        p.devices[0].energy_capacity = 100;
        let cfg = p.build().unwrap();
        let state = SystemState::uniform(1, 3, 50);
        let action = JointAction::idle(1);
        let mut rng = SimRng::seed_from_u64(11);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let out = cfg.step(&state, &action, &mut rng).unwrap();
            sum += f64::from(out.next_state.devices[0].energy_units) - 50.0;
        }
        let mean = sum / f64::from(n);
        assert!((mean - 2.0).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn step_rejects_infeasible() {
        let cfg = Config::default();
        let state = SystemState::uniform(3, 0, 0);
        let action = JointAction::new(vec![alloc(1, 1), alloc(0, 0), alloc(0, 0)]);
        let mut rng = SimRng::seed_from_u64(0);
        assert_eq!(
            cfg.step(&state, &action, &mut rng).unwrap_err(),
            EnvError::Infeasible
        );
    }

    #[test]
    fn degenerate_transition_when_rate_is_zero() {
        let mut p = EnvParams::default();
        p.arrival_rate = 0.0;
        let cfg = p.build().unwrap();
        let state = SystemState::uniform(3, 2, 3);
        let action = JointAction::new(vec![alloc(3, 1); 3]);
        let dist = cfg.transition_distribution(&state, &action).unwrap();
        // Energy is deterministic at c - e = 2; only CPU varies: 4^3 states.
        assert_eq!(dist.iter().filter(|(_, p)| *p > 0.0).count(), 64);
        for (s, p) in &dist {
            if *p > 0.0 {
                assert!(s.devices.iter().all(|d| d.energy_units == 2));
            }
        }
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_marginal_hand_values() {
        // c=3, e=3, C=3, rate 2: P(0)=e^-2, P(1)=2e^-2, P(2)=2e^-2,
        // P(3)=1-5e^-2.
        let cfg = Config::default();
        let (values, probs) = cfg.energy_marginal(0, 0);
        assert_eq!(values, vec![0, 1, 2, 3]);
        let e2 = (-2.0_f64).exp();
        assert!((probs[0] - e2).abs() < 1e-12);
        assert!((probs[1] - 2.0 * e2).abs() < 1e-12);
        assert!((probs[2] - 2.0 * e2).abs() < 1e-12);
        assert!((probs[3] - (1.0 - 5.0 * e2)).abs() < 1e-12);
    }

    #[test]
    fn transition_probabilities_sum_to_one() {
        let cfg = Config::default();
        let state = SystemState::new(vec![
            DeviceState {
                cpu_shares: 3,
                energy_units: 3,
            },
            DeviceState {
                cpu_shares: 1,
                energy_units: 2,
            },
            DeviceState {
                cpu_shares: 2,
                energy_units: 1,
            },
        ]);
        for action in [
            JointAction::idle(3),
            JointAction::new(vec![alloc(3, 3), alloc(3, 1), alloc(1, 1)]),
        ] {
            let dist = cfg.transition_distribution(&state, &action).unwrap();
            let total: f64 = dist.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12, "total {total}");
        }
    }

    #[test]
    fn transition_rejects_infeasible() {
        let cfg = Config::default();
        let state = SystemState::uniform(3, 0, 0);
        let action = JointAction::new(vec![alloc(0, 0), alloc(2, 1), alloc(0, 0)]);
        assert_eq!(
            cfg.transition_distribution(&state, &action).unwrap_err(),
            EnvError::Infeasible
        );
    }

    #[test]
    fn initial_state_has_full_batteries() {
        let cfg = Config::default();
        let mut rng = SimRng::seed_from_u64(5);
        for _ in 0..20 {
            let s = cfg.initial_state(&mut rng);
            for (dev, p) in s.devices.iter().zip(cfg.devices()) {
                assert_eq!(dev.energy_units, p.energy_capacity);
                assert!(dev.cpu_shares <= p.max_cpu_shares);
            }
        }
    }
}
