//! Greedy and random reference policies.

use rand::Rng;

use crate::env::{Config, JointAction, SystemState};

/// The greedy scheme: from every device, independently take the most data
/// the device can train, and within that the most energy its CPU grant can
/// burn. Devices that can only idle get the idle request.
pub fn greedy_action(state: &SystemState, cfg: &Config) -> JointAction {
    let allocations = state
        .devices
        .iter()
        .enumerate()
        .map(|(n, dev)| {
            // feasible_allocations is sorted by (d, e), so the last entry
            // maximizes data first, then energy.
            *cfg.feasible_allocations(n, dev)
                .last()
                .expect("idle is always feasible")
        })
        .collect();
    JointAction::new(allocations)
}

/// The random scheme: per device, a uniform draw over that device's
/// feasible requests, idle included.
pub fn random_action<R: Rng + ?Sized>(
    state: &SystemState,
    rng: &mut R,
    cfg: &Config,
) -> JointAction {
    let allocations = state
        .devices
        .iter()
        .enumerate()
        .map(|(n, dev)| {
            let options = cfg.feasible_allocations(n, dev);
            options[rng.gen_range(0..options.len())]
        })
        .collect();
    JointAction::new(allocations)
}

/// Closed-form energy cap for the greedy scheme when max data is feasible:
/// e = min(c, ⌊τ·ν·D·(μf)²/δ⌋).
#[cfg(test)]
fn greedy_energy_cap(cfg: &Config, n: usize, cpu_shares: u32, battery: u32) -> u32 {
    let p = cfg.device(n);
    let freq = cfg.cpu_share_hz() * f64::from(cpu_shares);
    let cap = cfg.switched_capacitance() * cfg.cycles_per_data_unit() * f64::from(p.max_data)
        * freq
        * freq
        / cfg.energy_unit_joules();
    battery.min(cap.floor() as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Allocation, DeviceState};
    use crate::SimRng;
    use rand::SeedableRng;

    fn dev(f: u32, c: u32) -> DeviceState {
        DeviceState {
            cpu_shares: f,
            energy_units: c,
        }
    }

    #[test]
    fn greedy_hand_values() {
        let cfg = Config::default();
        // f=2: cap = 1e-28 * 1e10 * 3 * (1.2e9)^2 = 4.32 -> e = min(3, 4) = 3
        let s = SystemState::new(vec![dev(2, 3), dev(1, 3), dev(0, 3)]);
        let a = greedy_action(&s, &cfg);
        assert_eq!(a.allocations[0], Allocation { data_units: 3, energy_units: 3 });
        // f=1: cap = 1.08 -> e = 1
        assert_eq!(a.allocations[1], Allocation { data_units: 3, energy_units: 1 });
        // f=0: idle only
        assert_eq!(a.allocations[2], Allocation::IDLE);
    }

    #[test]
    fn greedy_matches_closed_form_cap() {
        let cfg = Config::default();
        for f in 0..=3u32 {
            for c in 0..=3u32 {
                let s = SystemState::new(vec![dev(f, c), dev(0, 0), dev(0, 0)]);
                let a = greedy_action(&s, &cfg);
                let got = a.allocations[0];
                if f == 0 || c == 0 {
                    assert_eq!(got, Allocation::IDLE);
                    continue;
                }
                let cap = greedy_energy_cap(&cfg, 0, f, c);
                if cap == 0 {
                    // max data needs more CPU than granted; greedy still
                    // maximizes d among the remaining feasible pairs
                    assert!(cfg.device_feasible(0, &dev(f, c), got.data_units, got.energy_units));
                } else {
                    assert_eq!(got.data_units, cfg.device(0).max_data);
                    assert_eq!(got.energy_units, cap);
                }
            }
        }
    }

    #[test]
    fn greedy_dominance() {
        // No feasible pair has more data than greedy's pick; among pairs
        // with the same data, none has more energy.
        let cfg = Config::default();
        for f in 0..=3u32 {
            for c in 0..=3u32 {
                let d = dev(f, c);
                let s = SystemState::new(vec![d, dev(0, 0), dev(0, 0)]);
                let pick = greedy_action(&s, &cfg).allocations[0];
                for other in cfg.feasible_allocations(0, &d) {
                    assert!(other.data_units <= pick.data_units);
                    if other.data_units == pick.data_units {
                        assert!(other.energy_units <= pick.energy_units);
                    }
                }
            }
        }
    }

    #[test]
    fn greedy_and_random_always_feasible() {
        let cfg = Config::default();
        let mut rng = SimRng::seed_from_u64(17);
        for i in (0..cfg.num_states()).step_by(61) {
            let s = cfg.index_state(i).unwrap();
            assert!(cfg.action_feasible(&s, &greedy_action(&s, &cfg)));
            for _ in 0..3 {
                let a = random_action(&s, &mut rng, &cfg);
                assert!(cfg.action_feasible(&s, &a));
            }
        }
    }

    #[test]
    fn random_on_empty_device_is_idle() {
        let cfg = Config::default();
        let s = SystemState::uniform(3, 0, 0);
        let mut rng = SimRng::seed_from_u64(5);
        for _ in 0..20 {
            assert_eq!(random_action(&s, &mut rng, &cfg), JointAction::idle(3));
        }
    }

    #[test]
    fn random_is_uniform_over_the_per_device_feasible_set() {
        // dev=(f=2, c=1): feasible {(0,0),(1,1),(2,1),(3,1)}, each ~1/4.
        let mut params = crate::env::EnvParams::default();
        params.devices.truncate(1);
        let cfg = params.build().unwrap();
        let s = SystemState::new(vec![dev(2, 1)]);
        let options = cfg.feasible_allocations(0, &dev(2, 1));
        assert_eq!(options.len(), 4);
        let mut rng = SimRng::seed_from_u64(23);
        let n = 10_000;
        let mut counts = [0u32; 4];
        for _ in 0..n {
            let a = random_action(&s, &mut rng, &cfg).allocations[0];
            let idx = options.iter().position(|&o| o == a).unwrap();
            counts[idx] += 1;
        }
        // 3 sigma of a Binomial(n, 1/4) count
        let sigma = (f64::from(n) * 0.25 * 0.75).sqrt();
        for &c in &counts {
            assert!(
                (f64::from(c) - f64::from(n) * 0.25).abs() < 3.0 * sigma,
                "count {c} outside 3 sigma"
            );
        }
    }
}
