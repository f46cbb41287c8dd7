//! Sampled dynamics match the exact transition distribution.

use std::collections::HashMap;

use crowdfed::env::{Config, JointAction, SystemState};
use crowdfed::SimRng;
use rand::SeedableRng;

/// Empirical per-device marginals of `step` against the exact distribution,
/// within 3 standard errors per bin.
fn check_pair(cfg: &Config, state: &SystemState, action: &JointAction, seed: u64, draws: u32) {
    let dist = cfg.transition_distribution(state, action).unwrap();
    let n_dev = cfg.num_devices();

    // Exact per-device marginals over (cpu, energy).
    let mut exact: Vec<HashMap<(u32, u32), f64>> = vec![HashMap::new(); n_dev];
    for (next, p) in &dist {
        for (dev, d) in next.devices.iter().enumerate() {
            *exact[dev].entry((d.cpu_shares, d.energy_units)).or_insert(0.0) += p;
        }
    }

    let mut rng = SimRng::seed_from_u64(seed);
    let mut counts: Vec<HashMap<(u32, u32), u32>> = vec![HashMap::new(); n_dev];
    for _ in 0..draws {
        let out = cfg.step(state, action, &mut rng).unwrap();
        for (dev, d) in out.next_state.devices.iter().enumerate() {
            *counts[dev].entry((d.cpu_shares, d.energy_units)).or_insert(0) += 1;
        }
    }

    let n = f64::from(draws);
    for dev in 0..n_dev {
        for (key, &p) in &exact[dev] {
            let observed = f64::from(*counts[dev].get(key).unwrap_or(&0)) / n;
            let se = (p * (1.0 - p) / n).sqrt();
            assert!(
                (observed - p).abs() <= 3.0 * se + 1e-9,
                "device {dev} outcome {key:?}: observed {observed:.5}, exact {p:.5}, 3se {:.5}",
                3.0 * se
            );
        }
        // nothing lands outside the support
        let support: f64 = exact[dev].values().sum();
        assert!((support - 1.0).abs() < 1e-9);
    }
}

#[test]
fn step_frequencies_match_the_exact_distribution() {
    let cfg = Config::default();
    let state = SystemState::uniform(3, 3, 3);
    let actions = cfg.enumerate_feasible(&state);
    let action = actions[actions.len() / 2].clone();
    check_pair(&cfg, &state, &action, 99, 100_000);
}
