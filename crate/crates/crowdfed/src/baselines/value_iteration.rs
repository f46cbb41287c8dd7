//! Exact Bellman-optimality iteration for enumerable instances.
//!
//! The Poisson arrival model has a closed-form truncated distribution, so
//! small instances admit an exact solution that serves as the oracle for
//! both tabular Q-learning and the trained network.

use super::{BaselineError, QTable, MAX_TABLE_ENTRIES};
use crate::env::{Config, FeasibleTable};

/// Output of [`value_iteration`].
#[derive(Debug, Clone)]
pub struct ValueIterationResult {
    /// V*(s) per flat state index.
    pub values: Vec<f64>,
    /// Optimal flat action index per state; ties break to the lowest index.
    pub policy: Vec<u32>,
    /// Number of sweeps performed.
    pub iterations: usize,
    /// Sup-norm change of each sweep, in order.
    pub deltas: Vec<f64>,
}

/// Cached rewards and sparse transitions for every feasible pair.
struct Tabulation {
    feasible: FeasibleTable,
    /// Per state, per feasible action: (reward, [(next state, prob)]).
    entries: Vec<Vec<(f64, Vec<(u32, f64)>)>>,
}

fn tabulate(env: &Config) -> Result<Tabulation, BaselineError> {
    let states = env.num_states();
    let entries_bound = states
        .checked_mul(env.num_actions())
        .ok_or(BaselineError::TooLarge {
            entries: usize::MAX,
            limit: MAX_TABLE_ENTRIES,
        })?;
    if entries_bound > MAX_TABLE_ENTRIES {
        return Err(BaselineError::TooLarge {
            entries: entries_bound,
            limit: MAX_TABLE_ENTRIES,
        });
    }
    let feasible = FeasibleTable::new(env)?;
    let mut entries = Vec::with_capacity(states);
    for s in 0..states {
        let state = env.index_state(s)?;
        let mut per_action = Vec::with_capacity(feasible.indices(s).len());
        for &a in feasible.indices(s) {
            let action = env.index_action(a as usize)?;
            let reward = env.reward(&state, &action)?;
            let transitions = env
                .transition_distribution(&state, &action)?
                .into_iter()
                .filter(|(_, p)| *p > 0.0)
                .map(|(next, p)| Ok((env.state_index(&next)? as u32, p)))
                .collect::<Result<Vec<_>, crate::env::EnvError>>()?;
            per_action.push((reward, transitions));
        }
        entries.push(per_action);
    }
    Ok(Tabulation { feasible, entries })
}

const MAX_SWEEPS: usize = 100_000;

/// Iterates V ← TV until the sup-norm change drops below `tolerance`.
pub fn value_iteration(
    env: &Config,
    tolerance: f64,
) -> Result<ValueIterationResult, BaselineError> {
    value_iteration_shifted(env, tolerance, 0.0)
}

/// Same as [`value_iteration`] but with a constant added to every reward;
/// shifts V* by shift/(1−γ) without changing the argmax sets.
fn value_iteration_shifted(
    env: &Config,
    tolerance: f64,
    reward_shift: f64,
) -> Result<ValueIterationResult, BaselineError> {
    if !(tolerance > 0.0) {
        return Err(BaselineError::InvalidConfig(
            "tolerance must be > 0".to_string(),
        ));
    }
    let tab = tabulate(env)?;
    let gamma = env.discount();
    let states = tab.entries.len();
    let mut values = vec![0.0; states];
    let mut next_values = vec![0.0; states];
    let mut deltas = Vec::new();
    let mut iterations = 0;
    while iterations < MAX_SWEEPS {
        iterations += 1;
        let mut delta = 0.0_f64;
        for s in 0..states {
            let best = tab.entries[s]
                .iter()
                .map(|(r, transitions)| {
                    let future: f64 = transitions
                        .iter()
                        .map(|&(next, p)| p * values[next as usize])
                        .sum();
                    r + reward_shift + gamma * future
                })
                .fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((best - values[s]).abs());
            next_values[s] = best;
        }
        std::mem::swap(&mut values, &mut next_values);
        deltas.push(delta);
        if delta < tolerance {
            break;
        }
    }
    let policy = extract_policy(&tab, &values, gamma, reward_shift);
    Ok(ValueIterationResult {
        values,
        policy,
        iterations,
        deltas,
    })
}

fn extract_policy(tab: &Tabulation, values: &[f64], gamma: f64, reward_shift: f64) -> Vec<u32> {
    (0..tab.entries.len())
        .map(|s| {
            let feasible = tab.feasible.indices(s);
            let mut best_action = feasible[0];
            let mut best_q = f64::NEG_INFINITY;
            for (&a, (r, transitions)) in feasible.iter().zip(&tab.entries[s]) {
                let future: f64 = transitions
                    .iter()
                    .map(|&(next, p)| p * values[next as usize])
                    .sum();
                let q = r + reward_shift + gamma * future;
                if q > best_q {
                    best_q = q;
                    best_action = a;
                }
            }
            best_action
        })
        .collect()
}

/// Q-values induced by a value function: Q(s,a) = R(s,a) + γ·E[V(s′)] for
/// every feasible pair. Infeasible entries stay zero and are never consulted.
pub fn optimal_q_table(env: &Config, values: &[f64]) -> Result<QTable, BaselineError> {
    let tab = tabulate(env)?;
    let gamma = env.discount();
    let mut table = QTable::zeros(env)?;
    for s in 0..tab.entries.len() {
        for (&a, (r, transitions)) in tab.feasible.indices(s).iter().zip(&tab.entries[s]) {
            let future: f64 = transitions
                .iter()
                .map(|&(next, p)| p * values[next as usize])
                .sum();
            table.set(s, a as usize, r + gamma * future);
        }
    }
    Ok(table)
}

/// Sup-norm Bellman residual ‖V − TV‖ of a value vector.
pub fn bellman_residual(env: &Config, values: &[f64]) -> Result<f64, BaselineError> {
    let tab = tabulate(env)?;
    let gamma = env.discount();
    let mut residual = 0.0_f64;
    for s in 0..tab.entries.len() {
        let best = tab.entries[s]
            .iter()
            .map(|(r, transitions)| {
                let future: f64 = transitions
                    .iter()
                    .map(|&(next, p)| p * values[next as usize])
                    .sum();
                r + gamma * future
            })
            .fold(f64::NEG_INFINITY, f64::max);
        residual = residual.max((best - values[s]).abs());
    }
    Ok(residual)
}
