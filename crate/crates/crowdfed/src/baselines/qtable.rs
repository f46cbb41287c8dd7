//! Dense look-up table over (state, action) pairs and tabular Q-learning.

use rand::Rng;

use super::{BaselineError, MAX_TABLE_ENTRIES};
use crate::env::{Config, FeasibleTable};

/// Dense Q-table indexed by flat state and action indices.
///
/// Entries for pairs that are infeasible are never written or read by the
/// learning loop and stay at their initial value.
#[derive(Debug, Clone)]
pub struct QTable {
    values: Vec<f64>,
    num_states: usize,
    num_actions: usize,
}

impl QTable {
    /// Zero-initialized table; rejects instances with more than
    /// [`MAX_TABLE_ENTRIES`] entries.
    pub fn zeros(cfg: &Config) -> Result<Self, BaselineError> {
        let num_states = cfg.num_states();
        let num_actions = cfg.num_actions();
        let entries = num_states
            .checked_mul(num_actions)
            .ok_or(BaselineError::TooLarge {
                entries: usize::MAX,
                limit: MAX_TABLE_ENTRIES,
            })?;
        if entries > MAX_TABLE_ENTRIES {
            return Err(BaselineError::TooLarge {
                entries,
                limit: MAX_TABLE_ENTRIES,
            });
        }
        Ok(QTable {
            values: vec![0.0; entries],
            num_states,
            num_actions,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.num_actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.values[state * self.num_actions + action] = value;
    }

    /// Greedy lookup restricted to the given feasible actions; ties break to
    /// the lowest action index.
    pub fn argmax_feasible(&self, state: usize, feasible: &[u32]) -> usize {
        let mut best = feasible[0] as usize;
        let mut best_q = self.get(state, best);
        for &a in &feasible[1..] {
            let q = self.get(state, a as usize);
            if q > best_q {
                best_q = q;
                best = a as usize;
            }
        }
        best
    }

    /// Max Q over the feasible actions of a state.
    pub fn max_feasible(&self, state: usize, feasible: &[u32]) -> f64 {
        feasible
            .iter()
            .map(|&a| self.get(state, a as usize))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Learning-rate schedule for tabular Q-learning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// Constant learning rate.
    Fixed(f64),
    /// λ = 1 / (1 + visit count)^exponent for the updated pair. Exponents in
    /// (0.5, 1.0] satisfy the stochastic-approximation conditions; values
    /// near 1 mix in early bootstrap targets forever and converge far too
    /// slowly at γ near 1, so the convergence tests use 0.7.
    VisitDecay { exponent: f64 },
}

/// Configuration of the tabular learner.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularConfig {
    pub episodes: usize,
    pub iterations_per_episode: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of total iterations over which ε decays linearly.
    pub epsilon_decay_fraction: f64,
    pub step_size: StepSize,
}

impl Default for TabularConfig {
    fn default() -> Self {
        Self {
            episodes: 500,
            iterations_per_episode: 100,
            epsilon_start: 0.9,
            epsilon_end: 0.0,
            epsilon_decay_fraction: 0.8,
            step_size: StepSize::VisitDecay { exponent: 0.7 },
        }
    }
}

fn epsilon_at(iteration: usize, total: usize, cfg: &TabularConfig) -> f64 {
    let decay_end = (total as f64 * cfg.epsilon_decay_fraction).max(1.0);
    let t = (iteration as f64 / decay_end).min(1.0);
    cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * t
}

/// ε-greedy tabular Q-learning:
/// Q(s,a) ← (1−λ)·Q(s,a) + λ·(r + γ·max over a′ feasible in s′ of Q(s′,a′)).
pub fn tabular_q_learning<R: Rng + ?Sized>(
    env: &Config,
    cfg: &TabularConfig,
    rng: &mut R,
) -> Result<QTable, BaselineError> {
    let mut table = QTable::zeros(env)?;
    let feasible = FeasibleTable::new(env)?;
    let mut visits = vec![0u32; table.values.len()];
    let gamma = env.discount();
    let total = cfg.episodes * cfg.iterations_per_episode;
    let mut iteration = 0usize;
    for _ in 0..cfg.episodes {
        let mut state = env.initial_state(rng);
        let mut s_idx = env.state_index(&state)?;
        for _ in 0..cfg.iterations_per_episode {
            let eps = epsilon_at(iteration, total, cfg);
            let options = feasible.indices(s_idx);
            let a_idx = if rng.gen::<f64>() < eps {
                options[rng.gen_range(0..options.len())] as usize
            } else {
                table.argmax_feasible(s_idx, options)
            };
            let action = env.index_action(a_idx)?;
            let outcome = env.step(&state, &action, rng)?;
            let next_idx = env.state_index(&outcome.next_state)?;
            let target = outcome.reward + gamma * table.max_feasible(next_idx, feasible.indices(next_idx));
            let flat = s_idx * table.num_actions + a_idx;
            visits[flat] += 1;
            let lambda = match cfg.step_size {
                StepSize::Fixed(l) => l,
                StepSize::VisitDecay { exponent } => {
                    (1.0 + f64::from(visits[flat] - 1)).powf(-exponent)
                }
            };
            let q = table.values[flat];
            table.values[flat] = (1.0 - lambda) * q + lambda * target;
            state = outcome.next_state;
            s_idx = next_idx;
            iteration += 1;
        }
    }
    Ok(table)
}
