//! Double-DQN: ε-greedy behavior over the feasible set, uniform replay,
//! and a periodically reset target network that evaluates the online
//! network's argmax.

use rand::{Rng, SeedableRng};

use super::replay::{Experience, ReplayMemory};
use super::AgentError;
use crate::env::{Config, FeasibleTable, SystemState};
use crate::nn::{encode_state, AdamParams, AdamState, QNetwork, SelectedSample};
use crate::rollout::{EpisodeMetrics, MetricAccumulator};
use crate::SimRng;

/// Hidden layer widths of the Q-network.
const HIDDEN: [usize; 3] = [32, 32, 32];

/// Training-loop hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    /// Discount factor used in the bootstrap target.
    pub gamma: f64,
    /// Mini-batch size N_b.
    pub batch_size: usize,
    /// Target-network reset period N⁻, in iterations.
    pub target_reset_period: u64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of total iterations over which ε decays linearly; ε stays at
    /// `epsilon_end` afterwards.
    pub epsilon_decay_fraction: f64,
    pub episodes: usize,
    /// Iterations per episode T. Episodes are metric windows, not terminal
    /// boundaries: the MDP is continuing and bootstrapping never stops.
    pub iterations_per_episode: usize,
    pub replay_capacity: usize,
    /// Adam step size λ.
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            batch_size: 32,
            target_reset_period: 100,
            epsilon_start: 0.9,
            epsilon_end: 0.0,
            epsilon_decay_fraction: 0.8,
            episodes: 500,
            iterations_per_episode: 100,
            replay_capacity: 10_000,
            learning_rate: 0.001,
            seed: 0,
        }
    }
}

impl AgentConfig {
    pub fn total_iterations(&self) -> u64 {
        self.episodes as u64 * self.iterations_per_episode as u64
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |msg: &str| Err(AgentError::InvalidConfig(msg.to_string()));
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in [0, 1)");
        }
        if self.batch_size == 0 || self.batch_size > self.replay_capacity {
            return bad("batch_size must satisfy 0 < N_b <= replay capacity");
        }
        if self.target_reset_period == 0 {
            return bad("target_reset_period must be >= 1");
        }
        for e in [self.epsilon_start, self.epsilon_end] {
            if !(0.0..=1.0).contains(&e) {
                return bad("epsilon bounds must lie in [0, 1]");
            }
        }
        if !(self.epsilon_decay_fraction > 0.0 && self.epsilon_decay_fraction <= 1.0) {
            return bad("epsilon_decay_fraction must lie in (0, 1]");
        }
        if self.iterations_per_episode == 0 {
            return bad("iterations_per_episode must be >= 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be > 0");
        }
        Ok(())
    }
}

/// Exploration rate at a (0-based) global iteration: linear from
/// `epsilon_start` down to `epsilon_end` at `epsilon_decay_fraction` of the
/// total iterations, constant afterwards.
pub fn epsilon_at(iteration: u64, cfg: &AgentConfig) -> f64 {
    let decay_iters = (cfg.total_iterations() as f64 * cfg.epsilon_decay_fraction).max(1.0);
    let t = (iteration as f64 / decay_iters).min(1.0);
    cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * t
}

/// ε-greedy action selection over the feasible set.
///
/// With probability ε, a uniform draw from the state's feasible actions;
/// otherwise the feasible action with the highest online Q-value (infeasible
/// outputs are never consulted). Ties break to the lowest flat index.
pub fn select_action<R: Rng + ?Sized>(
    net: &QNetwork,
    state: &SystemState,
    epsilon: f64,
    rng: &mut R,
    env: &Config,
    feasible: &FeasibleTable,
) -> usize {
    let s_idx = env.state_index(state).expect("state within bounds");
    let options = feasible.indices(s_idx);
    if rng.gen::<f64>() < epsilon {
        return options[rng.gen_range(0..options.len())] as usize;
    }
    masked_argmax(net, state, options, env)
}

/// Highest-Q feasible action, scanning in increasing index order so ties
/// resolve to the lowest index.
fn masked_argmax(net: &QNetwork, state: &SystemState, options: &[u32], env: &Config) -> usize {
    let features = encode_state(state, env);
    let hidden = net
        .hidden_forward(&features)
        .expect("encoded state matches input size");
    let mut best = options[0] as usize;
    let mut best_q = net.q_at(&hidden, best);
    for &a in &options[1..] {
        let q = net.q_at(&hidden, a as usize);
        if q > best_q {
            best_q = q;
            best = a as usize;
        }
    }
    best
}

/// Double-Q regression targets for a batch:
/// y = r + γ·Q(s′, argmax over a′ feasible in s′ of Q(s′, a′; θ); θ⁻).
///
/// The online network chooses the bootstrap action, the target network
/// evaluates it. There is no terminal case: the MDP is continuing.
pub fn double_q_target(
    batch: &[&Experience],
    online: &QNetwork,
    target: &QNetwork,
    gamma: f64,
    env: &Config,
    feasible: &FeasibleTable,
) -> Vec<f64> {
    batch
        .iter()
        .map(|e| {
            let s_idx = env
                .state_index(&e.next_state)
                .expect("stored state within bounds");
            let options = feasible.indices(s_idx);
            let a_max = masked_argmax(online, &e.next_state, options, env);
            let features = encode_state(&e.next_state, env);
            let hidden = target
                .hidden_forward(&features)
                .expect("encoded state matches input size");
            e.reward + gamma * target.q_at(&hidden, a_max)
        })
        .collect()
}

/// A trained network plus the per-episode learning curve.
#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub network: QNetwork,
    pub metrics: Vec<EpisodeMetrics>,
}

pub(crate) struct Trainer<'e> {
    env: &'e Config,
    cfg: &'e AgentConfig,
    feasible: FeasibleTable,
    rng: SimRng,
    pub(crate) online: QNetwork,
    pub(crate) target: QNetwork,
    adam: AdamState,
    replay: ReplayMemory,
    pub(crate) iteration: u64,
}

impl<'e> Trainer<'e> {
    pub(crate) fn new(env: &'e Config, cfg: &'e AgentConfig) -> Result<Self, AgentError> {
        cfg.validate()?;
        let feasible = FeasibleTable::new(env)?;
        let mut rng = SimRng::seed_from_u64(cfg.seed);
        let mut sizes = vec![2 * env.num_devices()];
        sizes.extend_from_slice(&HIDDEN);
        sizes.push(env.num_actions());
        let online = QNetwork::new(&sizes, &mut rng);
        let target = online.clone();
        let adam = AdamState::new(
            &online,
            AdamParams {
                step_size: cfg.learning_rate,
                ..AdamParams::default()
            },
        );
        let replay = ReplayMemory::new(cfg.replay_capacity);
        Ok(Trainer {
            env,
            cfg,
            feasible,
            rng,
            online,
            target,
            adam,
            replay,
            iteration: 0,
        })
    }

    /// One environment interaction plus (once the replay is warm) one
    /// gradient step, then the periodic target reset.
    pub(crate) fn advance(&mut self, state: &SystemState) -> Result<crate::env::StepOutcome, AgentError> {
        let epsilon = epsilon_at(self.iteration, self.cfg);
        let a_idx = select_action(
            &self.online,
            state,
            epsilon,
            &mut self.rng,
            self.env,
            &self.feasible,
        );
        let action = self.env.index_action(a_idx)?;
        let outcome = self.env.step(state, &action, &mut self.rng)?;
        self.replay.push(Experience {
            state: state.clone(),
            action: a_idx,
            reward: outcome.reward,
            next_state: outcome.next_state.clone(),
        });

        if let Some(batch) = self.replay.sample(self.cfg.batch_size, &mut self.rng) {
            let targets = double_q_target(
                &batch,
                &self.online,
                &self.target,
                self.cfg.gamma,
                self.env,
                &self.feasible,
            );
            let inputs: Vec<Vec<f64>> = batch
                .iter()
                .map(|e| encode_state(&e.state, self.env))
                .collect();
            let samples: Vec<SelectedSample<'_>> = batch
                .iter()
                .zip(&inputs)
                .zip(&targets)
                .map(|((e, input), &target)| SelectedSample {
                    input,
                    action: e.action,
                    target,
                })
                .collect();
            let grads = self.online.backward_selected(&samples)?;
            self.adam.apply(&mut self.online, &grads)?;
        }

        self.iteration += 1;
        if self.iteration % self.cfg.target_reset_period == 0 {
            self.target = self.online.clone();
        }
        Ok(outcome)
    }

    pub(crate) fn run_episode(&mut self, episode: usize) -> Result<EpisodeMetrics, AgentError> {
        let mut state = self.env.initial_state(&mut self.rng);
        let mut acc = MetricAccumulator::new(self.env.num_devices());
        for _ in 0..self.cfg.iterations_per_episode {
            let outcome = self.advance(&state)?;
            acc.record(&outcome);
            state = outcome.next_state;
        }
        Ok(acc.finish(episode))
    }
}

/// Runs the full training loop: `episodes × iterations_per_episode`
/// interactions with ε-greedy behavior, one Adam step per interaction once
/// the replay holds a batch, and a target reset every N⁻ iterations.
pub fn train(env: &Config, cfg: &AgentConfig) -> Result<TrainOutput, AgentError> {
    let mut trainer = Trainer::new(env, cfg)?;
    let mut metrics = Vec::with_capacity(cfg.episodes);
    for episode in 0..cfg.episodes {
        metrics.push(trainer.run_episode(episode)?);
    }
    Ok(TrainOutput {
        network: trainer.online,
        metrics,
    })
}
