//! Scheme execution over replicate seeds and convergence summaries.

use std::path::PathBuf;
use std::str::FromStr;

use rand::SeedableRng;
use rayon::prelude::*;

use crowdfed::agent::{train, AgentConfig};
use crowdfed::baselines::{
    greedy_action, random_action, tabular_q_learning, StepSize, TabularConfig,
};
use crowdfed::env::{Config, EnvParams, FeasibleTable};
use crowdfed::rollout::{rollout_policy, EpisodeMetrics};
use crowdfed::SimRng;

use crate::HarnessError;

/// The four allocation schemes the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, clap::ValueEnum)]
pub enum Scheme {
    Ddqn,
    Greedy,
    Random,
    Tabular,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Ddqn => "ddqn",
            Scheme::Greedy => "greedy",
            Scheme::Random => "random",
            Scheme::Tabular => "tabular",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ddqn" => Ok(Scheme::Ddqn),
            "greedy" => Ok(Scheme::Greedy),
            "random" => Ok(Scheme::Random),
            "tabular" => Ok(Scheme::Tabular),
            other => Err(format!(
                "unknown scheme '{other}' (expected ddqn, greedy, random, or tabular)"
            )),
        }
    }
}

/// Everything needed to run one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub env: EnvParams,
    /// Template agent settings; the per-replicate seed overrides
    /// `agent.seed`.
    pub agent: AgentConfig,
    pub scheme: Scheme,
    pub seeds: Vec<u64>,
    pub output: PathBuf,
    /// Moving-average window (episodes) used when smoothing curves.
    pub window: usize,
    /// η₁ grid for the data-quality sweep.
    pub sweep_values: Vec<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            env: EnvParams::default(),
            agent: AgentConfig::default(),
            scheme: Scheme::Ddqn,
            seeds: vec![1, 2, 3, 4, 5],
            output: PathBuf::from("metrics.csv"),
            window: 50,
            sweep_values: vec![1.0, 1.5, 2.0, 2.5, 3.0],
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.seeds.is_empty() {
            return Err(HarnessError::InvalidSpec("seeds must be nonempty".into()));
        }
        if self.window == 0 {
            return Err(HarnessError::InvalidSpec("window must be >= 1".into()));
        }
        Ok(())
    }
}

/// One CSV row: per-episode means for one scheme/seed.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub scheme: Scheme,
    pub seed: u64,
    pub episode: usize,
    pub reward: f64,
    pub energy: f64,
    pub latency: f64,
    pub data: f64,
    pub data_units: Vec<f64>,
}

fn rows_from_metrics(scheme: Scheme, seed: u64, metrics: Vec<EpisodeMetrics>) -> Vec<MetricRow> {
    metrics
        .into_iter()
        .map(|m| MetricRow {
            scheme,
            seed,
            episode: m.episode,
            reward: m.reward,
            energy: m.energy,
            latency: m.latency,
            data: m.data,
            data_units: m.data_units,
        })
        .collect()
}

/// Runs one seed of one scheme. Every scheme sees the same generator seed,
/// so the environment offers each of them the same randomness stream.
fn run_replicate(
    cfg: &Config,
    spec: &ExperimentSpec,
    scheme: Scheme,
    seed: u64,
) -> Result<Vec<MetricRow>, HarnessError> {
    let episodes = spec.agent.episodes;
    let iterations = spec.agent.iterations_per_episode;
    let metrics = match scheme {
        Scheme::Ddqn => {
            let agent = AgentConfig {
                seed,
                ..spec.agent.clone()
            };
            train(cfg, &agent)?.metrics
        }
        Scheme::Greedy => {
            let mut rng = SimRng::seed_from_u64(seed);
            rollout_policy(cfg, episodes, iterations, &mut rng, |s, _| {
                greedy_action(s, cfg)
            })?
        }
        Scheme::Random => {
            let mut rng = SimRng::seed_from_u64(seed);
            rollout_policy(cfg, episodes, iterations, &mut rng, |s, rng| {
                random_action(s, rng, cfg)
            })?
        }
        Scheme::Tabular => {
            // Learn a table, then roll out the greedy-from-table policy over
            // the same episode structure as the other schemes.
            let mut rng = SimRng::seed_from_u64(seed);
            let tabular = TabularConfig {
                episodes,
                iterations_per_episode: iterations,
                epsilon_start: spec.agent.epsilon_start,
                epsilon_end: spec.agent.epsilon_end,
                epsilon_decay_fraction: spec.agent.epsilon_decay_fraction,
                step_size: StepSize::VisitDecay { exponent: 0.7 },
            };
            let table = tabular_q_learning(cfg, &tabular, &mut rng)?;
            let feasible = FeasibleTable::new(cfg)?;
            rollout_policy(cfg, episodes, iterations, &mut rng, |s, _| {
                let idx = cfg.state_index(s).expect("state within bounds");
                let a = table.argmax_feasible(idx, feasible.indices(idx));
                cfg.index_action(a).expect("table action within grid")
            })?
        }
    };
    Ok(rows_from_metrics(scheme, seed, metrics))
}

/// Runs `spec.scheme` once per seed (replicates in parallel) and returns
/// rows sorted by (scheme, seed, episode).
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<MetricRow>, HarnessError> {
    run_schemes(spec, &[spec.scheme])
}

/// Runs several schemes over the same seed list, e.g. for comparison plots.
pub fn run_schemes(
    spec: &ExperimentSpec,
    schemes: &[Scheme],
) -> Result<Vec<MetricRow>, HarnessError> {
    spec.validate()?;
    let cfg = Config::new(spec.env.clone())?;
    let jobs: Vec<(Scheme, u64)> = schemes
        .iter()
        .flat_map(|&scheme| spec.seeds.iter().map(move |&seed| (scheme, seed)))
        .collect();
    let mut rows: Vec<MetricRow> = jobs
        .par_iter()
        .map(|&(scheme, seed)| run_replicate(&cfg, spec, scheme, seed))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    rows.sort_by(|a, b| {
        (a.scheme, a.seed, a.episode).cmp(&(b.scheme, b.seed, b.episode))
    });
    Ok(rows)
}

/// Converged per-device data means for one sweep point and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub quality: f64,
    pub seed: u64,
    /// Mean data units per device over the final 20% of episodes.
    pub data_units: Vec<f64>,
}

/// Result of the data-quality sweep.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// Full learning curves per sweep value.
    pub rows: Vec<(f64, Vec<MetricRow>)>,
    /// Converged readouts, one per (value, seed).
    pub points: Vec<SweepPoint>,
}

/// Fraction of final episodes that counts as "converged".
pub const CONVERGENCE_FRACTION: f64 = 0.2;

/// Trains a fresh agent per η₁ value (device 0's quality weight) and seed,
/// recording converged per-device data means.
pub fn run_quality_sweep(spec: &ExperimentSpec) -> Result<SweepOutcome, HarnessError> {
    spec.validate()?;
    if spec.env.devices.len() < 2 {
        return Err(HarnessError::InvalidSpec(
            "the quality sweep needs at least 2 devices".into(),
        ));
    }
    if spec.sweep_values.is_empty() {
        return Err(HarnessError::InvalidSpec(
            "sweep_values must be nonempty".into(),
        ));
    }
    let jobs: Vec<(f64, u64)> = spec
        .sweep_values
        .iter()
        .flat_map(|&v| spec.seeds.iter().map(move |&s| (v, s)))
        .collect();
    let per_job: Vec<(f64, u64, Vec<MetricRow>)> = jobs
        .par_iter()
        .map(|&(quality, seed)| {
            let mut env = spec.env.clone();
            env.devices[0].quality = quality;
            let cfg = Config::new(env)?;
            let rows = run_replicate(&cfg, spec, Scheme::Ddqn, seed)?;
            Ok((quality, seed, rows))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut rows: Vec<(f64, Vec<MetricRow>)> = Vec::new();
    let mut points = Vec::new();
    for value in &spec.sweep_values {
        let mut value_rows = Vec::new();
        for (q, seed, job_rows) in per_job.iter().filter(|(q, _, _)| q == value) {
            let stats = converged_stats(job_rows, CONVERGENCE_FRACTION);
            points.push(SweepPoint {
                quality: *q,
                seed: *seed,
                data_units: stats.mean.data_units.clone(),
            });
            value_rows.extend(job_rows.iter().cloned());
        }
        value_rows.sort_by(|a, b| (a.seed, a.episode).cmp(&(b.seed, b.episode)));
        rows.push((*value, value_rows));
    }
    Ok(SweepOutcome { rows, points })
}

/// Mean metric values over a set of episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSummary {
    pub reward: f64,
    pub energy: f64,
    pub latency: f64,
    pub data: f64,
    pub data_units: Vec<f64>,
}

/// Converged summary of one scheme's rows: per-seed means over the final
/// `fraction` of episodes, plus their average.
#[derive(Debug, Clone)]
pub struct ConvergedStats {
    pub per_seed: Vec<(u64, SchemeSummary)>,
    pub mean: SchemeSummary,
}

pub fn converged_stats(rows: &[MetricRow], fraction: f64) -> ConvergedStats {
    assert!(!rows.is_empty(), "no rows to summarize");
    let episodes = rows.iter().map(|r| r.episode).max().unwrap() + 1;
    let cut = episodes - ((episodes as f64 * fraction).ceil() as usize).clamp(1, episodes);
    let mut seeds: Vec<u64> = rows.iter().map(|r| r.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    let num_devices = rows[0].data_units.len();

    let per_seed: Vec<(u64, SchemeSummary)> = seeds
        .iter()
        .map(|&seed| {
            let tail: Vec<&MetricRow> = rows
                .iter()
                .filter(|r| r.seed == seed && r.episode >= cut)
                .collect();
            let n = tail.len() as f64;
            let mut s = SchemeSummary {
                reward: 0.0,
                energy: 0.0,
                latency: 0.0,
                data: 0.0,
                data_units: vec![0.0; num_devices],
            };
            for r in &tail {
                s.reward += r.reward;
                s.energy += r.energy;
                s.latency += r.latency;
                s.data += r.data;
                for (acc, &d) in s.data_units.iter_mut().zip(&r.data_units) {
                    *acc += d;
                }
            }
            s.reward /= n;
            s.energy /= n;
            s.latency /= n;
            s.data /= n;
            s.data_units.iter_mut().for_each(|d| *d /= n);
            (seed, s)
        })
        .collect();

    let k = per_seed.len() as f64;
    let mut mean = SchemeSummary {
        reward: 0.0,
        energy: 0.0,
        latency: 0.0,
        data: 0.0,
        data_units: vec![0.0; num_devices],
    };
    for (_, s) in &per_seed {
        mean.reward += s.reward;
        mean.energy += s.energy;
        mean.latency += s.latency;
        mean.data += s.data;
        for (acc, &d) in mean.data_units.iter_mut().zip(&s.data_units) {
            *acc += d;
        }
    }
    mean.reward /= k;
    mean.energy /= k;
    mean.latency /= k;
    mean.data /= k;
    mean.data_units.iter_mut().for_each(|d| *d /= k);

    ConvergedStats { per_seed, mean }
}

/// Trailing moving average with the given window.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "window must be >= 1");
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for (i, v) in values.iter().enumerate() {
        sum += v;
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i.min(window - 1) + 1) as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moving_average_warms_up_then_slides() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ma = moving_average(&xs, 2);
        assert_eq!(ma, vec![1.0, 1.5, 2.5, 3.5, 4.5]);
        let ma1 = moving_average(&xs, 1);
        assert_eq!(ma1, xs.to_vec());
    }

    #[test]
    fn converged_stats_take_the_final_fifth() {
        let rows: Vec<MetricRow> = (0..10)
            .map(|episode| MetricRow {
                scheme: Scheme::Greedy,
                seed: 1,
                episode,
                reward: episode as f64,
                energy: 1.0,
                latency: 2.0,
                data: 3.0,
                data_units: vec![episode as f64, 0.5],
            })
            .collect();
        let stats = converged_stats(&rows, 0.2);
        // final 20% of 10 episodes = episodes 8 and 9
        assert!((stats.mean.reward - 8.5).abs() < 1e-12);
        assert!((stats.mean.data_units[0] - 8.5).abs() < 1e-12);
        assert_eq!(stats.per_seed.len(), 1);
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!(Scheme::from_str("ddqn").unwrap(), Scheme::Ddqn);
        assert_eq!(Scheme::from_str("tabular").unwrap(), Scheme::Tabular);
        assert!(Scheme::from_str("DQL").is_err());
    }
}
