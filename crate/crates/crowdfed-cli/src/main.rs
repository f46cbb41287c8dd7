//! Command-line harness for the simulator and agents.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};

use crowdfed::baselines::{
    optimal_q_table, tabular_q_learning, value_iteration, StepSize, TabularConfig,
};
use crowdfed::env::{Config, EnvParams, FeasibleTable};
use crowdfed::nn::{grad_check, QNetwork, SelectedSample};
use crowdfed::SimRng;

use crowdfed_cli::csv::{emit_csv, emit_value_csv};
use crowdfed_cli::experiment::CONVERGENCE_FRACTION;
use crowdfed_cli::{
    converged_stats, load_config, run_experiment, run_quality_sweep, FileConfig, HarnessError,
    MetricRow, Scheme,
};

#[derive(Parser)]
#[command(
    name = "crowdfed",
    version,
    about = "Simulate server-side data/energy allocation across mobile devices and train agents for it"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Config file (flat key/value TOML, e.g. `env.arrival_rate = 2.0`);
    /// flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replicate seeds, comma separated.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Training episodes per replicate.
    #[arg(long)]
    episodes: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme over replicate seeds and write its learning curves.
    Run {
        #[command(flatten)]
        common: CommonOpts,
        /// Allocation scheme to run.
        #[arg(long, value_enum)]
        scheme: Option<Scheme>,
    },
    /// Run ddqn, greedy, and random over the same seeds into one CSV.
    Compare {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Train a fresh agent per data-quality value of device 1 and record
    /// converged per-device data means.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Quality values for device 1, comma separated.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
    /// Solve a small instance exactly and compare tabular Q-learning
    /// against it.
    Oracle {
        /// Config file; without one, a tiny single-device instance is used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Value-iteration stopping tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Episodes of tabular Q-learning.
        #[arg(long, default_value_t = 2000)]
        tabular_episodes: usize,
        /// Stem for the exported CSVs (`<stem>_values.csv`,
        /// `<stem>_qtable.csv`).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Finite-difference check of the Q-network gradients.
    Gradcheck {
        /// Number of random small networks to verify.
        #[arg(long, default_value_t = 20)]
        nets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum allowed relative error.
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run { common, scheme } => {
            let mut spec = build_spec(&common)?;
            if let Some(s) = scheme {
                spec.scheme = s;
            }
            let rows = run_experiment(&spec)?;
            emit_csv(&rows, &spec.output)?;
            print_summary(&rows);
            println!("wrote {}", spec.output.display());
            Ok(())
        }
        Command::Compare { common } => {
            let spec = build_spec(&common)?;
            let rows =
                crowdfed_cli::experiment::run_schemes(&spec, &[Scheme::Ddqn, Scheme::Greedy, Scheme::Random])?;
            emit_csv(&rows, &spec.output)?;
            print_summary(&rows);
            print_ratios(&rows);
            println!("wrote {}", spec.output.display());
            Ok(())
        }
        Command::Sweep { common, values } => {
            let mut spec = build_spec(&common)?;
            if let Some(v) = values {
                spec.sweep_values = v;
            }
            let outcome = run_quality_sweep(&spec)?;
            for (value, rows) in &outcome.rows {
                let path = suffixed(&spec.output, &format!("eta1_{value}"));
                emit_csv(rows, &path)?;
                println!("wrote {}", path.display());
            }
            let summary_path = suffixed(&spec.output, "sweep");
            emit_sweep_summary(&outcome.points, &summary_path)?;
            println!("wrote {}", summary_path.display());
            print_sweep(&outcome.points, &spec.sweep_values);
            Ok(())
        }
        Command::Oracle {
            config,
            tolerance,
            tabular_episodes,
            output,
        } => run_oracle(config.as_deref(), tolerance, tabular_episodes, output.as_deref()),
        Command::Gradcheck {
            nets,
            seed,
            tolerance,
        } => run_gradcheck(nets, seed, tolerance),
    }
}

fn build_spec(common: &CommonOpts) -> Result<crowdfed_cli::ExperimentSpec, HarnessError> {
    let file = match &common.config {
        Some(path) => load_config(path)?,
        None => FileConfig::default(),
    };
    let mut spec = file.to_spec()?;
    if let Some(seeds) = &common.seeds {
        spec.seeds = seeds.clone();
    }
    if let Some(episodes) = common.episodes {
        spec.agent.episodes = episodes;
    }
    if let Some(output) = &common.output {
        spec.output = output.clone();
    }
    spec.validate()?;
    Ok(spec)
}

fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned());
    let name = match ext {
        Some(ext) => format!("{stem}_{suffix}.{ext}"),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

fn print_summary(rows: &[MetricRow]) {
    let mut schemes: Vec<Scheme> = rows.iter().map(|r| r.scheme).collect();
    schemes.sort();
    schemes.dedup();
    println!("converged means (final {:.0}% of episodes):", CONVERGENCE_FRACTION * 100.0);
    println!("{:<8} {:>9} {:>9} {:>9} {:>9}", "scheme", "reward", "energy", "latency", "data");
    for scheme in schemes {
        let scheme_rows: Vec<MetricRow> = rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .cloned()
            .collect();
        let stats = converged_stats(&scheme_rows, CONVERGENCE_FRACTION);
        println!(
            "{:<8} {:>9.4} {:>9.4} {:>9.3} {:>9.4}",
            scheme.name(),
            stats.mean.reward,
            stats.mean.energy,
            stats.mean.latency,
            stats.mean.data
        );
    }
}

fn print_ratios(rows: &[MetricRow]) {
    let stats_for = |scheme: Scheme| {
        let scheme_rows: Vec<MetricRow> =
            rows.iter().filter(|r| r.scheme == scheme).cloned().collect();
        converged_stats(&scheme_rows, CONVERGENCE_FRACTION).mean
    };
    let ddqn = stats_for(Scheme::Ddqn);
    let greedy = stats_for(Scheme::Greedy);
    let random = stats_for(Scheme::Random);
    println!(
        "energy:  ddqn/greedy = {:.3} ({:.1}% reduction)",
        ddqn.energy / greedy.energy,
        100.0 * (1.0 - ddqn.energy / greedy.energy)
    );
    println!(
        "latency: ddqn/random = {:.3} ({:.1}% reduction)",
        ddqn.latency / random.latency,
        100.0 * (1.0 - ddqn.latency / random.latency)
    );
}

fn emit_sweep_summary(
    points: &[crowdfed_cli::SweepPoint],
    path: &Path,
) -> Result<(), HarnessError> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let num_devices = points.first().map_or(0, |p| p.data_units.len());
    write!(out, "eta_1,seed")?;
    for n in 1..=num_devices {
        write!(out, ",d_{n}")?;
    }
    writeln!(out)?;
    for p in points {
        write!(out, "{},{}", p.quality, p.seed)?;
        for d in &p.data_units {
            write!(out, ",{}", crowdfed_cli::csv::format_sig(*d))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn print_sweep(points: &[crowdfed_cli::SweepPoint], values: &[f64]) {
    let num_devices = points.first().map_or(0, |p| p.data_units.len());
    print!("{:<6}", "eta_1");
    for n in 1..=num_devices {
        print!(" {:>7}", format!("d_{n}"));
    }
    println!();
    for &value in values {
        let at: Vec<&crowdfed_cli::SweepPoint> =
            points.iter().filter(|p| p.quality == value).collect();
        print!("{value:<6}");
        for n in 0..num_devices {
            let mean: f64 =
                at.iter().map(|p| p.data_units[n]).sum::<f64>() / at.len().max(1) as f64;
            print!(" {mean:>7.3}");
        }
        println!();
    }
}

/// Tiny single-device instance used when `oracle` gets no config.
fn tiny_params() -> EnvParams {
    let mut params = EnvParams::default();
    params.devices.truncate(1);
    params.devices[0].max_data = 2;
    params.devices[0].energy_capacity = 2;
    params.devices[0].max_cpu_shares = 2;
    params
}

fn run_oracle(
    config: Option<&Path>,
    tolerance: f64,
    tabular_episodes: usize,
    output: Option<&Path>,
) -> Result<(), HarnessError> {
    let params = match config {
        Some(path) => load_config(path)?.env.to_params()?,
        None => tiny_params(),
    };
    let env = Config::new(params)?;
    let vi = value_iteration(&env, tolerance)?;
    let q_star = optimal_q_table(&env, &vi.values)?;
    let feasible = FeasibleTable::new(&env)?;

    let mut rng = SimRng::seed_from_u64(2024);
    let tabular_cfg = TabularConfig {
        episodes: tabular_episodes,
        iterations_per_episode: 100,
        epsilon_start: 1.0,
        epsilon_end: 1.0,
        step_size: StepSize::VisitDecay { exponent: 0.7 },
        ..TabularConfig::default()
    };
    let learned = tabular_q_learning(&env, &tabular_cfg, &mut rng)?;

    let states = env.num_states();
    let mut q_max = 0.0_f64;
    let mut worst = 0.0_f64;
    let mut policy_matches = 0usize;
    for s in 0..states {
        let options = feasible.indices(s);
        for &a in options {
            q_max = q_max.max(q_star.get(s, a as usize).abs());
            worst = worst.max((learned.get(s, a as usize) - q_star.get(s, a as usize)).abs());
        }
        if learned.argmax_feasible(s, options) == vi.policy[s] as usize {
            policy_matches += 1;
        }
    }
    println!(
        "value iteration: {} states, {} sweeps, |V*|_max = {:.6}",
        states,
        vi.iterations,
        vi.values.iter().cloned().fold(0.0, f64::max)
    );
    println!(
        "tabular vs exact: sup-norm error {:.6} ({:.2}% of |Q*|_max {:.6})",
        worst,
        100.0 * worst / q_max,
        q_max
    );
    println!(
        "tabular greedy policy matches the exact policy on {policy_matches}/{states} states"
    );

    if let Some(stem) = output {
        let value_entries: Vec<(usize, usize, f64)> = (0..states)
            .map(|s| (s, vi.policy[s] as usize, vi.values[s]))
            .collect();
        let values_path = suffixed(stem, "values");
        emit_value_csv(&value_entries, &values_path)?;
        println!("wrote {}", values_path.display());

        let mut q_entries = Vec::new();
        for s in 0..states {
            for &a in feasible.indices(s) {
                q_entries.push((s, a as usize, learned.get(s, a as usize)));
            }
        }
        let q_path = suffixed(stem, "qtable");
        emit_value_csv(&q_entries, &q_path)?;
        println!("wrote {}", q_path.display());
    }
    Ok(())
}

fn run_gradcheck(nets: usize, seed: u64, tolerance: f64) -> Result<(), HarnessError> {
    let mut rng = SimRng::seed_from_u64(seed);
    let mut overall = 0.0_f64;
    for i in 0..nets {
        let net = QNetwork::new(&[4, 8, 8, 6], &mut rng);
        let raw: Vec<(Vec<f64>, usize, f64)> = (0..8)
            .map(|_| {
                let x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let action = rng.gen_range(0..6);
                let target = rng.gen_range(-2.0..2.0);
                (x, action, target)
            })
            .collect();
        let batch: Vec<SelectedSample<'_>> = raw
            .iter()
            .map(|(x, action, target)| SelectedSample {
                input: x,
                action: *action,
                target: *target,
            })
            .collect();
        let err = grad_check(&net, &batch, 1e-5)
            .map_err(|e| HarnessError::InvalidSpec(e.to_string()))?;
        println!("net {i:>2}: max relative error {err:.3e}");
        overall = overall.max(err);
    }
    println!("worst over {nets} networks: {overall:.3e} (tolerance {tolerance:.1e})");
    if overall >= tolerance {
        return Err(HarnessError::InvalidSpec(format!(
            "gradient check failed: {overall:.3e} >= {tolerance:.1e}"
        )));
    }
    Ok(())
}
