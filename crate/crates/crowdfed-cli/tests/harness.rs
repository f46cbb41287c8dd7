//! Harness-level behavior: determinism, replicate isolation, CSV canonical
//! form, and config handling.

use crowdfed::env::EnvParams;
use crowdfed_cli::config_file::parse_config;
use crowdfed_cli::csv::render_csv;
use crowdfed_cli::experiment::run_schemes;
use crowdfed_cli::{run_experiment, run_quality_sweep, ExperimentSpec, Scheme};

fn tiny_spec() -> ExperimentSpec {
    let mut env = EnvParams::default();
    env.devices.truncate(1);
    env.devices[0].max_data = 2;
    env.devices[0].energy_capacity = 2;
    env.devices[0].max_cpu_shares = 2;
    let mut spec = ExperimentSpec {
        env,
        scheme: Scheme::Greedy,
        seeds: vec![5],
        ..ExperimentSpec::default()
    };
    spec.agent.episodes = 10;
    spec.agent.iterations_per_episode = 20;
    spec
}

#[test]
fn greedy_rows_are_bit_identical_across_reruns() {
    let spec = tiny_spec();
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(a.len(), 10);
    assert_eq!(a, b);
    assert_eq!(render_csv(&a), render_csv(&b));
}

#[test]
fn adding_a_seed_does_not_change_existing_rows() {
    let mut spec = tiny_spec();
    spec.scheme = Scheme::Random;
    let alone = run_experiment(&spec).unwrap();
    spec.seeds = vec![5, 6];
    let both = run_experiment(&spec).unwrap();
    let seed5: Vec<_> = both.into_iter().filter(|r| r.seed == 5).collect();
    assert_eq!(alone, seed5);
}

#[test]
fn comparison_runs_offer_each_scheme_the_same_seeds() {
    let mut spec = tiny_spec();
    spec.seeds = vec![3, 4];
    let combined = run_schemes(&spec, &[Scheme::Greedy, Scheme::Random]).unwrap();
    spec.scheme = Scheme::Greedy;
    let alone = run_experiment(&spec).unwrap();
    let greedy_rows: Vec<_> = combined
        .into_iter()
        .filter(|r| r.scheme == Scheme::Greedy)
        .collect();
    assert_eq!(alone, greedy_rows);
}

#[test]
fn random_scheme_spends_energy_within_bounds_at_default_scale() {
    // Three-device default environment, no training involved.
    let mut spec = ExperimentSpec {
        scheme: Scheme::Random,
        seeds: vec![1],
        ..ExperimentSpec::default()
    };
    spec.agent.episodes = 5;
    let rows = run_experiment(&spec).unwrap();
    let e_max = 9.0;
    for r in &rows {
        assert!(r.energy > 0.0 && r.energy <= e_max, "episode energy {}", r.energy);
    }
}

#[test]
fn ddqn_rows_are_deterministic_on_the_tiny_instance() {
    let mut spec = tiny_spec();
    spec.scheme = Scheme::Ddqn;
    spec.agent.episodes = 4;
    spec.agent.iterations_per_episode = 30;
    spec.agent.batch_size = 8;
    spec.agent.replay_capacity = 128;
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(a, b);
}

#[test]
fn sweep_produces_points_and_curves_per_value() {
    let mut spec = ExperimentSpec::default();
    spec.env.devices.truncate(2);
    for d in &mut spec.env.devices {
        d.max_data = 2;
        d.energy_capacity = 2;
        d.max_cpu_shares = 2;
    }
    spec.seeds = vec![1];
    spec.sweep_values = vec![1.0, 2.0];
    spec.agent.episodes = 5;
    spec.agent.iterations_per_episode = 20;
    spec.agent.batch_size = 8;
    spec.agent.replay_capacity = 64;
    let outcome = run_quality_sweep(&spec).unwrap();
    assert_eq!(outcome.rows.len(), 2);
    assert_eq!(outcome.points.len(), 2);
    for (value, rows) in &outcome.rows {
        assert_eq!(rows.len(), 5, "5 episodes for value {value}");
    }
    for p in &outcome.points {
        assert_eq!(p.data_units.len(), 2);
    }
}

#[test]
fn sweep_requires_two_devices() {
    let mut spec = tiny_spec();
    spec.sweep_values = vec![1.0];
    assert!(run_quality_sweep(&spec).is_err());
}

#[test]
fn config_parse_then_serialize_round_trips() {
    let text = "env.num_devices = 2\nenv.data_quality = [2.0, 1.0]\nenv.arrival_rate = 1.25\nagent.episodes = 42\nexperiment.scheme = \"random\"\nexperiment.seeds = [7, 8]\nexperiment.window = 10\n";
    let parsed = parse_config(text).unwrap();
    let reparsed = parse_config(&parsed.to_toml()).unwrap();
    assert_eq!(parsed, reparsed);
    let spec = parsed.to_spec().unwrap();
    assert_eq!(spec.scheme, Scheme::Random);
    assert_eq!(spec.seeds, vec![7, 8]);
    assert_eq!(spec.agent.episodes, 42);
    assert_eq!(spec.env.devices.len(), 2);
    assert_eq!(spec.env.devices[0].quality, 2.0);
}

#[test]
fn csv_files_are_byte_identical_on_reemission() {
    let spec = tiny_spec();
    let rows = run_experiment(&spec).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    crowdfed_cli::csv::emit_csv(&rows, &p1).unwrap();
    crowdfed_cli::csv::emit_csv(&rows, &p2).unwrap();
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    let text = std::fs::read_to_string(&p1).unwrap();
    assert!(text.starts_with("scheme,seed,episode,reward,energy,latency,data,d_1\n"));
}

#[test]
fn oversized_tabular_instance_is_reported_as_an_error() {
    let mut spec = ExperimentSpec::default();
    spec.scheme = Scheme::Tabular;
    spec.agent.episodes = 1;
    let err = run_experiment(&spec).unwrap_err();
    assert!(err.to_string().contains("too large"), "{err}");
}
