use std::fs;

use serde_json::Value;
use vpsbeam::harness::{self, Experiment, ExperimentConfig, Preset, Sweep};
use vpsbeam::ScenarioSpec;

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.scenario = ScenarioSpec::baseline().with_counts(8, 24);
    cfg.experiment.trials = 4;
    cfg.experiment.freqs_ghz = vec![20.0, 40.0];
    cfg.experiment.bs_offsets_deg = vec![-3.0, 0.0, 3.0];
    cfg.experiment.irs_offsets_deg = vec![0.0];
    cfg.experiment.scale_factors = vec![1.0, 1.5];
    cfg
}

#[test]
fn every_experiment_writes_data_and_meta() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let dirs = harness::run_all(&cfg, tmp.path()).unwrap();
    assert_eq!(dirs.len(), 6);
    for (dir, exp) in dirs.iter().zip(Experiment::ALL) {
        assert_eq!(dir, &tmp.path().join(exp.name()));
        let csv = fs::read_to_string(dir.join("data.csv")).unwrap();
        assert!(csv.starts_with("variable,scheme,value\n"));
        assert!(csv.ends_with('\n'));
        for line in csv.lines().skip(1) {
            let value: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert!(value.is_finite() && value >= 0.0, "{line}");
        }
        let meta: Value = serde_json::from_str(&fs::read_to_string(dir.join("meta.json")).unwrap()).unwrap();
        assert_eq!(meta["experiment"], exp.name());
        assert_eq!(meta["master_seed"], cfg.rng.master_seed);
        assert_eq!(meta["trials"], 4);
        assert_eq!(meta["canonical_rayleigh"], "bs");
    }
}

#[test]
fn sweep_rows_follow_points_then_schemes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = harness::run_experiment(Experiment::Sweep(Sweep::BsAngle), &small_config(), tmp.path()).unwrap();
    let csv = fs::read_to_string(dir.join("data.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3 * 6);
    let schemes: Vec<&str> = rows[..6].iter().map(|r| r[1]).collect();
    assert_eq!(
        schemes,
        [
            "VPS",
            "VPS+AO",
            "RandomAO_avg_iter1",
            "RandomAO_avg_iter2",
            "RandomAO_avg_iter3",
            "RandomAO_best10"
        ]
    );
    assert!(rows[..6].iter().all(|r| r[0] == "-3"));
    assert!(rows[12..].iter().all(|r| r[0] == "3"));

    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.join("meta.json")).unwrap()).unwrap();
    let points = meta["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    assert_eq!(points[0]["n_bs"], 8);
    assert_eq!(points[0]["m_irs"], 24);
}

#[test]
fn convergence_traces_have_sidecars() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config();
    let dir = harness::run_experiment(Experiment::Convergence, &cfg, tmp.path()).unwrap();
    let labels = [
        "far_field",
        "zero_phase",
        "uniform_random_1",
        "uniform_random_2",
        "gaussian_random_1",
        "gaussian_random_2",
        "vps",
    ];
    for label in labels {
        let csv = fs::read_to_string(dir.join("traces").join(format!("{label}.csv"))).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "iteration,power");
        assert_eq!(lines.len(), 1 + cfg.experiment.iterations + 1);
        let side: Value =
            serde_json::from_str(&fs::read_to_string(dir.join("traces").join(format!("{label}.json"))).unwrap())
                .unwrap();
        assert_eq!(side["label"], label);
        assert_eq!(side["seed"].is_null(), !label.contains("random"));
    }
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.join("meta.json")).unwrap()).unwrap();
    let listed: Vec<&str> = meta["traces"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(listed, labels);
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = small_config();
    let text = cfg.to_toml_string();
    assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);

    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("run.toml");
    fs::write(&path, &text).unwrap();
    assert_eq!(ExperimentConfig::load(&path).unwrap(), cfg);
}

#[test]
fn partial_config_fills_defaults() {
    let cfg = ExperimentConfig::from_toml_str("[experiment]\ntrials = 7\n[rng]\nmaster_seed = 5\n").unwrap();
    assert_eq!(cfg.experiment.trials, 7);
    assert_eq!(cfg.rng.master_seed, 5);
    assert_eq!(cfg.scenario, ScenarioSpec::baseline());
    assert_eq!(cfg.experiment.iterations, 10);
}

#[test]
fn bad_configs_name_their_error_class() {
    let unknown = ExperimentConfig::from_toml_str("[experiment]\ntrails = 7\n").unwrap_err();
    assert_eq!(unknown.class(), "config");

    let mut cfg = small_config();
    cfg.experiment.iterations = 3;
    let err = harness::compute(Experiment::Sweep(Sweep::Scale), &cfg).unwrap_err();
    assert_eq!(err.class(), "invalid-argument");

    let mut cfg = small_config();
    cfg.experiment.freqs_ghz = vec![0.5];
    assert!(harness::compute(Experiment::Sweep(Sweep::FreqAperture), &cfg).is_err());

    let mut cfg = small_config();
    cfg.experiment.threads = Some(0);
    assert_eq!(
        harness::compute(Experiment::Convergence, &cfg).unwrap_err().class(),
        "config"
    );
}

#[test]
fn reduced_preset_is_smaller_than_baseline() {
    let base = ExperimentConfig::preset(Preset::Baseline);
    let red = ExperimentConfig::preset(Preset::Reduced);
    assert!(red.scenario.bs_elements < base.scenario.bs_elements);
    assert!(red.scenario.irs_elements < base.scenario.irs_elements);
    assert!(red.experiment.trials < base.experiment.trials);
}
