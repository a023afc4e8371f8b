//! Experiment execution and on-disk layout.
//!
//! Each experiment writes to `<out>/<experiment>/`:
//!
//! - `data.csv` in long format, header `variable,scheme,value`;
//! - `meta.json` with the configuration echo, seeds, digests and per-point
//!   layout facts;
//! - `traces/<label>.csv` and `traces/<label>.json` for the convergence study.
//!
//! Files carry no timestamps or thread counts, so equal configurations give
//! byte-identical output.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::ao::InitKind;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::experiments::{self, LabeledTrace, PointMeta, RunParams, SchemeLabel, Sweep, SweepResult};

pub const DATA_FILE: &str = "data.csv";
pub const META_FILE: &str = "meta.json";
pub const TRACES_DIR: &str = "traces";

const POWER_NORMALIZATION: &str = "|h_r^H diag(e^{j theta}) H_t w_t|^2 / N_BS with ||w_t|| = 1";

/// An experiment runnable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Convergence,
    Sweep(Sweep),
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Convergence,
        Experiment::Sweep(Sweep::FreqAperture),
        Experiment::Sweep(Sweep::BsAngle),
        Experiment::Sweep(Sweep::IrsAngle),
        Experiment::Sweep(Sweep::FreqRayleigh),
        Experiment::Sweep(Sweep::Scale),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Convergence => "convergence",
            Experiment::Sweep(s) => s.name(),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown experiment `{s}`")))
    }
}

#[derive(Serialize)]
struct TraceSidecar<'a> {
    label: &'a str,
    init_kind: Option<InitKind>,
    seed: Option<u64>,
    scenario_digest: &'a str,
    iterations_run: usize,
    converged: bool,
}

#[derive(Serialize)]
struct Meta<'a> {
    experiment: &'a str,
    package_version: &'a str,
    variable_name: &'a str,
    variable_values: Vec<f64>,
    master_seed: u64,
    trials: usize,
    iterations: usize,
    rel_tol: f64,
    power_normalization: &'a str,
    canonical_rayleigh: &'a str,
    scenario_digest: String,
    config: ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<&'a [PointMeta]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    traces: Option<Vec<&'a str>>,
}

impl<'a> Meta<'a> {
    fn new(experiment: Experiment, cfg: &ExperimentConfig, variable_name: &'a str, variable_values: Vec<f64>) -> Self {
        // the thread count does not affect results, so it is not echoed
        let mut config = cfg.clone();
        config.experiment.threads = None;
        Meta {
            experiment: experiment.name(),
            package_version: env!("CARGO_PKG_VERSION"),
            variable_name,
            variable_values,
            master_seed: cfg.rng.master_seed,
            trials: cfg.experiment.trials,
            iterations: cfg.experiment.iterations,
            rel_tol: cfg.experiment.rel_tol,
            power_normalization: POWER_NORMALIZATION,
            canonical_rayleigh: "bs",
            scenario_digest: cfg.scenario.digest(),
            config,
            points: None,
            traces: None,
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn make_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Long-format CSV of a sweep: one row per (point, scheme).
pub fn write_sweep_csv<W: Write>(mut out: W, result: &SweepResult) -> Result<()> {
    writeln!(out, "variable,scheme,value")?;
    for (i, x) in result.variable_values.iter().enumerate() {
        for label in SchemeLabel::ALL {
            writeln!(out, "{x},{label},{}", result.series(label)[i])?;
        }
    }
    Ok(())
}

/// Long-format CSV of the convergence traces; the variable is the iteration.
pub fn write_convergence_csv<W: Write>(mut out: W, traces: &[LabeledTrace]) -> Result<()> {
    writeln!(out, "variable,scheme,value")?;
    for t in traces {
        for (i, p) in t.trace.powers.iter().enumerate() {
            writeln!(out, "{i},{},{p}", t.label)?;
        }
    }
    Ok(())
}

pub fn write_sweep(dir: &Path, sweep: Sweep, cfg: &ExperimentConfig, result: &SweepResult) -> Result<()> {
    make_dir(dir)?;
    let mut csv = create(&dir.join(DATA_FILE))?;
    write_sweep_csv(&mut csv, result)?;
    csv.flush()?;
    let mut meta = Meta::new(
        Experiment::Sweep(sweep),
        cfg,
        &result.variable_name,
        result.variable_values.clone(),
    );
    meta.points = Some(&result.points);
    write_json(&dir.join(META_FILE), &meta)
}

pub fn write_convergence(dir: &Path, cfg: &ExperimentConfig, traces: &[LabeledTrace]) -> Result<()> {
    let trace_dir = dir.join(TRACES_DIR);
    make_dir(&trace_dir)?;
    let digest = cfg.scenario.digest();
    for t in traces {
        let mut csv = create(&trace_dir.join(format!("{}.csv", t.label)))?;
        t.trace.write_csv(&mut csv)?;
        csv.flush()?;
        let sidecar = TraceSidecar {
            label: &t.label,
            init_kind: t.trace.init_kind,
            seed: t.trace.seed,
            scenario_digest: &digest,
            iterations_run: t.trace.iterations_run,
            converged: t.trace.converged,
        };
        write_json(&trace_dir.join(format!("{}.json", t.label)), &sidecar)?;
    }
    let mut csv = create(&dir.join(DATA_FILE))?;
    write_convergence_csv(&mut csv, traces)?;
    csv.flush()?;
    let iterations = (0..=cfg.experiment.iterations).map(|i| i as f64).collect();
    let mut meta = Meta::new(Experiment::Convergence, cfg, "iteration", iterations);
    meta.traces = Some(traces.iter().map(|t| t.label.as_str()).collect());
    write_json(&dir.join(META_FILE), &meta)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("thread count must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Result of one experiment run, before it is written out.
#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentData {
    Convergence(Vec<LabeledTrace>),
    Sweep(Sweep, SweepResult),
}

fn run_params(cfg: &ExperimentConfig) -> RunParams {
    RunParams {
        trials: cfg.experiment.trials,
        iterations: cfg.experiment.iterations,
        rel_tol: cfg.experiment.rel_tol,
        master_seed: cfg.rng.master_seed,
    }
}

/// Computes an experiment without touching the filesystem.
pub fn compute(experiment: Experiment, cfg: &ExperimentConfig) -> Result<ExperimentData> {
    cfg.validate()?;
    with_threads(cfg.experiment.threads, || match experiment {
        Experiment::Convergence => {
            let scenario = cfg.scenario.build()?;
            experiments::run_convergence_all(&scenario, cfg.experiment.iterations, cfg.rng.master_seed)
                .map(ExperimentData::Convergence)
        }
        Experiment::Sweep(sweep) => {
            let values = sweep.values(&cfg.experiment);
            experiments::run_sweep(sweep, &cfg.scenario, values, &run_params(cfg))
                .map(|r| ExperimentData::Sweep(sweep, r))
        }
    })?
}

/// Runs an experiment and writes it under `out_root`; returns its directory.
pub fn run_experiment(experiment: Experiment, cfg: &ExperimentConfig, out_root: &Path) -> Result<PathBuf> {
    let data = compute(experiment, cfg)?;
    let dir = out_root.join(experiment.name());
    match &data {
        ExperimentData::Convergence(traces) => write_convergence(&dir, cfg, traces)?,
        ExperimentData::Sweep(sweep, result) => write_sweep(&dir, *sweep, cfg, result)?,
    }
    Ok(dir)
}

/// Runs all six experiments in order.
pub fn run_all(cfg: &ExperimentConfig, out_root: &Path) -> Result<Vec<PathBuf>> {
    Experiment::ALL
        .into_iter()
        .map(|e| run_experiment(e, cfg, out_root))
        .collect()
}
