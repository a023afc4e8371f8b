//! Experiment harness: configuration, seeded trial streams, sweep drivers and
//! file output.

pub mod config;
pub mod experiments;
pub mod output;
pub mod rng;

pub use config::{ExperimentConfig, ExperimentParams, Preset};
pub use experiments::{
    evaluate_schemes, run_bs_angle_sweep, run_convergence, run_convergence_all, run_freq_sweep_fixed_aperture,
    run_freq_sweep_fixed_rayleigh, run_irs_angle_sweep, run_random_ao_stats, run_scale_sweep, run_sweep, LabeledTrace,
    PointMeta, RandomAoStats, RunParams, SchemeLabel, Sweep, SweepResult,
};
pub use output::{compute, run_all, run_experiment, Experiment, ExperimentData};
