//! Experiment drivers: the convergence study and the five parameter sweeps.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ao::{self, AoTrace, InitKind};
use crate::error::{Error, Result};
use crate::geometry;
use crate::harness::rng::{self, derive_seed};
use crate::scenario::{Scenario, ScenarioSpec};
use crate::vps::vps_beamformer;

/// Iteration at which the best random trial is reported.
pub const BEST_AFTER: usize = 10;

pub const FREQ_RANGE_GHZ: (f64, f64) = (1.0, 300.0);
pub const ANGLE_RANGE_DEG: (f64, f64) = (-15.0, 15.0);
pub const SCALE_RANGE: (f64, f64) = (0.8, 3.0);

/// Power series reported per sweep point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeLabel {
    #[serde(rename = "VPS")]
    Vps,
    #[serde(rename = "VPS+AO")]
    VpsAo,
    #[serde(rename = "RandomAO_avg_iter1")]
    RandomAvgIter1,
    #[serde(rename = "RandomAO_avg_iter2")]
    RandomAvgIter2,
    #[serde(rename = "RandomAO_avg_iter3")]
    RandomAvgIter3,
    #[serde(rename = "RandomAO_best10")]
    RandomBest10,
}

impl SchemeLabel {
    pub const ALL: [SchemeLabel; 6] = [
        SchemeLabel::Vps,
        SchemeLabel::VpsAo,
        SchemeLabel::RandomAvgIter1,
        SchemeLabel::RandomAvgIter2,
        SchemeLabel::RandomAvgIter3,
        SchemeLabel::RandomBest10,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeLabel::Vps => "VPS",
            SchemeLabel::VpsAo => "VPS+AO",
            SchemeLabel::RandomAvgIter1 => "RandomAO_avg_iter1",
            SchemeLabel::RandomAvgIter2 => "RandomAO_avg_iter2",
            SchemeLabel::RandomAvgIter3 => "RandomAO_avg_iter3",
            SchemeLabel::RandomBest10 => "RandomAO_best10",
        }
    }
}

impl fmt::Display for SchemeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Shared knobs of every AO run in an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub trials: usize,
    pub iterations: usize,
    pub rel_tol: f64,
    pub master_seed: u64,
}

/// Statistics of the uniform-random AO trials at one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomAoStats {
    /// Mean power after 1, 2 and 3 iterations.
    pub avg_after: [f64; 3],
    /// Largest power across trials after 10 iterations.
    pub best_after_10: f64,
}

/// Runs `trials` uniform-random AO instances, trial `t` seeded from
/// `(master_seed, t)` only.
pub fn run_random_ao_stats(
    scenario: &Scenario,
    channels: &crate::channel::ChannelSet,
    trials: usize,
    iterations: usize,
    rel_tol: f64,
    master_seed: u64,
) -> Result<RandomAoStats> {
    if trials == 0 {
        return Err(Error::invalid("random AO statistics need at least one trial"));
    }
    if iterations < BEST_AFTER {
        return Err(Error::invalid(format!(
            "the best-of-trials statistic needs at least {BEST_AFTER} iterations, got {iterations}"
        )));
    }
    let traces: Vec<AoTrace> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let seed = derive_seed(master_seed, rng::TRIAL_TAG, t as u64);
            let init = ao::make_initializer(InitKind::UniformRandom, scenario, Some(seed))?;
            ao::ao_solve(channels, &init, iterations, rel_tol)
        })
        .collect::<Result<_>>()?;
    let mean = |i: usize| traces.iter().map(|tr| tr.power_at(i)).sum::<f64>() / trials as f64;
    Ok(RandomAoStats {
        avg_after: [mean(1), mean(2), mean(3)],
        best_after_10: traces
            .iter()
            .map(|tr| tr.power_at(BEST_AFTER))
            .fold(f64::NEG_INFINITY, f64::max),
    })
}

/// All six scheme values at one scenario.
pub fn evaluate_schemes(scenario: &Scenario, params: &RunParams) -> Result<BTreeMap<SchemeLabel, f64>> {
    let channels = scenario.channels()?;
    let vps_state = vps_beamformer(scenario)?;
    let vps_ao = ao::ao_solve(&channels, &vps_state, params.iterations, params.rel_tol)?;
    let stats = run_random_ao_stats(
        scenario,
        &channels,
        params.trials,
        params.iterations,
        params.rel_tol,
        params.master_seed,
    )?;
    Ok(BTreeMap::from([
        (SchemeLabel::Vps, vps_ao.initial()),
        (SchemeLabel::VpsAo, vps_ao.last()),
        (SchemeLabel::RandomAvgIter1, stats.avg_after[0]),
        (SchemeLabel::RandomAvgIter2, stats.avg_after[1]),
        (SchemeLabel::RandomAvgIter3, stats.avg_after[2]),
        (SchemeLabel::RandomBest10, stats.best_after_10),
    ]))
}

/// One AO trace of the convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledTrace {
    pub label: String,
    pub trace: AoTrace,
}

/// Convergence study: one trace per deterministic initializer and one per
/// seed for each random initializer, all on the same scenario with early
/// stopping disabled.
pub fn run_convergence(
    scenario: &Scenario,
    inits: &[InitKind],
    iterations: usize,
    seeds: &[u64],
) -> Result<Vec<LabeledTrace>> {
    if iterations == 0 {
        return Err(Error::invalid("convergence study needs at least one iteration"));
    }
    let channels = scenario.channels()?;
    let mut jobs: Vec<(String, InitKind, Option<u64>)> = Vec::new();
    for &kind in inits {
        if kind.is_random() {
            for (i, &seed) in seeds.iter().enumerate() {
                jobs.push((format!("{kind}_{}", i + 1), kind, Some(seed)));
            }
        } else {
            jobs.push((kind.to_string(), kind, None));
        }
    }
    jobs.into_par_iter()
        .map(|(label, kind, seed)| {
            let init = ao::make_initializer(kind, scenario, seed)?;
            let trace = ao::ao_solve(&channels, &init, iterations, 0.0)?.with_label(kind, seed);
            Ok(LabeledTrace { label, trace })
        })
        .collect()
}

/// Seeds for the two runs of each random initializer in the convergence study.
pub fn convergence_seeds(master_seed: u64, kind: InitKind) -> [u64; 2] {
    let tag = match kind {
        InitKind::GaussianRandom => rng::CONVERGENCE_GAUSSIAN_TAG,
        _ => rng::CONVERGENCE_UNIFORM_TAG,
    };
    [derive_seed(master_seed, tag, 0), derive_seed(master_seed, tag, 1)]
}

/// Convergence study over all five initializers with per-kind seeds.
pub fn run_convergence_all(scenario: &Scenario, iterations: usize, master_seed: u64) -> Result<Vec<LabeledTrace>> {
    let mut out = Vec::new();
    for kind in InitKind::ALL {
        let seeds = if kind.is_random() {
            convergence_seeds(master_seed, kind).to_vec()
        } else {
            Vec::new()
        };
        out.extend(run_convergence(scenario, &[kind], iterations, &seeds)?);
    }
    Ok(out)
}

/// Layout facts recorded for each sweep point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointMeta {
    pub value: f64,
    pub frequency_ghz: f64,
    pub n_bs: usize,
    pub m_irs: usize,
    pub bs_aperture_m: f64,
    pub irs_aperture_m: f64,
    pub bs_rayleigh_m: f64,
    pub irs_rayleigh_m: f64,
    pub scenario_digest: String,
}

impl PointMeta {
    fn of(value: f64, spec: &ScenarioSpec) -> Result<Self> {
        let lambda = spec.wavelength();
        Ok(PointMeta {
            value,
            frequency_ghz: spec.frequency_ghz,
            n_bs: spec.bs_elements,
            m_irs: spec.irs_elements,
            bs_aperture_m: spec.bs_aperture(),
            irs_aperture_m: spec.irs_aperture(),
            bs_rayleigh_m: geometry::rayleigh_distance(spec.bs_aperture(), lambda)?,
            irs_rayleigh_m: geometry::rayleigh_distance(spec.irs_aperture(), lambda)?,
            scenario_digest: spec.digest(),
        })
    }
}

/// One experiment's power series over its independent variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub variable_name: String,
    pub variable_values: Vec<f64>,
    pub series: BTreeMap<SchemeLabel, Vec<f64>>,
    pub points: Vec<PointMeta>,
    pub params: RunParams,
    pub scenario_digest: String,
}

impl SweepResult {
    pub fn series(&self, label: SchemeLabel) -> &[f64] {
        &self.series[&label]
    }
}

/// The sweeps, named as on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sweep {
    FreqAperture,
    BsAngle,
    IrsAngle,
    FreqRayleigh,
    Scale,
}

impl Sweep {
    pub const ALL: [Sweep; 5] = [
        Sweep::FreqAperture,
        Sweep::BsAngle,
        Sweep::IrsAngle,
        Sweep::FreqRayleigh,
        Sweep::Scale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Sweep::FreqAperture => "freq-aperture",
            Sweep::BsAngle => "bs-angle",
            Sweep::IrsAngle => "irs-angle",
            Sweep::FreqRayleigh => "freq-rayleigh",
            Sweep::Scale => "scale",
        }
    }

    pub fn variable_name(self) -> &'static str {
        match self {
            Sweep::FreqAperture | Sweep::FreqRayleigh => "frequency_ghz",
            Sweep::BsAngle => "bs_offset_deg",
            Sweep::IrsAngle => "irs_offset_deg",
            Sweep::Scale => "scale_factor",
        }
    }

    /// The configured list of values for this sweep.
    pub fn values(self, params: &crate::harness::config::ExperimentParams) -> &[f64] {
        match self {
            Sweep::FreqAperture | Sweep::FreqRayleigh => &params.freqs_ghz,
            Sweep::BsAngle => &params.bs_offsets_deg,
            Sweep::IrsAngle => &params.irs_offsets_deg,
            Sweep::Scale => &params.scale_factors,
        }
    }

    /// Scenario at one sweep value.
    pub fn point_spec(self, base: &ScenarioSpec, value: f64) -> Result<ScenarioSpec> {
        match self {
            Sweep::FreqAperture => fixed_aperture_spec(base, value),
            Sweep::BsAngle => {
                check_range("BS angle offset", value, ANGLE_RANGE_DEG)?;
                Ok(ScenarioSpec {
                    bs_axis_angle_deg: base.bs_axis_angle_deg + value,
                    ..base.clone()
                })
            }
            Sweep::IrsAngle => {
                check_range("IRS angle offset", value, ANGLE_RANGE_DEG)?;
                Ok(ScenarioSpec {
                    irs_normal_angle_deg: base.irs_normal_angle_deg + value,
                    ..base.clone()
                })
            }
            Sweep::FreqRayleigh => fixed_rayleigh_spec(base, value),
            Sweep::Scale => {
                check_range("scale factor", value, SCALE_RANGE)?;
                Ok(ScenarioSpec {
                    irs_center: base.irs_center.map(|c| c * value),
                    user: base.user.map(|c| c * value),
                    ..base.clone()
                })
            }
        }
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sweep {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Sweep::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown sweep `{s}`")))
    }
}

fn check_range(what: &str, value: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if !(value >= lo && value <= hi) {
        return Err(Error::InvalidSweep(format!("{what} {value} outside [{lo}, {hi}]")));
    }
    Ok(())
}

/// Elements needed to span `aperture` at `pitch`: `round(aperture / pitch) + 1`.
fn element_count(what: &str, aperture: f64, pitch: f64) -> Result<usize> {
    let n = (aperture / pitch).round() + 1.0;
    if !(n >= 2.0) {
        return Err(Error::InvalidSweep(format!(
            "{what} aperture {aperture} m at pitch {pitch} m leaves fewer than two elements"
        )));
    }
    Ok(n as usize)
}

fn with_apertures(base: &ScenarioSpec, freq_ghz: f64, bs_aperture: f64, irs_aperture: f64) -> Result<ScenarioSpec> {
    let mut spec = ScenarioSpec {
        frequency_ghz: freq_ghz,
        ..base.clone()
    };
    spec.bs_elements = element_count("BS", bs_aperture, spec.bs_spacing())?;
    spec.irs_elements = element_count("IRS", irs_aperture, spec.irs_spacing())?;
    Ok(spec)
}

/// Carrier changed, physical apertures kept.
pub fn fixed_aperture_spec(base: &ScenarioSpec, freq_ghz: f64) -> Result<ScenarioSpec> {
    check_range("frequency (GHz)", freq_ghz, FREQ_RANGE_GHZ)?;
    with_apertures(base, freq_ghz, base.bs_aperture(), base.irs_aperture())
}

/// Carrier changed, apertures scaled by `√(λ/λ₀)` so `2D²/λ` is unchanged.
pub fn fixed_rayleigh_spec(base: &ScenarioSpec, freq_ghz: f64) -> Result<ScenarioSpec> {
    check_range("frequency (GHz)", freq_ghz, FREQ_RANGE_GHZ)?;
    let lambda = geometry::wavelength(freq_ghz * 1e9);
    let scale = (lambda / base.wavelength()).sqrt();
    with_apertures(base, freq_ghz, base.bs_aperture() * scale, base.irs_aperture() * scale)
}

/// Evaluates all six schemes at every value of a sweep. Points run in
/// order; the trials inside each point run in parallel.
pub fn run_sweep(sweep: Sweep, base: &ScenarioSpec, values: &[f64], params: &RunParams) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::InvalidSweep(format!("{sweep} sweep has no points")));
    }
    let specs = values
        .iter()
        .map(|&v| sweep.point_spec(base, v))
        .collect::<Result<Vec<_>>>()?;
    let mut series: BTreeMap<SchemeLabel, Vec<f64>> = SchemeLabel::ALL.iter().map(|&l| (l, Vec::new())).collect();
    let mut points = Vec::with_capacity(values.len());
    for (spec, &value) in specs.iter().zip(values) {
        let scheme_values = evaluate_schemes(&spec.build()?, params)?;
        for (label, v) in scheme_values {
            series.get_mut(&label).expect("all labels present").push(v);
        }
        points.push(PointMeta::of(value, spec)?);
    }
    Ok(SweepResult {
        variable_name: sweep.variable_name().to_string(),
        variable_values: values.to_vec(),
        series,
        points,
        params: *params,
        scenario_digest: base.digest(),
    })
}

pub fn run_freq_sweep_fixed_aperture(
    base: &ScenarioSpec,
    freqs_ghz: &[f64],
    params: &RunParams,
) -> Result<SweepResult> {
    run_sweep(Sweep::FreqAperture, base, freqs_ghz, params)
}

pub fn run_bs_angle_sweep(base: &ScenarioSpec, offsets_deg: &[f64], params: &RunParams) -> Result<SweepResult> {
    run_sweep(Sweep::BsAngle, base, offsets_deg, params)
}

pub fn run_irs_angle_sweep(base: &ScenarioSpec, offsets_deg: &[f64], params: &RunParams) -> Result<SweepResult> {
    run_sweep(Sweep::IrsAngle, base, offsets_deg, params)
}

pub fn run_freq_sweep_fixed_rayleigh(
    base: &ScenarioSpec,
    freqs_ghz: &[f64],
    params: &RunParams,
) -> Result<SweepResult> {
    run_sweep(Sweep::FreqRayleigh, base, freqs_ghz, params)
}

pub fn run_scale_sweep(base: &ScenarioSpec, factors: &[f64], params: &RunParams) -> Result<SweepResult> {
    run_sweep(Sweep::Scale, base, factors, params)
}
