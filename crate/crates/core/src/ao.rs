//! Alternating optimization (AO) baseline.
//!
//! For a fixed IRS profile the best BS beamformer is MRT on the effective
//! channel `g^H = h_r^H Θ H_t`; for a fixed BS beamformer the best unit-modulus
//! IRS profile aligns every reflected term to a common phase. Alternating the
//! two exact block updates never decreases the received power, but the
//! fixed point it reaches depends on where it starts.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::channel::{steering_far, ChannelSet};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::scenario::Scenario;
use crate::vps::{vps_beamformer, wrap_phase, BeamformerState};

pub const DEFAULT_MAX_ITER: usize = 50;
pub const DEFAULT_REL_TOL: f64 = 1e-6;

/// Standard deviation of the Gaussian phase initializer, π/4.
pub const GAUSSIAN_PHASE_STD: f64 = std::f64::consts::FRAC_PI_4;

/// How an AO run was initialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    FarField,
    ZeroPhase,
    UniformRandom,
    GaussianRandom,
    Vps,
}

impl InitKind {
    pub const ALL: [InitKind; 5] = [
        InitKind::FarField,
        InitKind::ZeroPhase,
        InitKind::UniformRandom,
        InitKind::GaussianRandom,
        InitKind::Vps,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InitKind::FarField => "far_field",
            InitKind::ZeroPhase => "zero_phase",
            InitKind::UniformRandom => "uniform_random",
            InitKind::GaussianRandom => "gaussian_random",
            InitKind::Vps => "vps",
        }
    }

    pub fn is_random(self) -> bool {
        matches!(self, InitKind::UniformRandom | InitKind::GaussianRandom)
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        InitKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown initializer `{s}`")))
    }
}

/// Normalized power after each iteration, starting with the initializer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AoTrace {
    pub powers: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub init_kind: Option<InitKind>,
    pub seed: Option<u64>,
}

impl AoTrace {
    fn start(p0: f64) -> Self {
        AoTrace {
            powers: vec![p0],
            iterations_run: 0,
            converged: false,
            init_kind: None,
            seed: None,
        }
    }

    /// Records a new iterate; returns true when the relative gain falls
    /// below `rel_tol` (never, for `rel_tol <= 0`).
    fn push(&mut self, power: f64, rel_tol: f64) -> bool {
        let prev = *self.powers.last().unwrap();
        self.powers.push(power);
        self.iterations_run += 1;
        if rel_tol > 0.0 && prev > 0.0 && (power - prev) / prev < rel_tol {
            self.converged = true;
        }
        self.converged
    }

    pub fn with_label(mut self, kind: InitKind, seed: Option<u64>) -> Self {
        self.init_kind = Some(kind);
        self.seed = seed;
        self
    }

    pub fn initial(&self) -> f64 {
        self.powers[0]
    }

    pub fn last(&self) -> f64 {
        *self.powers.last().unwrap()
    }

    /// Power after `iteration` iterations; a run that stopped early holds
    /// its final value.
    pub fn power_at(&self, iteration: usize) -> f64 {
        self.powers[iteration.min(self.powers.len() - 1)]
    }

    /// `iteration,power` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,power")?;
        for (i, p) in self.powers.iter().enumerate() {
            writeln!(out, "{i},{p}")?;
        }
        Ok(())
    }
}

fn check_dims(ch: &ChannelSet, n_bs: Option<usize>, n_irs: Option<usize>) -> Result<()> {
    if let Some(n) = n_bs {
        if n != ch.num_bs() {
            return Err(Error::invalid(format!(
                "BS beamformer has {n} entries, channel has {} BS elements",
                ch.num_bs()
            )));
        }
    }
    if let Some(m) = n_irs {
        if m != ch.num_irs() {
            return Err(Error::invalid(format!(
                "IRS profile has {m} entries, channel has {} IRS elements",
                ch.num_irs()
            )));
        }
    }
    Ok(())
}

/// `Σ_m conj(h_r[m]) e^{jθ_m} (H_t ω_t)_m`.
fn combine(h_r: &[Complex64], theta: &[f64], h_omega: &[Complex64]) -> Complex64 {
    h_r.iter()
        .zip(theta)
        .zip(h_omega)
        .fold(Complex64::new(0.0, 0.0), |acc, ((h, &t), x)| {
            acc + h.conj() * Complex64::from_polar(1.0, t) * x
        })
}

/// `|h_r^H Θ H_t ω_t|² / N_BS`.
pub fn received_power(channels: &ChannelSet, state: &BeamformerState) -> Result<f64> {
    check_dims(channels, Some(state.omega_t.len()), Some(state.theta.len()))?;
    let h_omega = channels.h_t.mul_vec(&state.omega_t);
    Ok(combine(&channels.h_r, &state.theta, &h_omega).norm_sqr() / channels.num_bs() as f64)
}

/// Effective BS-side channel `g = (h_r^H Θ H_t)^H = H_t^H (conj(h_r) ∘ e^{jθ})^*`.
fn effective_channel(channels: &ChannelSet, theta: &[f64]) -> Vec<Complex64> {
    let v: Vec<Complex64> = channels
        .h_r
        .iter()
        .zip(theta)
        .map(|(h, &t)| h * Complex64::from_polar(1.0, -t))
        .collect();
    channels.h_t.adjoint_mul_vec(&v)
}

/// MRT on the effective channel: `ω_t = g / ‖g‖`.
pub fn mrt_update(channels: &ChannelSet, theta: &[f64]) -> Result<Vec<Complex64>> {
    check_dims(channels, None, Some(theta.len()))?;
    let g = effective_channel(channels, theta);
    linalg::normalized(&g).ok_or_else(|| Error::DegenerateChannel("effective BS channel is zero".into()))
}

fn align_phases(h_r: &[Complex64], h_omega: &[Complex64]) -> Vec<f64> {
    h_r.iter()
        .zip(h_omega)
        .map(|(h, x)| {
            let z = h.conj() * x;
            if z.norm_sqr() == 0.0 {
                0.0
            } else {
                wrap_phase(-z.arg())
            }
        })
        .collect()
}

/// Per-element phase alignment: `θ_m = -arg(conj(h_r[m]) (H_t ω_t)_m)`.
pub fn irs_update(channels: &ChannelSet, omega_t: &[Complex64]) -> Result<Vec<f64>> {
    check_dims(channels, Some(omega_t.len()), None)?;
    let h_omega = channels.h_t.mul_vec(omega_t);
    Ok(align_phases(&channels.h_r, &h_omega))
}

/// AO from `init`, returning the trace and the final state. One iteration is
/// an IRS update followed by an MRT update.
pub fn ao_solve_with_state(
    channels: &ChannelSet,
    init: &BeamformerState,
    max_iter: usize,
    rel_tol: f64,
) -> Result<(AoTrace, BeamformerState)> {
    check_dims(channels, Some(init.omega_t.len()), Some(init.theta.len()))?;
    let n_bs = channels.num_bs() as f64;
    let mut omega = init.omega_t.clone();
    let mut theta = init.theta.clone();
    let mut h_omega = channels.h_t.mul_vec(&omega);
    let mut trace = AoTrace::start(combine(&channels.h_r, &theta, &h_omega).norm_sqr() / n_bs);
    for _ in 0..max_iter {
        theta = align_phases(&channels.h_r, &h_omega);
        omega = mrt_update(channels, &theta)?;
        h_omega = channels.h_t.mul_vec(&omega);
        let power = combine(&channels.h_r, &theta, &h_omega).norm_sqr() / n_bs;
        if trace.push(power, rel_tol) {
            break;
        }
    }
    Ok((trace, BeamformerState { omega_t: omega, theta }))
}

pub fn ao_solve(channels: &ChannelSet, init: &BeamformerState, max_iter: usize, rel_tol: f64) -> Result<AoTrace> {
    ao_solve_with_state(channels, init, max_iter, rel_tol).map(|(t, _)| t)
}

/// Point-to-point AO: alternates MRC `ω_r = H ω_t / ‖H ω_t‖` and MRT
/// `ω_t = H^H ω_r / ‖H^H ω_r‖`. The power `|ω_r^H H ω_t|²` climbs to the
/// squared largest singular value of `H`; iteration 0 pairs the initial
/// `ω_t` with its matched `ω_r`.
pub fn ao_solve_p2p(h: &CMatrix, init_omega_t: &[Complex64], max_iter: usize, rel_tol: f64) -> Result<AoTrace> {
    if init_omega_t.len() != h.cols() {
        return Err(Error::invalid(format!(
            "transmit vector has {} entries, matrix has {} columns",
            init_omega_t.len(),
            h.cols()
        )));
    }
    if h.is_zero() {
        return Err(Error::DegenerateChannel("channel matrix is zero".into()));
    }
    let mut omega_t =
        linalg::normalized(init_omega_t).ok_or_else(|| Error::invalid("initial transmit vector is zero"))?;
    let degenerate = || Error::DegenerateChannel("transmit vector lies in the null space of H".into());
    let mut trace = AoTrace::start(linalg::norm(&h.mul_vec(&omega_t)).powi(2));
    for _ in 0..max_iter {
        let omega_r = linalg::normalized(&h.mul_vec(&omega_t)).ok_or_else(degenerate)?;
        let back = h.adjoint_mul_vec(&omega_r);
        omega_t = linalg::normalized(&back).ok_or_else(degenerate)?;
        let power = linalg::inner(&omega_r, &h.mul_vec(&omega_t)).norm_sqr();
        if trace.push(power, rel_tol) {
            break;
        }
    }
    Ok(trace)
}

/// Stream for the random initializers.
pub fn init_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn far_field_state(scenario: &Scenario) -> Result<BeamformerState> {
    let k = scenario.wavenumber();
    let (bs, irs) = (&scenario.bs, &scenario.irs);
    let beta_bs = bs.direction_sine(irs.center())?;
    // transmit weights are the conjugate of the array response toward the IRS
    let omega: Vec<Complex64> = steering_far(bs.num_elements(), bs.spacing(), k, beta_bs)?
        .into_iter()
        .map(|a| a.conj())
        .collect();
    let beta_in = irs.direction_sine(bs.center())?;
    let beta_out = irs.direction_sine(scenario.user)?;
    let theta = (0..irs.num_elements())
        .map(|m| k * irs.element_offset(m) * (beta_in + beta_out))
        .collect();
    BeamformerState::new(omega, theta)
}

fn random_state(
    scenario: &Scenario,
    seed: u64,
    mut draw: impl FnMut(&mut ChaCha20Rng) -> f64,
) -> Result<BeamformerState> {
    let mut rng = init_rng(seed);
    let bs: Vec<f64> = (0..scenario.bs.num_elements()).map(|_| draw(&mut rng)).collect();
    let irs: Vec<f64> = (0..scenario.irs.num_elements()).map(|_| draw(&mut rng)).collect();
    BeamformerState::from_phases(&bs, irs)
}

/// Builds an initial state. Random kinds draw the BS phases first, then the
/// IRS phases, from one stream seeded by `seed`.
pub fn make_initializer(kind: InitKind, scenario: &Scenario, seed: Option<u64>) -> Result<BeamformerState> {
    let need_seed = || Error::invalid(format!("initializer `{kind}` requires a seed"));
    match kind {
        InitKind::FarField => far_field_state(scenario),
        InitKind::ZeroPhase => BeamformerState::from_phases(
            &vec![0.0; scenario.bs.num_elements()],
            vec![0.0; scenario.irs.num_elements()],
        ),
        InitKind::UniformRandom => {
            let seed = seed.ok_or_else(need_seed)?;
            random_state(scenario, seed, |rng| rng.gen_range(0.0..std::f64::consts::TAU))
        }
        InitKind::GaussianRandom => {
            let seed = seed.ok_or_else(need_seed)?;
            let normal = Normal::new(0.0, GAUSSIAN_PHASE_STD).expect("valid std");
            random_state(scenario, seed, |rng| normal.sample(rng))
        }
        InitKind::Vps => vps_beamformer(scenario),
    }
}
