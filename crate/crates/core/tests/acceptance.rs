//! Acceptance suite. Each test prints one `criterion N ... PASS|FAIL` line
//! with the measured numbers before asserting.
//!
//! Criterion 5 evaluates every sweep at full size and takes
//! a few minutes in the optimized test profile.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use vpsbeam::ao::{self, InitKind};
use vpsbeam::geometry::{self, opposing_triangles_vertex};
use vpsbeam::harness::{self, Experiment, ExperimentConfig, Preset, RunParams, SchemeLabel, Sweep, SweepResult};
use vpsbeam::spectrum::{self, angular_spectrum, uniform_grid};
use vpsbeam::vps::{geometric_coupling_factor, optimize_vps_grid, GridSpec};
use vpsbeam::{channel, AmplitudeModel, BeamformerState, CMatrix, ChannelSet, Scenario, ScenarioSpec};

// Written to stderr directly so the line survives the test harness's output
// capture and shows up for passing criteria too.
fn report(criterion: &str, pass: bool, detail: &str) {
    let line = format!(
        "criterion {criterion}: {} | {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
}

// ---------------------------------------------------------------- 1

#[test]
fn criterion_1_near_field_significance() {
    let lambda = geometry::wavelength(28e9);
    let sig = geometry::nearfield_significance(150.0, 1.0, lambda).unwrap();
    let phase_over_pi = sig.max_phase_deviation / PI;
    let ratio_percent = sig.amplitude_variation_ratio * 100.0;
    let d_r = geometry::rayleigh_distance(1.0, lambda).unwrap();

    let phase_ok = (phase_over_pi - 0.156).abs() <= 0.002;
    let ratio_ok = ((ratio_percent - 0.00056) / 0.00056).abs() <= 0.05;
    let rayleigh_ok = (d_r - 186.7).abs() <= 0.1;
    let pass = phase_ok && ratio_ok && rayleigh_ok;
    report(
        "1 (near-field significance)",
        pass,
        &format!("phase = {phase_over_pi:.5}π rad, amplitude ratio = {ratio_percent:.7}%, d_R = {d_r:.4} m"),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 2

/// Baseline layout with random rotations, link length and element counts.
fn random_layout(rng: &mut ChaCha20Rng) -> Scenario {
    let mut s = ScenarioSpec::baseline();
    s.bs_axis_angle_deg += rng.gen_range(-15.0..15.0);
    s.irs_normal_angle_deg += rng.gen_range(-15.0..15.0);
    let f: f64 = rng.gen_range(0.8..3.0);
    s.irs_center = [50.0 * f, 0.0];
    s.user = [37.5 * f, -12.5 * f];
    s.bs_elements = rng.gen_range(100..800);
    s.irs_elements = rng.gen_range(500..4000);
    s.build().unwrap()
}

#[test]
fn criterion_2_vertex_optimality() {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_0002);
    let mut scenarios = vec![Scenario::baseline()];
    scenarios.extend((0..20).map(|_| random_layout(&mut rng)));

    let mut worst_cells: f64 = 0.0;
    let mut worst_eta: f64 = 1.0;
    let mut failures = 0;
    for sc in &scenarios {
        let v = opposing_triangles_vertex(&sc.bs, &sc.irs).unwrap();
        let grid = GridSpec::between(&sc.bs, &sc.irs, 201).unwrap();
        let best = optimize_vps_grid(&sc.bs, &sc.irs, &grid).unwrap();
        let (dx, dy) = grid.cell();
        let cells = ((best.point.x - v.x).abs() / dx).max((best.point.y - v.y).abs() / dy);
        let eta_v = geometric_coupling_factor(v, &sc.bs, &sc.irs).unwrap().eta_g;
        worst_cells = worst_cells.max(cells);
        worst_eta = worst_eta.min(eta_v);
        if cells > 1.0 || eta_v < 1.0 - 1e-9 {
            failures += 1;
        }
    }
    let pass = failures == 0;
    report(
        "2 (VPS vertex optimality)",
        pass,
        &format!(
            "{} scenarios, worst argmax offset {worst_cells:.3} cells, min η_G at vertex {worst_eta:.15}",
            scenarios.len()
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 3

/// Small random scenario: baseline family with a few elements and a user
/// anywhere on the far side of the IRS normal plane.
fn toy_scenario(rng: &mut ChaCha20Rng) -> Scenario {
    let mut s = ScenarioSpec::baseline().with_counts(rng.gen_range(2..24), rng.gen_range(2..64));
    s.frequency_ghz = rng.gen_range(10.0..80.0);
    s.bs_axis_angle_deg += rng.gen_range(-15.0..15.0);
    s.irs_normal_angle_deg += rng.gen_range(-15.0..15.0);
    s.user = [rng.gen_range(20.0..45.0), rng.gen_range(-30.0..-5.0)];
    s.build().unwrap()
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha20Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng))
    })
}

/// Singular values of `h` from the Hermitian eigenproblem of `H^H H`,
/// largest first.
fn singular_values(h: &CMatrix) -> Vec<f64> {
    let m = DMatrix::from_fn(h.rows(), h.cols(), |i, j| {
        let z = h.get(i, j);
        Complex::new(z.re, z.im)
    });
    let gram = m.adjoint() * &m;
    let mut ev: Vec<f64> = gram
        .symmetric_eigenvalues()
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

#[test]
fn criterion_3_ao_oracles() {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_0003);

    // (a) monotone traces
    let mut worst_drop: f64 = 0.0;
    for i in 0..100 {
        let sc = toy_scenario(&mut rng);
        let ch = sc.channels().unwrap();
        let kind = InitKind::ALL[i % InitKind::ALL.len()];
        let init = ao::make_initializer(kind, &sc, Some(rng.gen())).unwrap();
        let tr = ao::ao_solve(&ch, &init, 20, 0.0).unwrap();
        for w in tr.powers.windows(2) {
            worst_drop = worst_drop.max((w[0] - w[1]) / w[0].max(f64::MIN_POSITIVE));
        }
    }
    let a_ok = worst_drop <= 1e-9;

    // (b) point-to-point AO reaches σ_max²
    let mut worst_rel: f64 = 0.0;
    let mut accepted = 0;
    while accepted < 50 {
        let h = gaussian_matrix(8, 6, &mut rng);
        let sv = singular_values(&h);
        if (sv[0] - sv[1]) / sv[0] <= 0.05 {
            continue;
        }
        accepted += 1;
        let w0: Vec<Complex64> = (0..6)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let tr = ao::ao_solve_p2p(&h, &w0, 2000, 0.0).unwrap();
        let target = sv[0] * sv[0];
        worst_rel = worst_rel.max((tr.last() - target).abs() / target);
    }
    let b_ok = worst_rel <= 1e-6;

    // (c) the IRS update beats random phase profiles
    let mut beaten = 0usize;
    for _ in 0..10 {
        let (m, n) = (rng.gen_range(4..12), rng.gen_range(2..6));
        let h = gaussian_matrix(m, n, &mut rng);
        let h_r: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let ch = ChannelSet::new(h, h_r, 1.0, AmplitudeModel::Unit).unwrap();
        let omega = BeamformerState::from_phases(
            &(0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect::<Vec<_>>(),
            vec![0.0; m],
        )
        .unwrap()
        .omega_t;
        let theta = ao::irs_update(&ch, &omega).unwrap();
        let best = ao::received_power(&ch, &BeamformerState::new(omega.clone(), theta).unwrap()).unwrap();
        for _ in 0..100_000 {
            let t: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
            let p = ao::received_power(&ch, &BeamformerState::new(omega.clone(), t).unwrap()).unwrap();
            if p > best * (1.0 + 1e-12) {
                beaten += 1;
            }
        }
    }
    let c_ok = beaten == 0;

    let pass = a_ok && b_ok && c_ok;
    report(
        "3 (AO oracles)",
        pass,
        &format!(
            "(a) worst relative drop {worst_drop:.2e}; (b) worst |P - σ²|/σ² {worst_rel:.2e}; (c) random draws beating irs_update: {beaten}"
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 4

#[test]
fn criterion_4_convergence_ordering() {
    let sc = Scenario::baseline();
    let traces = harness::run_convergence_all(&sc, 10, ExperimentConfig::default().rng.master_seed).unwrap();
    let vps = traces.iter().find(|t| t.label == "vps").unwrap();
    let others: Vec<_> = traces.iter().filter(|t| t.label != "vps").collect();
    let vps0 = vps.trace.initial();
    let vps_final = vps.trace.last();
    let best_other = others.iter().map(|t| t.trace.last()).fold(f64::NEG_INFINITY, f64::max);
    let initial_ok = others.iter().all(|t| vps0 > t.trace.last());
    let final_ok = others.iter().all(|t| vps_final >= t.trace.last());
    let finals: Vec<String> = others
        .iter()
        .map(|t| format!("{}={:.1}", t.label, t.trace.last()))
        .collect();
    let pass = initial_ok && final_ok;
    report(
        "4 (convergence ordering)",
        pass,
        &format!(
            "VPS iter0 = {vps0:.1}, VPS+AO = {vps_final:.1}, best other final = {best_other:.1}; \
             iter0 beats all finals: {initial_ok}; VPS+AO is max: {final_ok}; [{}]",
            finals.join(", ")
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 5

struct SweepCheck {
    points: usize,
    a_fail: Vec<String>,
    b_fail: Vec<String>,
    min_vps_ratio: f64,
    max_gap: f64,
}

fn check_sweep(name: &str, r: &SweepResult, out: &mut SweepCheck) {
    for (i, x) in r.variable_values.iter().enumerate() {
        let v = |l| r.series(l)[i];
        let vps = v(SchemeLabel::Vps);
        let avg3 = v(SchemeLabel::RandomAvgIter3);
        let best = v(SchemeLabel::RandomBest10);
        let gap = (v(SchemeLabel::VpsAo) - best).abs() / best;
        out.points += 1;
        out.min_vps_ratio = out.min_vps_ratio.min(vps / avg3);
        out.max_gap = out.max_gap.max(gap);
        if vps < avg3 {
            out.a_fail.push(format!("{name}@{x}"));
        }
        if gap > 0.02 {
            out.b_fail.push(format!("{name}@{x}"));
        }
    }
}

fn run_criterion_5(label: &str, cfg: &ExperimentConfig) {
    let params = RunParams {
        trials: cfg.experiment.trials,
        iterations: cfg.experiment.iterations,
        rel_tol: cfg.experiment.rel_tol,
        master_seed: cfg.rng.master_seed,
    };
    let mut check = SweepCheck {
        points: 0,
        a_fail: Vec::new(),
        b_fail: Vec::new(),
        min_vps_ratio: f64::INFINITY,
        max_gap: 0.0,
    };
    for sweep in Sweep::ALL {
        let r = harness::run_sweep(sweep, &cfg.scenario, sweep.values(&cfg.experiment), &params).unwrap();
        check_sweep(sweep.name(), &r, &mut check);
    }
    let a_ok = check.a_fail.is_empty();
    let b_ok = check.b_fail.is_empty();
    report(
        &format!("5 (sweep claims, {label})"),
        a_ok && b_ok,
        &format!(
            "{} points; (a) VPS >= avg_iter3 fails at {} points, min VPS/avg_iter3 = {:.4}; \
             (b) |VPS+AO - best10| <= 2% fails at {} points {:?}, max gap = {:.3}%",
            check.points,
            check.a_fail.len(),
            check.min_vps_ratio,
            check.b_fail.len(),
            check.b_fail,
            100.0 * check.max_gap
        ),
    );
    assert!(a_ok && b_ok);
}

#[test]
fn criterion_5_sweeps_full_scale() {
    run_criterion_5("full scale, 100 trials", &ExperimentConfig::preset(Preset::Baseline));
}

#[test]
fn criterion_5_sweeps_reduced_preset() {
    run_criterion_5("reduced preset, 20 trials", &ExperimentConfig::preset(Preset::Reduced));
}

// ---------------------------------------------------------------- 6

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

#[test]
fn criterion_6_spectrum_properties() {
    let lambda = geometry::wavelength(30e9);
    let k = geometry::wavenumber(lambda);

    // matched combiner reproduces the receiver's shifted diffraction pattern
    let (n, d, beta0) = (64, lambda / 2.0, 0.3);
    let w = spectrum::mrc_combiner(&channel::steering_far(n, d, k, beta0).unwrap()).unwrap();
    let s = angular_spectrum(&w, d, lambda, uniform_grid(-1.0, 1.0, 2001)).unwrap();
    let pattern: Vec<f64> = s
        .beta_grid()
        .iter()
        .map(|b| spectrum::diffraction_sinc(n as f64 * d, lambda, b - beta0).abs())
        .collect();
    let corr = correlation(&s.magnitudes(), &pattern);
    let mrc_ok = corr >= 0.999;

    // half-power width scaling
    let w1 = spectrum::halfpower_width(1.0, lambda).unwrap();
    let w2 = spectrum::halfpower_width(2.0, lambda).unwrap();
    let halving = (w1 / w2 - 2.0).abs() / 2.0;
    let products: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|r| spectrum::halfpower_width(r * lambda, lambda).unwrap() * r)
        .collect();
    let spread = products
        .iter()
        .map(|p| (p - products[0]).abs() / products[0])
        .fold(0.0, f64::max);
    let width_ok = halving <= 1e-6 && spread <= 1e-4;

    // grating lobes: present at d = λ, absent at d = λ/2
    let lobes = |spacing: f64| {
        let seq: Vec<Complex64> = channel::steering_far(32, spacing, k, 0.5)
            .unwrap()
            .into_iter()
            .map(|a| a.conj())
            .collect();
        angular_spectrum(&seq, spacing, lambda, uniform_grid(-1.0, 1.0, 4001))
            .unwrap()
            .local_maxima(0.99)
            .len()
    };
    let (at_lambda, at_half) = (lobes(lambda), lobes(lambda / 2.0));
    let alias_ok = at_lambda == 2 && at_half == 1;

    let pass = mrc_ok && width_ok && alias_ok;
    report(
        "6 (spectrum properties)",
        pass,
        &format!(
            "MRC correlation {corr:.6}; width halving error {halving:.2e}, width·D/λ = {:.6} (spread {spread:.2e}); \
             full-height peaks at d=λ: {at_lambda}, at d=λ/2: {at_half}",
            products[0]
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------- 7

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn series_of(csv: &[u8], scheme: &str) -> Vec<String> {
    String::from_utf8_lossy(csv)
        .lines()
        .filter(|l| l.split(',').nth(1) == Some(scheme))
        .map(str::to_owned)
        .collect()
}

#[test]
fn criterion_7_determinism() {
    let mut cfg = ExperimentConfig::preset(Preset::Reduced);
    cfg.experiment.trials = 10;
    let tmp = tempfile::tempdir().unwrap();
    let run = |cfg: &ExperimentConfig, name: &str| {
        let root = tmp.path().join(name);
        for e in [
            Experiment::Convergence,
            Experiment::Sweep(Sweep::Scale),
            Experiment::Sweep(Sweep::IrsAngle),
        ] {
            harness::run_experiment(e, cfg, &root).unwrap();
        }
        read_tree(&root)
    };
    let first = run(&cfg, "a");
    let mut threaded = cfg.clone();
    threaded.experiment.threads = Some(3);
    let second = run(&threaded, "b");
    let identical = first == second;

    let mut reseeded = cfg.clone();
    reseeded.rng.master_seed ^= 0xdead_beef;
    let third = run(&reseeded, "c");
    let csv_a = &first["scale/data.csv"];
    let csv_c = &third["scale/data.csv"];
    let vps_same =
        series_of(csv_a, "VPS") == series_of(csv_c, "VPS") && series_of(csv_a, "VPS+AO") == series_of(csv_c, "VPS+AO");
    let random_changed = series_of(csv_a, "RandomAO_avg_iter1") != series_of(csv_c, "RandomAO_avg_iter1");
    let traces_changed =
        first["convergence/traces/uniform_random_1.csv"] != third["convergence/traces/uniform_random_1.csv"];
    let vps_trace_same = first["convergence/traces/vps.csv"] == third["convergence/traces/vps.csv"];

    let pass = identical && vps_same && random_changed && traces_changed && vps_trace_same;
    report(
        "7 (determinism)",
        pass,
        &format!(
            "{} files byte-identical across reruns (1 vs 3 threads): {identical}; new seed keeps VPS series: {}; \
             changes random series: {}",
            first.len(),
            vps_same && vps_trace_same,
            random_changed && traces_changed
        ),
    );
    assert!(pass);
}
