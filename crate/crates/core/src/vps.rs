//! Virtual point source (VPS) beamforming.
//!
//! The BS focuses onto a virtual source `s` placed at the vertex of the
//! opposing triangles spanned by the BS and IRS apertures; the IRS then
//! re-radiates the diverging wave from `s` toward the user. Both steps are
//! closed-form, so the whole design costs one distance evaluation per element.
//!
//! The geometric coupling factor measures how well the angular sector that
//! the BS illuminates through `s` overlaps the sector the IRS subtends at
//! `s`. Its maximum sits at the opposing-triangles vertex, which the grid
//! search in [`optimize_vps_grid`] cross-checks.

use std::cmp::Ordering;
use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{opposing_triangles_vertex, ArrayGeometry, Point2D};
use crate::linalg;
use crate::scenario::Scenario;

/// Smallest subtended angle accepted by [`geometric_coupling_factor`].
pub const MIN_SUBTENDED_ANGLE: f64 = 1e-9;

/// Reduces a phase into `[0, 2π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// BS beamformer and IRS phase profile.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamformerState {
    /// Unit-norm BS weights.
    pub omega_t: Vec<Complex64>,
    /// IRS phases in `[0, 2π)`; the reflection matrix is `diag(exp(jθ))`.
    pub theta: Vec<f64>,
}

impl BeamformerState {
    /// Normalizes `omega_t` and wraps `theta`.
    pub fn new(omega_t: Vec<Complex64>, theta: Vec<f64>) -> Result<Self> {
        let omega_t = linalg::normalized(&omega_t).ok_or_else(|| Error::invalid("BS beamformer has zero norm"))?;
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("IRS phases must be finite"));
        }
        Ok(BeamformerState {
            omega_t,
            theta: theta.into_iter().map(wrap_phase).collect(),
        })
    }

    /// Equal-amplitude BS weights `exp(jφ_n) / √N` with IRS phases `θ`.
    pub fn from_phases(bs_phases: &[f64], irs_phases: Vec<f64>) -> Result<Self> {
        let omega = bs_phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        BeamformerState::new(omega, irs_phases)
    }

    /// Diagonal of the IRS reflection matrix.
    pub fn reflection(&self) -> Vec<Complex64> {
        self.theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
    }

    /// BS phases `arg ω_n` wrapped into `[0, 2π)`.
    pub fn bs_phases(&self) -> Vec<f64> {
        self.omega_t.iter().map(|w| wrap_phase(w.arg())).collect()
    }
}

/// Writes phases as `index,phase_radians` CSV.
pub fn write_phases_csv<W: Write>(mut out: W, phases: &[f64]) -> Result<()> {
    writeln!(out, "index,phase_radians")?;
    for (i, p) in phases.iter().enumerate() {
        writeln!(out, "{i},{p}")?;
    }
    Ok(())
}

fn distance_checked(a: Point2D, b: Point2D, what: &str) -> Result<f64> {
    let d = a.distance(b);
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::invalid(format!("{what} coincides with an array element at {a}")))
    }
}

/// BS phases converging on `s`: `φ(n) = k ‖p_n - s‖`.
pub fn bs_phases(bs_positions: &[Point2D], s: Point2D, wavenumber: f64) -> Result<Vec<f64>> {
    bs_positions
        .iter()
        .map(|&p| Ok(wrap_phase(wavenumber * distance_checked(p, s, "virtual source")?)))
        .collect()
}

/// IRS phases relaying the wave from `s` to the user:
/// `φ(m) = k (‖s - q_m‖ + ‖q_m - r‖)`.
pub fn irs_phases(irs_positions: &[Point2D], s: Point2D, user: Point2D, wavenumber: f64) -> Result<Vec<f64>> {
    irs_positions
        .iter()
        .map(|&q| {
            let d_in = distance_checked(q, s, "virtual source")?;
            let d_out = distance_checked(q, user, "user")?;
            Ok(wrap_phase(wavenumber * (d_in + d_out)))
        })
        .collect()
}

/// Non-iterative VPS design for a scenario.
pub fn vps_beamformer(scenario: &Scenario) -> Result<BeamformerState> {
    let s = opposing_triangles_vertex(&scenario.bs, &scenario.irs)?;
    let k = scenario.wavenumber();
    let phi_bs = bs_phases(&scenario.bs.element_positions(), s, k)?;
    let phi_irs = irs_phases(&scenario.irs.element_positions(), s, scenario.user, k)?;
    BeamformerState::from_phases(&phi_bs, phi_irs)
}

/// Subtended angles at a candidate source and their overlap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub alpha_t: f64,
    pub alpha_r: f64,
    pub alpha_vr: f64,
    pub eta_g: f64,
}

/// Angular sector spanned by two direction vectors: (bisector angle, width).
fn sector(d1: Point2D, d2: Point2D, which: &str) -> Result<(f64, f64)> {
    let width = d1.cross(d2).abs().atan2(d1.dot(d2));
    if !(width > MIN_SUBTENDED_ANGLE && width < PI - MIN_SUBTENDED_ANGLE) {
        return Err(Error::invalid(format!(
            "{which} array subtends a degenerate angle ({width} rad) at the candidate point"
        )));
    }
    let (u1, u2) = (d1.normalized().unwrap(), d2.normalized().unwrap());
    Ok(((u1 + u2).angle(), width))
}

/// Geometric coupling factor `η = α_vr² / (α_t α_r)` at `s`.
///
/// The transmit sector is the set of directions of rays from `tx` elements
/// continued through `s`; the receive sector is the set of directions from
/// `s` toward `rx` elements. `α_vr` is the measure of their intersection.
pub fn geometric_coupling_factor(s: Point2D, tx: &ArrayGeometry, rx: &ArrayGeometry) -> Result<CouplingReport> {
    let (a1, a2) = tx.endpoints();
    let (b1, b2) = rx.endpoints();
    let (mid_t, alpha_t) = sector(s - a1, s - a2, "transmit")?;
    let (mid_r, alpha_r) = sector(b1 - s, b2 - s, "receive")?;
    // both sectors are narrower than π, so one unwrapped comparison suffices
    let mut offset = (mid_r - mid_t).rem_euclid(TAU);
    if offset > PI {
        offset -= TAU;
    }
    let lo = (-alpha_t / 2.0).max(offset - alpha_r / 2.0);
    let hi = (alpha_t / 2.0).min(offset + alpha_r / 2.0);
    let alpha_vr = (hi - lo).max(0.0).min(alpha_t.min(alpha_r));
    Ok(CouplingReport {
        alpha_t,
        alpha_r,
        alpha_vr,
        eta_g: alpha_vr * alpha_vr / (alpha_t * alpha_r),
    })
}

/// Rectangular lattice of candidate source positions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x: (f64, f64), nx: usize, y: (f64, f64), ny: usize) -> Result<Self> {
        if !(x.0.is_finite() && x.1.is_finite() && y.0.is_finite() && y.1.is_finite()) || x.1 < x.0 || y.1 < y.0 {
            return Err(Error::invalid("grid bounds must be finite and ordered"));
        }
        Ok(GridSpec {
            x_min: x.0,
            x_max: x.1,
            nx,
            y_min: y.0,
            y_max: y.1,
            ny,
        })
    }

    /// `n × n` lattice over the bounding box of both arrays' endpoints.
    pub fn between(tx: &ArrayGeometry, rx: &ArrayGeometry, n: usize) -> Result<Self> {
        let (a1, a2) = tx.endpoints();
        let (b1, b2) = rx.endpoints();
        let xs = [a1.x, a2.x, b1.x, b2.x];
        let ys = [a1.y, a2.y, b1.y, b2.y];
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        GridSpec::new((min(&xs), max(&xs)), n, (min(&ys), max(&ys)), n)
    }

    /// `n × n` lattice of half-widths `(hx, hy)` around `center`.
    pub fn centered(center: Point2D, hx: f64, hy: f64, n: usize) -> Result<Self> {
        GridSpec::new((center.x - hx, center.x + hx), n, (center.y - hy, center.y + hy), n)
    }

    fn coord(min: f64, max: f64, n: usize, i: usize) -> f64 {
        if n <= 1 {
            min
        } else {
            min + (max - min) * i as f64 / (n - 1) as f64
        }
    }

    pub fn point(&self, ix: usize, iy: usize) -> Point2D {
        Point2D::new(
            Self::coord(self.x_min, self.x_max, self.nx, ix),
            Self::coord(self.y_min, self.y_max, self.ny, iy),
        )
    }

    /// Grid pitch along x and y (zero for a single row or column).
    pub fn cell(&self) -> (f64, f64) {
        let step = |lo: f64, hi: f64, n: usize| if n <= 1 { 0.0 } else { (hi - lo) / (n - 1) as f64 };
        (
            step(self.x_min, self.x_max, self.nx),
            step(self.y_min, self.y_max, self.ny),
        )
    }

    pub fn centroid(&self) -> Point2D {
        Point2D::new((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Best grid point found by [`optimize_vps_grid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridOptimum {
    pub point: Point2D,
    pub eta_g: f64,
}

/// Total order: larger η first, then closer to the grid centroid, then
/// lexicographic `(x, y)`.
fn rank(a: &GridOptimum, b: &GridOptimum, centroid: Point2D) -> Ordering {
    b.eta_g
        .total_cmp(&a.eta_g)
        .then_with(|| a.point.distance(centroid).total_cmp(&b.point.distance(centroid)))
        .then_with(|| a.point.x.total_cmp(&b.point.x))
        .then_with(|| a.point.y.total_cmp(&b.point.y))
}

/// Exhaustive search of `η_G` over a lattice. Points where the coupling
/// factor is undefined (on an array line) are skipped.
pub fn optimize_vps_grid(tx: &ArrayGeometry, rx: &ArrayGeometry, grid: &GridSpec) -> Result<GridOptimum> {
    if grid.is_empty() {
        return Err(Error::invalid("search grid has no points"));
    }
    let centroid = grid.centroid();
    (0..grid.len())
        .into_par_iter()
        .filter_map(|i| {
            let point = grid.point(i % grid.nx, i / grid.nx);
            geometric_coupling_factor(point, tx, rx)
                .ok()
                .map(|r| GridOptimum { point, eta_g: r.eta_g })
        })
        .min_by(|a, b| rank(a, b, centroid))
        .ok_or_else(|| Error::invalid("no grid point admits a coupling factor"))
}
