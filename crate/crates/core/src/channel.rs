//! Line-of-sight spherical-wave channels and steering vectors.
//!
//! Propagation over a distance `d` carries the phase `exp(-j k d)`. The
//! IRS-to-user vector `h_r` is stored conjugated (`exp(+j k d)`), so the
//! received signal `h_r^H Θ H_t ω_t` sees the physical delay on both legs.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, Point2D};
use crate::linalg::CMatrix;

/// Path amplitude law.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeModel {
    /// Every path has unit modulus.
    #[default]
    Unit,
    /// Modulus `1 / d`.
    InverseDistance,
}

impl AmplitudeModel {
    fn amplitude(self, distance: f64) -> f64 {
        match self {
            AmplitudeModel::Unit => 1.0,
            AmplitudeModel::InverseDistance => 1.0 / distance,
        }
    }
}

/// BS-to-IRS matrix (`M × N`) and IRS-to-user vector (`M`).
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    pub h_t: CMatrix,
    pub h_r: Vec<Complex64>,
    pub wavenumber: f64,
    pub amplitude_model: AmplitudeModel,
}

impl ChannelSet {
    pub fn new(h_t: CMatrix, h_r: Vec<Complex64>, wavenumber: f64, amplitude_model: AmplitudeModel) -> Result<Self> {
        if h_t.rows() != h_r.len() {
            return Err(Error::invalid(format!(
                "BS-IRS matrix has {} rows but IRS-user vector has {} entries",
                h_t.rows(),
                h_r.len()
            )));
        }
        Ok(ChannelSet {
            h_t,
            h_r,
            wavenumber,
            amplitude_model,
        })
    }

    /// Synthesizes both links from array layouts and the user position.
    pub fn build(
        bs: &ArrayGeometry,
        irs: &ArrayGeometry,
        user: Point2D,
        wavenumber: f64,
        amplitude_model: AmplitudeModel,
    ) -> Result<Self> {
        let h_t = los_channel_matrix(bs, irs, wavenumber, amplitude_model)?;
        let h_r = los_channel_vector(irs, user, wavenumber, amplitude_model)?;
        ChannelSet::new(h_t, h_r, wavenumber, amplitude_model)
    }

    pub fn num_bs(&self) -> usize {
        self.h_t.cols()
    }

    pub fn num_irs(&self) -> usize {
        self.h_t.rows()
    }
}

fn min_separation(wavenumber: f64) -> f64 {
    // λ / 100
    std::f64::consts::TAU / wavenumber / 100.0
}

fn check_wavenumber(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("wavenumber must be positive, got {k}")))
    }
}

/// LoS channel from `tx` to `rx`: entry `(m, n)` is `A(d) exp(-j k d)` with
/// `d` the distance from tx element `n` to rx element `m`.
pub fn los_channel_matrix(
    tx: &ArrayGeometry,
    rx: &ArrayGeometry,
    wavenumber: f64,
    amplitude_model: AmplitudeModel,
) -> Result<CMatrix> {
    check_wavenumber(wavenumber)?;
    let tx_pos = tx.element_positions();
    let rx_pos = rx.element_positions();
    let cols = tx_pos.len();
    let mut data = vec![Complex64::new(0.0, 0.0); rx_pos.len() * cols];
    let min_dist = data
        .par_chunks_mut(cols)
        .zip(rx_pos.par_iter())
        .map(|(row, q)| {
            let mut row_min = f64::INFINITY;
            for (entry, p) in row.iter_mut().zip(&tx_pos) {
                let d = p.distance(*q);
                row_min = row_min.min(d);
                *entry = Complex64::from_polar(amplitude_model.amplitude(d), -wavenumber * d);
            }
            row_min
        })
        .reduce(|| f64::INFINITY, f64::min);
    if min_dist <= min_separation(wavenumber) {
        return Err(Error::InvalidScenario(format!(
            "arrays overlap: closest element pair is {min_dist} m apart"
        )));
    }
    CMatrix::from_row_major(rx_pos.len(), cols, data)
}

/// IRS-to-user vector in the conjugated convention: entry `m` is
/// `A(d_m) exp(+j k d_m)`.
pub fn los_channel_vector(
    irs: &ArrayGeometry,
    user: Point2D,
    wavenumber: f64,
    amplitude_model: AmplitudeModel,
) -> Result<Vec<Complex64>> {
    check_wavenumber(wavenumber)?;
    irs.element_positions()
        .into_iter()
        .enumerate()
        .map(|(m, q)| {
            let d = q.distance(user);
            if d <= min_separation(wavenumber) {
                return Err(Error::InvalidScenario(format!("user coincides with IRS element {m}")));
            }
            Ok(Complex64::from_polar(amplitude_model.amplitude(d), wavenumber * d))
        })
        .collect()
}

/// Near-field steering vector toward a point source, referenced to the
/// array center: entry `n` is `exp(-j k (‖p_n - s‖ - r))`.
pub fn steering_near(array: &ArrayGeometry, source: Point2D, wavenumber: f64) -> Result<Vec<Complex64>> {
    check_wavenumber(wavenumber)?;
    let r = array.center().distance(source);
    if !(r > 0.0) {
        return Err(Error::invalid("source coincides with the array reference point"));
    }
    array
        .element_positions()
        .into_iter()
        .enumerate()
        .map(|(n, p)| {
            let d = p.distance(source);
            if d == 0.0 {
                return Err(Error::invalid(format!("source coincides with element {n}")));
            }
            Ok(Complex64::from_polar(1.0, -wavenumber * (d - r)))
        })
        .collect()
}

/// Far-field steering vector: entry `n` (from 0) is `exp(-j k n d β)`.
pub fn steering_far(num_elements: usize, spacing: f64, wavenumber: f64, beta: f64) -> Result<Vec<Complex64>> {
    if !(beta.abs() <= 1.0) {
        return Err(Error::invalid(format!(
            "direction sine must lie in [-1, 1], got {beta}"
        )));
    }
    Ok((0..num_elements)
        .map(|n| Complex64::from_polar(1.0, -wavenumber * n as f64 * spacing * beta))
        .collect())
}

/// Writes a matrix as `m,n,re,im` CSV rows.
pub fn write_channel_csv<W: Write>(mut out: W, matrix: &CMatrix) -> Result<()> {
    writeln!(out, "m,n,re,im")?;
    for m in 0..matrix.rows() {
        for (n, z) in matrix.row(m).iter().enumerate() {
            writeln!(out, "{m},{n},{},{}", z.re, z.im)?;
        }
    }
    Ok(())
}
