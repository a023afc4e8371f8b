//! Angular spectra of finite array sequences.
//!
//! A sequence `g[n]` on a uniform array of pitch `d` has the angular spectrum
//! `G(β) = Σ_n g[n] e^{-jkβ n d}` over the direction sine `β`. It is periodic
//! with period `λ/d`; when that period is shorter than the visible width 2,
//! replicas of the main lobe (grating lobes) enter `[-1, 1]`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry;

pub const DEFAULT_GRID_POINTS: usize = 2001;
pub const DEFAULT_GRID_HALF_WIDTH: f64 = 2.0;

/// Bisection tolerance of [`halfpower_width`], in β.
pub const HALFPOWER_TOLERANCE: f64 = 1e-10;

/// Spectrum samples on a β grid.
#[derive(Clone, Debug, PartialEq)]
pub struct AngularSpectrum {
    beta_grid: Vec<f64>,
    values: Vec<Complex64>,
    wavelength: f64,
    spacing: f64,
}

impl AngularSpectrum {
    pub fn new(beta_grid: Vec<f64>, values: Vec<Complex64>, wavelength: f64, spacing: f64) -> Result<Self> {
        check_grid(&beta_grid)?;
        check_lengths(wavelength, spacing)?;
        if values.len() != beta_grid.len() {
            return Err(Error::invalid(format!(
                "{} values for {} grid points",
                values.len(),
                beta_grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("spectrum values must be finite"));
        }
        Ok(AngularSpectrum {
            beta_grid,
            values,
            wavelength,
            spacing,
        })
    }

    pub fn beta_grid(&self) -> &[f64] {
        &self.beta_grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Grid index of the largest magnitude; ties go to the lowest β.
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if v.norm_sqr() > self.values[best].norm_sqr() {
                best = i;
            }
        }
        best
    }

    pub fn peak_beta(&self) -> f64 {
        self.beta_grid[self.peak_index()]
    }

    /// Linear interpolation; `None` outside the grid.
    pub fn interpolate(&self, beta: f64) -> Option<Complex64> {
        let g = &self.beta_grid;
        if !(beta >= g[0] && beta <= g[g.len() - 1]) {
            return None;
        }
        let hi = g.partition_point(|&b| b < beta);
        if hi == 0 || g[hi] == beta {
            return Some(self.values[hi]);
        }
        let lo = hi - 1;
        let t = (beta - g[lo]) / (g[hi] - g[lo]);
        Some(self.values[lo] * (1.0 - t) + self.values[hi] * t)
    }

    /// β positions of strict local maxima of `|G|` at or above `rel_threshold`
    /// times the global peak.
    pub fn local_maxima(&self, rel_threshold: f64) -> Vec<f64> {
        let mag = self.magnitudes();
        let top = mag.iter().cloned().fold(0.0, f64::max);
        let n = mag.len();
        (0..n)
            .filter(|&i| {
                let left = if i == 0 { f64::NEG_INFINITY } else { mag[i - 1] };
                let right = if i + 1 == n { f64::NEG_INFINITY } else { mag[i + 1] };
                mag[i] >= rel_threshold * top && mag[i] > left && mag[i] >= right
            })
            .map(|i| self.beta_grid[i])
            .collect()
    }

    /// `beta,re,im,abs` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "beta,re,im,abs")?;
        for (b, v) in self.beta_grid.iter().zip(&self.values) {
            writeln!(out, "{b},{},{},{}", v.re, v.im, v.norm())?;
        }
        Ok(())
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::invalid("beta grid needs at least two points"));
    }
    if grid.iter().any(|b| !b.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("beta grid must be finite and strictly increasing"));
    }
    if grid[0] > -1.0 || grid[grid.len() - 1] < 1.0 {
        return Err(Error::invalid(format!(
            "beta grid [{}, {}] does not cover the visible region [-1, 1]",
            grid[0],
            grid[grid.len() - 1]
        )));
    }
    Ok(())
}

fn check_lengths(wavelength: f64, spacing: f64) -> Result<()> {
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid(format!("spacing must be positive, got {spacing}")));
    }
    Ok(())
}

/// `points` equally spaced samples over `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points)
                .map(|i| if i + 1 == points { hi } else { lo + i as f64 * step })
                .collect()
        }
    }
}

/// 2001 points over `[-2, 2]`: the visible region plus one alias period at
/// half-wavelength pitch.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(-DEFAULT_GRID_HALF_WIDTH, DEFAULT_GRID_HALF_WIDTH, DEFAULT_GRID_POINTS)
}

fn dtft(
    sequence: &[Complex64],
    spacing: f64,
    wavelength: f64,
    beta_grid: Vec<f64>,
    scale: f64,
) -> Result<AngularSpectrum> {
    if sequence.is_empty() {
        return Err(Error::invalid("sequence is empty"));
    }
    check_lengths(wavelength, spacing)?;
    check_grid(&beta_grid)?;
    let k = geometry::wavenumber(wavelength);
    let center = (sequence.len() as f64 - 1.0) / 2.0;
    let values = beta_grid
        .par_iter()
        .map(|&b| {
            let sum = sequence
                .iter()
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (n, g)| {
                    acc + g * Complex64::from_polar(1.0, -k * b * (n as f64 - center) * spacing)
                });
            sum * scale
        })
        .collect();
    AngularSpectrum::new(beta_grid, values, wavelength, spacing)
}

/// Normalized spectrum `(1/√N) Σ_n g[n] e^{-jkβ(n - (N-1)/2)d}`.
pub fn angular_spectrum(
    sequence: &[Complex64],
    spacing: f64,
    wavelength: f64,
    beta_grid: Vec<f64>,
) -> Result<AngularSpectrum> {
    let scale = 1.0 / (sequence.len().max(1) as f64).sqrt();
    dtft(sequence, spacing, wavelength, beta_grid, scale)
}

/// Same sum without the `1/√N` factor.
pub fn interference_spectrum(
    sequence: &[Complex64],
    spacing: f64,
    wavelength: f64,
    beta_grid: Vec<f64>,
) -> Result<AngularSpectrum> {
    dtft(sequence, spacing, wavelength, beta_grid, 1.0)
}

/// Periodic summation `(1/d) Σ_l base(β - lλ/d)` on the base grid points in
/// `[-1, 1]`, over every shift `l` whose replica of the visible region
/// overlaps it (`|l| λ/d < 2`). The base is interpolated linearly and must
/// span `[-1 - Lλ/d, 1 + Lλ/d]` for the largest such `|l| = L`.
pub fn aliased_spectrum(base: &AngularSpectrum, spacing: f64) -> Result<AngularSpectrum> {
    check_lengths(base.wavelength, spacing)?;
    let period = base.wavelength / spacing;
    let mut max_shift = 0i64;
    while (max_shift + 1) as f64 * period < 2.0 {
        max_shift += 1;
    }
    let reach = max_shift as f64 * period;
    let (have_lo, have_hi) = (base.beta_grid[0], base.beta_grid[base.len() - 1]);
    let (need_lo, need_hi) = (-1.0 - reach, 1.0 + reach);
    if have_lo > need_lo || have_hi < need_hi {
        return Err(Error::Coverage {
            need_lo,
            need_hi,
            have_lo,
            have_hi,
        });
    }
    let (grid, values): (Vec<f64>, Vec<Complex64>) = base
        .beta_grid
        .iter()
        .filter(|b| (-1.0..=1.0).contains(*b))
        .map(|&b| {
            let sum = (-max_shift..=max_shift)
                .map(|l| base.interpolate(b - l as f64 * period).expect("coverage checked"))
                .sum::<Complex64>();
            (b, sum / spacing)
        })
        .unzip();
    if grid.len() < 2 {
        return Err(Error::invalid("base grid has fewer than two points in [-1, 1]"));
    }
    // the output only spans the visible region, so skip the coverage rule
    Ok(AngularSpectrum {
        beta_grid: grid,
        values,
        wavelength: base.wavelength,
        spacing,
    })
}

/// `sin(πz)/(πz)`, with the removable singularity filled in.
pub fn sinc(z: f64) -> f64 {
    let x = PI * z;
    if x.abs() < 1e-4 {
        // Taylor to x^4; the remainder is below 1e-18 here
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Far-field pattern of a uniformly illuminated aperture, `D sinc(Dβ/λ)`.
pub fn diffraction_sinc(aperture: f64, wavelength: f64, beta: f64) -> f64 {
    aperture * sinc(aperture * beta / wavelength)
}

/// Full width of the `|D sinc(Dβ/λ)|²` main lobe at half its peak.
pub fn halfpower_width(aperture: f64, wavelength: f64) -> Result<f64> {
    check_lengths(wavelength, aperture)?;
    let f = |b: f64| sinc(aperture * b / wavelength).powi(2) - 0.5;
    let (mut lo, mut hi) = (0.0, wavelength / aperture);
    while hi - lo > HALFPOWER_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + hi)
}

/// Width of the narrowest peak-centred index window holding `fraction` of
/// the grid energy. Each sample counts for one mean grid step, so a lone
/// spike has width one step.
pub fn occupied_width(spec: &AngularSpectrum, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "energy fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let energy: Vec<f64> = spec.values.iter().map(|v| v.norm_sqr()).collect();
    let total: f64 = energy.iter().sum();
    if total == 0.0 {
        return Err(Error::invalid("spectrum is identically zero"));
    }
    let g = &spec.beta_grid;
    let step = (g[g.len() - 1] - g[0]) / (g.len() - 1) as f64;
    let peak = spec.peak_index();
    let n = energy.len();
    let mut acc = energy[peak];
    let mut h = 0;
    while acc < fraction * total {
        h += 1;
        if peak >= h {
            acc += energy[peak - h];
        }
        if peak + h < n {
            acc += energy[peak + h];
        }
    }
    let lo = peak.saturating_sub(h);
    let hi = (peak + h).min(n - 1);
    Ok(g[hi] - g[lo] + step)
}

/// Matched combiner for an incident array response: `conj(ξ)/‖ξ‖`. Its
/// angular spectrum peaks at the direction the wave arrives from.
pub fn mrc_combiner(incident: &[Complex64]) -> Result<Vec<Complex64>> {
    let norm = crate::linalg::norm(incident);
    if !(norm > 0.0) {
        return Err(Error::invalid("incident response is zero"));
    }
    Ok(incident.iter().map(|x| x.conj() / norm).collect())
}
