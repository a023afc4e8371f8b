//! Link scenarios: a BS array, an IRS array, a single-antenna user and a carrier.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{AmplitudeModel, ChannelSet};
use crate::error::{Error, Result};
use crate::geometry::{self, ArrayGeometry, Point2D};

/// Parametric description of a scenario, in configuration units.
///
/// Array pitches are given in wavelengths so a change of carrier keeps the
/// electrical layout. The BS axis angle is measured clockwise from +y; the IRS
/// normal angle counter-clockwise from +x, with the IRS axis a quarter turn
/// counter-clockwise from that normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSpec {
    pub frequency_ghz: f64,
    pub bs_center: [f64; 2],
    pub bs_axis_angle_deg: f64,
    pub bs_elements: usize,
    pub bs_spacing_wavelengths: f64,
    pub irs_center: [f64; 2],
    pub irs_normal_angle_deg: f64,
    pub irs_elements: usize,
    pub irs_spacing_wavelengths: f64,
    pub user: [f64; 2],
    pub amplitude_model: AmplitudeModel,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::baseline()
    }
}

impl ScenarioSpec {
    /// The reference deployment: 400-element BS at the origin, 2000-element
    /// IRS at (50, 0) m, user at (37.5, -12.5) m, 30 GHz.
    pub fn baseline() -> Self {
        ScenarioSpec {
            frequency_ghz: 30.0,
            bs_center: [0.0, 0.0],
            bs_axis_angle_deg: 30.0,
            bs_elements: 400,
            bs_spacing_wavelengths: 0.5,
            irs_center: [50.0, 0.0],
            irs_normal_angle_deg: 60.0,
            irs_elements: 2000,
            irs_spacing_wavelengths: 0.25,
            user: [37.5, -12.5],
            amplitude_model: AmplitudeModel::Unit,
        }
    }

    /// Baseline layout with 100 BS and 500 IRS elements.
    pub fn reduced() -> Self {
        ScenarioSpec::baseline().with_counts(100, 500)
    }

    pub fn with_counts(mut self, bs_elements: usize, irs_elements: usize) -> Self {
        self.bs_elements = bs_elements;
        self.irs_elements = irs_elements;
        self
    }

    pub fn wavelength(&self) -> f64 {
        geometry::wavelength(self.frequency_ghz * 1e9)
    }

    pub fn bs_spacing(&self) -> f64 {
        self.bs_spacing_wavelengths * self.wavelength()
    }

    pub fn irs_spacing(&self) -> f64 {
        self.irs_spacing_wavelengths * self.wavelength()
    }

    /// Physical BS aperture `(N - 1) d`.
    pub fn bs_aperture(&self) -> f64 {
        self.bs_elements.saturating_sub(1) as f64 * self.bs_spacing()
    }

    pub fn irs_aperture(&self) -> f64 {
        self.irs_elements.saturating_sub(1) as f64 * self.irs_spacing()
    }

    pub fn build(&self) -> Result<Scenario> {
        if !(self.frequency_ghz > 0.0 && self.frequency_ghz.is_finite()) {
            return Err(Error::InvalidScenario(format!(
                "carrier frequency must be positive, got {} GHz",
                self.frequency_ghz
            )));
        }
        let bs_angle = self.bs_axis_angle_deg.to_radians();
        let bs_axis = Point2D::new(bs_angle.sin(), bs_angle.cos());
        let irs_normal = self.irs_normal_angle_deg.to_radians();
        let irs_axis = Point2D::new(-irs_normal.sin(), irs_normal.cos());
        let bs = ArrayGeometry::new(self.bs_center.into(), bs_axis, self.bs_elements, self.bs_spacing())?;
        let irs = ArrayGeometry::new(self.irs_center.into(), irs_axis, self.irs_elements, self.irs_spacing())?;
        let user = Point2D::from(self.user);
        if !user.is_finite() {
            return Err(Error::InvalidScenario("user position is not finite".into()));
        }
        Ok(Scenario {
            bs,
            irs,
            user,
            frequency_hz: self.frequency_ghz * 1e9,
            amplitude_model: self.amplitude_model,
        })
    }

    /// SHA-256 over the canonical JSON form, as lowercase hex.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("scenario spec serializes");
        hex(&Sha256::digest(json))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// A realized scenario: concrete array layouts plus carrier.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub bs: ArrayGeometry,
    pub irs: ArrayGeometry,
    pub user: Point2D,
    pub frequency_hz: f64,
    pub amplitude_model: AmplitudeModel,
}

impl Scenario {
    pub fn baseline() -> Scenario {
        ScenarioSpec::baseline().build().expect("baseline scenario is valid")
    }

    pub fn wavelength(&self) -> f64 {
        geometry::wavelength(self.frequency_hz)
    }

    pub fn wavenumber(&self) -> f64 {
        geometry::wavenumber(self.wavelength())
    }

    pub fn channels(&self) -> Result<ChannelSet> {
        ChannelSet::build(&self.bs, &self.irs, self.user, self.wavenumber(), self.amplitude_model)
    }

    /// Whole scenario shifted rigidly.
    pub fn translated(&self, by: Point2D) -> Scenario {
        Scenario {
            bs: self.bs.translated(by),
            irs: self.irs.translated(by),
            user: self.user + by,
            ..self.clone()
        }
    }
}
