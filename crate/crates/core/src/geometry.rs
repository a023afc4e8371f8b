//! Planar array layouts and the geometric constructions built on them.
//!
//! Everything lives in the 2D plane. A [`ArrayGeometry`] is a uniform linear
//! array described by its center, a unit axis and an element pitch; elements
//! are laid out symmetrically about the center so odd and even element counts
//! share the same centroid.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Two direction vectors whose normalized cross product is below this are
/// treated as parallel.
pub const PARALLEL_TOLERANCE: f64 = 1e-12;

/// Wavelength in meters for a carrier frequency in Hz.
pub fn wavelength(frequency_hz: f64) -> f64 {
    SPEED_OF_LIGHT / frequency_hz
}

/// Wavenumber `2π/λ` in radians per meter.
pub fn wavenumber(wavelength: f64) -> f64 {
    TAU / wavelength
}

/// A point (or displacement) in the plane, in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    /// Unit vector at `angle` radians counter-clockwise from +x.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Point2D::new(c, s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dot(self, other: Point2D) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2D) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn normalized(self) -> Option<Point2D> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    /// Counter-clockwise rotation by `angle` radians about the origin.
    pub fn rotated(self, angle: f64) -> Point2D {
        let (s, c) = angle.sin_cos();
        Point2D::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Polar angle in (-π, π].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point2D {
    type Output = Point2D;
    fn add(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2D {
    type Output = Point2D;
    fn sub(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2D {
    type Output = Point2D;
    fn mul(self, rhs: f64) -> Point2D {
        Point2D::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2D {
    type Output = Point2D;
    fn neg(self) -> Point2D {
        Point2D::new(-self.x, -self.y)
    }
}

impl fmt::Display for Point2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl From<[f64; 2]> for Point2D {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2D::new(x, y)
    }
}

/// A uniform linear array in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    center: Point2D,
    axis: Point2D,
    num_elements: usize,
    spacing: f64,
}

impl ArrayGeometry {
    /// Builds an array. `axis` only needs to be nonzero; it is normalized.
    pub fn new(center: Point2D, axis: Point2D, num_elements: usize, spacing: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::invalid(format!("array center {center} is not finite")));
        }
        let axis = axis
            .normalized()
            .ok_or_else(|| Error::invalid(format!("array axis {axis} cannot be normalized")))?;
        if num_elements == 0 {
            return Err(Error::invalid("array needs at least one element"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::invalid(format!(
                "element spacing must be positive, got {spacing}"
            )));
        }
        Ok(ArrayGeometry {
            center,
            axis,
            num_elements,
            spacing,
        })
    }

    pub fn center(&self) -> Point2D {
        self.center
    }

    /// Unit vector along the array.
    pub fn axis(&self) -> Point2D {
        self.axis
    }

    /// Unit normal, the axis rotated a quarter turn counter-clockwise.
    pub fn normal(&self) -> Point2D {
        self.axis.rotated(PI / 2.0)
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Physical aperture `(N - 1) * d`.
    pub fn aperture(&self) -> f64 {
        (self.num_elements - 1) as f64 * self.spacing
    }

    /// Signed offset of element `index` (0-based) from the center along the axis.
    pub fn element_offset(&self, index: usize) -> f64 {
        (index as f64 - (self.num_elements as f64 - 1.0) / 2.0) * self.spacing
    }

    pub fn element(&self, index: usize) -> Point2D {
        self.center + self.axis * self.element_offset(index)
    }

    /// Element positions ordered along the axis.
    pub fn element_positions(&self) -> Vec<Point2D> {
        (0..self.num_elements).map(|i| self.element(i)).collect()
    }

    /// First and last element.
    pub fn endpoints(&self) -> (Point2D, Point2D) {
        (self.element(0), self.element(self.num_elements - 1))
    }

    /// Same array with the axis rotated by `angle` radians about the center.
    pub fn rotated(&self, angle: f64) -> ArrayGeometry {
        ArrayGeometry {
            axis: self.axis.rotated(angle),
            ..*self
        }
    }

    pub fn translated(&self, by: Point2D) -> ArrayGeometry {
        ArrayGeometry {
            center: self.center + by,
            ..*self
        }
    }

    /// Direction sine of `target` seen from the array center, signed so the
    /// path length to `target` grows along the element index:
    /// `‖p_n - target‖ ≈ r + offset_n · β` in the far field.
    pub fn direction_sine(&self, target: Point2D) -> Result<f64> {
        let u = (target - self.center)
            .normalized()
            .ok_or_else(|| Error::invalid("target coincides with the array center"))?;
        Ok(-u.dot(self.axis))
    }

    /// Same array with the element order reversed.
    pub fn reversed(&self) -> ArrayGeometry {
        ArrayGeometry {
            axis: -self.axis,
            ..*self
        }
    }
}

/// Free-function form of [`ArrayGeometry::element_positions`].
pub fn element_positions(geom: &ArrayGeometry) -> Vec<Point2D> {
    geom.element_positions()
}

/// Rayleigh distance `2 D² / λ`.
pub fn rayleigh_distance(aperture: f64, wavelength: f64) -> Result<f64> {
    if !(wavelength > 0.0) {
        return Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    if !(aperture >= 0.0) {
        return Err(Error::invalid(format!("aperture must be non-negative, got {aperture}")));
    }
    Ok(2.0 * aperture * aperture / wavelength)
}

/// How far a spherical wavefront departs from a plane wave across an aperture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NearFieldSignificance {
    /// Edge-to-center path difference times the wavenumber, radians.
    pub max_phase_deviation: f64,
    /// `1 - A(D/2) / A(0)` under 1/distance amplitude decay.
    pub amplitude_variation_ratio: f64,
}

/// Phase and amplitude departure from the planar model for a source at
/// broadside range `range` in front of an aperture of size `aperture`.
pub fn nearfield_significance(range: f64, aperture: f64, wavelength: f64) -> Result<NearFieldSignificance> {
    if !(range > 0.0) {
        return Err(Error::invalid(format!("range must be positive, got {range}")));
    }
    if !(aperture >= 0.0) {
        return Err(Error::invalid(format!("aperture must be non-negative, got {aperture}")));
    }
    if !(wavelength > 0.0) {
        return Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    let half = aperture / 2.0;
    let edge = range.hypot(half);
    // sqrt(r² + h²) - r rewritten to avoid cancellation when h << r
    let excess = half * half / (edge + range);
    Ok(NearFieldSignificance {
        max_phase_deviation: wavenumber(wavelength) * excess,
        amplitude_variation_ratio: excess / edge,
    })
}

/// Intersection of the lines `p0 + t (p1 - p0)` and `q0 + u (q1 - q0)`.
/// Returns `(point, t, u)`, or `None` when the lines are parallel.
fn line_intersection(p0: Point2D, p1: Point2D, q0: Point2D, q1: Point2D) -> Option<(Point2D, f64, f64)> {
    let dp = p1 - p0;
    let dq = q1 - q0;
    let (up, uq) = (dp.normalized()?, dq.normalized()?);
    if up.cross(uq).abs() < PARALLEL_TOLERANCE {
        return None;
    }
    let denom = dp.cross(dq);
    let w = q0 - p0;
    let t = w.cross(dq) / denom;
    let u = w.cross(dp) / denom;
    Some((p0 + dp * t, t, u))
}

/// Vertex of the opposing triangles formed by two arrays.
///
/// With transmit endpoints `(a1, a2)` and receive endpoints `(b1, b2)`, the
/// crossed lines `a1-b2` and `a2-b1` are intersected. Of the two possible
/// endpoint pairings, the one whose intersection lies strictly inside both
/// connecting segments is used.
pub fn opposing_triangles_vertex(tx: &ArrayGeometry, rx: &ArrayGeometry) -> Result<Point2D> {
    if tx.num_elements() < 2 || rx.num_elements() < 2 {
        return Err(Error::GeometricDegeneracy(
            "opposing triangles need at least two elements per array".into(),
        ));
    }
    let (a1, a2) = tx.endpoints();
    let (b1, b2) = rx.endpoints();
    let mut parallel = 0;
    for (far1, far2) in [(b2, b1), (b1, b2)] {
        match line_intersection(a1, far1, a2, far2) {
            None => parallel += 1,
            Some((p, t, u)) if t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0 => return Ok(p),
            Some(_) => {}
        }
    }
    let reason = if parallel == 2 {
        "endpoint lines are parallel for both pairings (arrays collinear?)"
    } else {
        "no endpoint pairing intersects strictly between the arrays"
    };
    Err(Error::GeometricDegeneracy(reason.into()))
}
