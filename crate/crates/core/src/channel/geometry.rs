use std::f64::consts::PI;
use std::ops::Sub;

use super::Scenario;
use crate::error::{Error, Result};
use crate::{CVector, Complex64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Self) -> f64 {
        (other - self).norm()
    }
}

impl Sub for Point3 {
    type Output = Point3;

    fn sub(self, rhs: Self) -> Self {
        Point3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

/// Azimuth/elevation of a direction in an array's local frame.
///
/// Azimuth is measured from boresight towards the horizontal in-plane axis and
/// lies in `(-pi, pi]`; elevation is measured from the horizontal plane and
/// lies in `[-pi/2, pi/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePair {
    pub azimuth: f64,
    pub elevation: f64,
}

impl AnglePair {
    pub const BORESIGHT: AnglePair = AnglePair {
        azimuth: 0.0,
        elevation: 0.0,
    };

    pub fn new(azimuth: f64, elevation: f64) -> Self {
        Self { azimuth, elevation }
    }

    /// Direction cosines `(u, w)` along the horizontal and vertical array axes.
    pub fn direction_cosines(self) -> (f64, f64) {
        let (se, ce) = self.elevation.sin_cos();
        (ce * self.azimuth.sin(), se)
    }
}

/// Orthonormal local frame of a vertical planar array.
///
/// The boresight is horizontal; the horizontal in-plane axis is
/// `z_hat x boresight` and the vertical axis is `+Z`. Array rows advance along
/// the horizontal axis and columns along the vertical axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayFrame {
    pub boresight: Point3,
    pub horizontal: Point3,
    pub vertical: Point3,
}

impl ArrayFrame {
    /// Frame whose boresight points along `heading` radians from +X towards +Y.
    pub fn facing(heading: f64) -> Self {
        let (s, c) = heading.sin_cos();
        Self {
            boresight: Point3::new(c, s, 0.0),
            horizontal: Point3::new(-s, c, 0.0),
            vertical: Point3::new(0.0, 0.0, 1.0),
        }
    }

    /// IRS on the YZ plane, boresight +X.
    pub fn irs() -> Self {
        Self::facing(0.0)
    }

    /// BS panel parallel to the XZ plane, boresight +Y.
    pub fn bs() -> Self {
        Self::facing(PI / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DevicePositions {
    pub bs: Point3,
    pub irs: Point3,
    pub vehicle: Point3,
}

/// Cartesian positions of the BS, IRS and vehicle antenna.
pub fn device_positions(scenario: &Scenario) -> DevicePositions {
    DevicePositions {
        bs: Point3::new(scenario.b_bs, -scenario.c_bs, scenario.a_bs),
        irs: Point3::new(0.0, 0.0, scenario.a_irs),
        vehicle: Point3::new(scenario.b_v, scenario.c_v, scenario.a_v),
    }
}

/// Direction of `to` as seen from an array at `from` with orientation `frame`.
pub fn angles_between(from: Point3, to: Point3, frame: &ArrayFrame) -> Result<AnglePair> {
    let d = to - from;
    if d.norm() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let along = d.dot(frame.boresight);
    let across = d.dot(frame.horizontal);
    let up = d.dot(frame.vertical);
    let mut azimuth = across.atan2(along);
    if azimuth == -PI {
        azimuth = PI;
    }
    let elevation = up.atan2(along.hypot(across));
    Ok(AnglePair { azimuth, elevation })
}

/// Array response of a `rows x cols` planar array.
///
/// Element `(p, q)` is stored at index `p * cols + q` and carries the phase
/// `2 pi / lambda * spacing * (p u + q w)`, referenced to element `(0, 0)`.
pub fn steering_vector(
    rows: usize,
    cols: usize,
    spacing: f64,
    wavelength: f64,
    angles: AnglePair,
) -> CVector {
    let (u, w) = angles.direction_cosines();
    let k = 2.0 * PI / wavelength * spacing;
    CVector::from_iterator(
        rows * cols,
        (0..rows).flat_map(|p| {
            (0..cols).map(move |q| Complex64::from_polar(1.0, k * (p as f64 * u + q as f64 * w)))
        }),
    )
}
