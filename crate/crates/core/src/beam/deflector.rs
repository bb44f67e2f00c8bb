//! Scan deflectors. Angles are in the scanner frame, where the undeflected
//! beam points along -Z (nadir) and across-track deflection rotates it about
//! +X.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, VlsError};
use crate::raycast::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeflectorKind {
    RotatingPolygon,
    FibreOptic,
    Oscillating,
    Palmer,
}

impl FromStr for DeflectorKind {
    type Err = VlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rotating" | "rotatingpolygon" | "polygon" => Ok(DeflectorKind::RotatingPolygon),
            "fiber" | "fibre" | "fibreoptic" | "fiberoptic" => Ok(DeflectorKind::FibreOptic),
            "oscillating" | "swinging" => Ok(DeflectorKind::Oscillating),
            "palmer" | "conic" | "risley" => Ok(DeflectorKind::Palmer),
            other => Err(VlsError::Config(format!("unknown deflector `{other}`"))),
        }
    }
}

impl fmt::Display for DeflectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeflectorKind::RotatingPolygon => "rotating",
            DeflectorKind::FibreOptic => "fibre",
            DeflectorKind::Oscillating => "oscillating",
            DeflectorKind::Palmer => "palmer",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectorSpec {
    pub kind: DeflectorKind,
    pub scan_freq: f64,
    /// Half of the scan field, rad.
    pub scan_angle_max: f64,
    /// Cone half-angle of the Palmer scanner, rad.
    pub palmer_off_nadir: f64,
}

impl DeflectorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.scan_freq > 0.0) {
            return Err(VlsError::Config(format!(
                "scan frequency must be > 0, got {}",
                self.scan_freq
            )));
        }
        let quarter = std::f64::consts::FRAC_PI_2;
        if self.kind == DeflectorKind::Palmer {
            if !(self.palmer_off_nadir > 0.0 && self.palmer_off_nadir < quarter) {
                return Err(VlsError::Config(
                    "Palmer off-nadir angle must lie in (0, 90°)".into(),
                ));
            }
        } else if !(self.scan_angle_max > 0.0 && self.scan_angle_max < quarter) {
            return Err(VlsError::Config("scan angle must lie in (0, 90°)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectorAngle {
    /// Across-track angle, or off-nadir angle for the Palmer scanner.
    pub across_track: f64,
    /// Azimuth on the Palmer cone; zero for line scanners.
    pub azimuth: f64,
}

fn frac(x: f64) -> f64 {
    x - x.floor()
}

pub fn deflector_angle(spec: &DeflectorSpec, t: f64) -> DeflectorAngle {
    let a = spec.scan_angle_max;
    let phase = t * spec.scan_freq;
    match spec.kind {
        DeflectorKind::RotatingPolygon | DeflectorKind::FibreOptic => DeflectorAngle {
            across_track: -a + 2.0 * a * frac(phase),
            azimuth: 0.0,
        },
        DeflectorKind::Oscillating => DeflectorAngle {
            across_track: a * (TAU * phase).sin(),
            azimuth: 0.0,
        },
        DeflectorKind::Palmer => DeflectorAngle {
            across_track: spec.palmer_off_nadir,
            azimuth: TAU * frac(phase),
        },
    }
}

/// Unit beam direction in the scanner frame.
pub fn scanner_frame_direction(kind: DeflectorKind, angle: &DeflectorAngle) -> Vec3 {
    let (s, c) = angle.across_track.sin_cos();
    match kind {
        DeflectorKind::Palmer => {
            let (sa, ca) = angle.azimuth.sin_cos();
            Vec3::new(s * ca, s * sa, -c)
        }
        _ => Vec3::new(0.0, s, -c),
    }
}
