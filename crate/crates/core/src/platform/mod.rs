//! Platform motion. Yaw 0 points along +x (east) and grows counterclockwise;
//! the body frame has x forward, y left and z up.

pub mod trajectory;

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Rotation3};
use rand::Rng;
use rand_distr::{Distribution, Normal};

pub use trajectory::{
    advance_linear_path, braking_speed, simulate_trajectory, smooth_turn_radius, LegSpan, Trajectory,
    DEFAULT_TICK_S, GRAVITY,
};

use crate::error::{Result, VlsError};
use crate::raycast::Vec3;

/// Wraps an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let x = a.rem_euclid(TAU);
    if x > PI {
        x - TAU
    } else {
        x
    }
}

/// Heading of the horizontal direction from `a` to `b`.
pub fn heading(a: &Vec3, b: &Vec3) -> f64 {
    (b.y - a.y).atan2(b.x - a.x)
}

/// Rotation `Rz(yaw) · Ry(pitch) · Rx(roll)`.
pub fn attitude_matrix(roll: f64, pitch: f64, yaw: f64) -> Matrix3<f64> {
    Rotation3::from_euler_angles(roll, pitch, yaw).into_inner()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlatformState {
    pub position: Vec3,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    /// Ground speed magnitude, never negative.
    pub speed: f64,
    pub time: f64,
    /// Moving backwards, as in the middle arc of a three-point turn.
    pub reversing: bool,
}

impl PlatformState {
    pub fn at(position: Vec3, yaw: f64) -> PlatformState {
        PlatformState {
            position,
            yaw: wrap_angle(yaw),
            ..PlatformState::default()
        }
    }

    pub fn attitude(&self) -> Matrix3<f64> {
        attitude_matrix(self.roll, self.pitch, self.yaw)
    }

    /// Speed with the sign of the direction of travel.
    pub fn signed_speed(&self) -> f64 {
        if self.reversing {
            -self.speed
        } else {
            self.speed
        }
    }

    /// Linear interpolation; angles take the short way round.
    pub fn lerp(&self, other: &PlatformState, f: f64) -> PlatformState {
        let ang = |a: f64, b: f64| wrap_angle(a + wrap_angle(b - a) * f);
        PlatformState {
            position: self.position + (other.position - self.position) * f,
            roll: ang(self.roll, other.roll),
            pitch: ang(self.pitch, other.pitch),
            yaw: ang(self.yaw, other.yaw),
            speed: self.speed + (other.speed - self.speed) * f,
            time: self.time + (other.time - self.time) * f,
            reversing: if f < 0.5 { self.reversing } else { other.reversing },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlatformKind {
    LinearPath,
    Multicopter,
    GroundVehicle,
    Static,
}

impl PlatformKind {
    pub fn is_moving(self) -> bool {
        self != PlatformKind::Static
    }
}

impl FromStr for PlatformKind {
    type Err = VlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linearpath" | "linear" => Ok(PlatformKind::LinearPath),
            "multicopter" | "copter" | "uav" => Ok(PlatformKind::Multicopter),
            "groundvehicle" | "ground" | "car" => Ok(PlatformKind::GroundVehicle),
            "static" | "tripod" => Ok(PlatformKind::Static),
            other => Err(VlsError::Config(format!("unknown platform type `{other}`"))),
        }
    }
}

impl fmt::Display for PlatformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlatformKind::LinearPath => "linearPath",
            PlatformKind::Multicopter => "multicopter",
            PlatformKind::GroundVehicle => "groundVehicle",
            PlatformKind::Static => "static",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TurnMode {
    #[default]
    Smooth,
    TurnOnSpot,
}

impl FromStr for TurnMode {
    type Err = VlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "smooth" => Ok(TurnMode::Smooth),
            "turnonspot" | "onspot" => Ok(TurnMode::TurnOnSpot),
            other => Err(VlsError::Config(format!("unknown turn mode `{other}`"))),
        }
    }
}

/// Scanner placement on the platform body.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mount {
    pub offset: Vec3,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl Mount {
    pub fn rotation(&self) -> Matrix3<f64> {
        attitude_matrix(self.roll, self.pitch, self.yaw)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlatformSpec {
    pub id: String,
    pub kind: PlatformKind,
    /// m/s²; used by multicopters and ground vehicles.
    pub max_accel: f64,
    /// Minimum turning circle radius of a ground vehicle, m.
    pub max_turn_radius: f64,
    pub turn_mode: TurnMode,
    /// Bank angle of smooth multicopter turns, rad.
    pub bank_limit: f64,
    /// Yaw rate when turning on the spot, rad/s.
    pub yaw_rate: f64,
    /// Height of the scanner above the ground for ground vehicles, m.
    pub mount_height: f64,
    pub position_noise_std: f64,
    pub mount: Mount,
}

impl PlatformSpec {
    pub fn new(id: impl Into<String>, kind: PlatformKind) -> PlatformSpec {
        PlatformSpec {
            id: id.into(),
            kind,
            max_accel: 2.0,
            max_turn_radius: 5.0,
            turn_mode: TurnMode::Smooth,
            bank_limit: 30f64.to_radians(),
            yaw_rate: 45f64.to_radians(),
            mount_height: 0.0,
            position_noise_std: 0.0,
            mount: Mount::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(VlsError::Config(format!("platform `{}`: {m}", self.id)));
        match self.kind {
            PlatformKind::Multicopter if !(self.max_accel > 0.0) => return err("maxAccel must be > 0"),
            PlatformKind::Multicopter if !(self.bank_limit > 0.0 && self.bank_limit < PI / 2.0) => {
                return err("bank limit must lie in (0, 90°)")
            }
            PlatformKind::GroundVehicle if !(self.max_turn_radius > 0.0) => {
                return err("maxTurnRadius must be > 0")
            }
            PlatformKind::GroundVehicle if !(self.max_accel > 0.0) => return err("maxAccel must be > 0"),
            _ => {}
        }
        if !(self.yaw_rate > 0.0) {
            return err("yaw rate must be > 0");
        }
        if !(self.position_noise_std >= 0.0) {
            return err("position noise must be >= 0");
        }
        Ok(())
    }
}

/// One waypoint with the platform settings of the leg that starts there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    pub waypoint: Vec3,
    /// m/s; ignored by static platforms.
    pub speed: f64,
    pub start_yaw: Option<f64>,
    pub end_yaw: Option<f64>,
    /// Dwell time of static legs, s.
    pub duration: Option<f64>,
}

impl Leg {
    pub fn new(waypoint: Vec3, speed: f64) -> Leg {
        Leg {
            waypoint,
            speed,
            start_yaw: None,
            end_yaw: None,
            duration: None,
        }
    }
}

/// Adds zero-mean normal offsets with standard deviation `sigma` per axis.
pub fn apply_position_noise<R: Rng + ?Sized>(state: &PlatformState, rng: &mut R, sigma: f64) -> PlatformState {
    if sigma <= 0.0 {
        return *state;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is positive and finite");
    let mut s = *state;
    s.position += Vec3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(0.1 + 4.0 * TAU) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn attitude_composition_order() {
        let (r, p, y) = (0.1, -0.2, 0.7);
        let oracle = Rotation3::from_axis_angle(&Vec3::z_axis(), y)
            * Rotation3::from_axis_angle(&Vec3::y_axis(), p)
            * Rotation3::from_axis_angle(&Vec3::x_axis(), r);
        assert!((attitude_matrix(r, p, y) - oracle.into_inner()).norm() < 1e-12);
    }

    #[test]
    fn lerp_takes_short_way() {
        let a = PlatformState::at(Vec3::zeros(), 3.0);
        let b = PlatformState::at(Vec3::x(), -3.0);
        let m = a.lerp(&b, 0.5);
        assert!((m.yaw.abs() - PI).abs() < 1e-12);
        assert_eq!(m.position, Vec3::new(0.5, 0.0, 0.0));
    }

    #[test]
    fn noise_zero_sigma_is_identity() {
        let s = PlatformState::at(Vec3::new(1.0, 2.0, 3.0), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(apply_position_noise(&s, &mut rng, 0.0), s);
    }

    #[test]
    fn noise_statistics_and_repeatability() {
        let s = PlatformState::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples: Vec<Vec3> = (0..10_000)
            .map(|_| apply_position_noise(&s, &mut rng, 0.05).position)
            .collect();
        for axis in 0..3 {
            let mean = samples.iter().map(|p| p[axis]).sum::<f64>() / 1e4;
            let var = samples.iter().map(|p| (p[axis] - mean).powi(2)).sum::<f64>() / (1e4 - 1.0);
            let std = var.sqrt();
            assert!((0.045..=0.055).contains(&std), "axis {axis}: {std}");
        }
        let mut again = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(apply_position_noise(&s, &mut again, 0.05).position, samples[0]);
    }

    #[test]
    fn spec_validation() {
        let mut p = PlatformSpec::new("mc", PlatformKind::Multicopter);
        p.validate().unwrap();
        p.max_accel = 0.0;
        assert!(p.validate().is_err());
        let mut g = PlatformSpec::new("car", PlatformKind::GroundVehicle);
        g.max_turn_radius = -1.0;
        assert!(g.validate().is_err());
        assert_eq!("Multicopter".parse::<PlatformKind>().unwrap(), PlatformKind::Multicopter);
    }
}
