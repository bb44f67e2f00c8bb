//! Affine placement of scene parts: uniform scale, a sequence of axis-angle
//! rotations, then translation.

use nalgebra::{Matrix3, Rotation3, Unit};

use super::geometry::Vec3;
use super::primitive::{Primitive, PrimitiveKind};
use crate::error::{Result, VlsError};

/// How a sequence of rotations composes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RotationMode {
    /// Every rotation is about the fixed scene axes.
    #[default]
    Extrinsic,
    /// Every rotation is about the axes as rotated by the previous ones.
    Intrinsic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAngle {
    pub axis: Vec3,
    /// Radians, counterclockwise looking down the axis.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub scale: f64,
    pub rotations: Vec<AxisAngle>,
    pub mode: RotationMode,
    pub translation: Vec3,
}

impl Default for Transform {
    fn default() -> Self {
        Transform {
            scale: 1.0,
            rotations: Vec::new(),
            mode: RotationMode::Extrinsic,
            translation: Vec3::zeros(),
        }
    }
}

impl Transform {
    pub fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.rotations.is_empty() && self.translation == Vec3::zeros()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(VlsError::Config(format!(
                "transform scale must be > 0, got {}",
                self.scale
            )));
        }
        for r in &self.rotations {
            if r.axis.norm() == 0.0 {
                return Err(VlsError::Config("rotation axis must be non-zero".into()));
            }
        }
        Ok(())
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let mut m = Matrix3::identity();
        for r in &self.rotations {
            let step = *Rotation3::from_axis_angle(&Unit::new_normalize(r.axis), r.angle).matrix();
            m = match self.mode {
                RotationMode::Extrinsic => step * m,
                RotationMode::Intrinsic => m * step,
            };
        }
        m
    }

    pub fn apply_point(&self, p: &Vec3) -> Vec3 {
        self.rotation_matrix() * (p * self.scale) + self.translation
    }

    /// The exact inverse of `apply_point`.
    pub fn invert_point(&self, p: &Vec3) -> Vec3 {
        self.rotation_matrix().transpose() * (p - self.translation) / self.scale
    }

    /// Transforms primitives in place.
    ///
    /// Voxels stay axis-aligned: rotation moves their centres and normals
    /// but not their faces.
    pub fn apply(&self, primitives: &mut [Primitive]) -> Result<()> {
        self.validate()?;
        if self.is_identity() {
            return Ok(());
        }
        let rot = self.rotation_matrix();
        let map = |p: &Vec3| rot * (p * self.scale) + self.translation;
        for prim in primitives.iter_mut() {
            match &mut prim.kind {
                PrimitiveKind::Triangle { vertices } => {
                    for v in vertices.iter_mut() {
                        *v = map(v);
                    }
                }
                PrimitiveKind::Voxel {
                    centre,
                    half_size,
                    normal,
                    ..
                } => {
                    *centre = map(centre);
                    *half_size *= self.scale;
                    if let Some(n) = normal {
                        *n = (rot * *n).normalize();
                    }
                }
                PrimitiveKind::DetailedVoxel {
                    centre, half_size, ..
                } => {
                    *centre = map(centre);
                    *half_size *= self.scale;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn rot(axis: Vec3, angle: f64) -> AxisAngle {
        AxisAngle { axis, angle }
    }

    #[test]
    fn identity_is_noop() {
        let t = Transform::default();
        let p = Vec3::new(1.5, -2.0, 3.25);
        assert_eq!(t.apply_point(&p), p);
    }

    #[test]
    fn quarter_turn_about_z() {
        let t = Transform {
            rotations: vec![rot(Vec3::z(), FRAC_PI_2)],
            ..Default::default()
        };
        let p = t.apply_point(&Vec3::x());
        assert!((p - Vec3::y()).norm() < 1e-12);
    }

    #[test]
    fn intrinsic_and_extrinsic_differ_and_match_matrix_products() {
        let rz = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        let seq = vec![rot(Vec3::z(), FRAC_PI_2), rot(Vec3::x(), FRAC_PI_2)];
        let ext = Transform {
            rotations: seq.clone(),
            mode: RotationMode::Extrinsic,
            ..Default::default()
        };
        let int = Transform {
            rotations: seq,
            mode: RotationMode::Intrinsic,
            ..Default::default()
        };
        let p = Vec3::z();
        let pe = ext.apply_point(&p);
        let pi = int.apply_point(&p);
        assert!((pe - rx * rz * p).norm() < 1e-12);
        assert!((pi - rz * rx * p).norm() < 1e-12);
        assert!((pe - pi).norm() > 0.5);
    }

    #[test]
    fn order_is_scale_rotate_translate() {
        let t = Transform {
            scale: 2.0,
            rotations: vec![rot(Vec3::z(), FRAC_PI_2)],
            translation: Vec3::new(10.0, 0.0, 0.0),
            ..Default::default()
        };
        let p = t.apply_point(&Vec3::x());
        assert!((p - Vec3::new(10.0, 2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn non_positive_scale_rejected() {
        let t = Transform {
            scale: 0.0,
            ..Default::default()
        };
        assert!(matches!(t.validate(), Err(VlsError::Config(_))));
        let t = Transform {
            scale: -1.0,
            ..Default::default()
        };
        assert!(t.apply(&mut []).is_err());
    }
}
