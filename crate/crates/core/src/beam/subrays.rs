//! Sampling of the divergence cone with concentric rings of subrays.

use std::f64::consts::TAU;

use crate::error::{Result, VlsError};
use crate::raycast::{orthonormal_basis, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subray {
    /// Angle between the subray and the central ray, rad.
    pub radial_angle: f64,
    pub azimuth: f64,
    /// Ring radius as a fraction of the divergence half-angle.
    pub radial_fraction: f64,
    /// Far-field power relative to the central ray, `exp(-2 f²)`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubrayPattern {
    pub quality: u32,
    pub divergence: f64,
    pub subrays: Vec<Subray>,
}

/// Subrays on ring `ring` (1-based): `⌊2π i⌋`.
pub fn ring_size(ring: u32) -> usize {
    (TAU * ring as f64).floor() as usize
}

/// One central subray plus all rings up to `quality`.
pub fn subray_count(quality: u32) -> usize {
    1 + (1..=quality).map(ring_size).sum::<usize>()
}

/// Builds the pattern for `quality` rings inside a cone of half-angle
/// `divergence` (rad). Ring `i` sits at `i / quality` of the cone.
pub fn generate_subrays(quality: u32, divergence: f64) -> Result<SubrayPattern> {
    if quality < 1 {
        return Err(VlsError::Config(
            "beam sample quality must be at least 1".into(),
        ));
    }
    let mut subrays = Vec::with_capacity(subray_count(quality));
    subrays.push(Subray {
        radial_angle: 0.0,
        azimuth: 0.0,
        radial_fraction: 0.0,
        weight: 1.0,
    });
    for ring in 1..=quality {
        let fraction = ring as f64 / quality as f64;
        let n = ring_size(ring);
        let weight = (-2.0 * fraction * fraction).exp();
        for j in 0..n {
            subrays.push(Subray {
                radial_angle: fraction * divergence,
                azimuth: TAU * j as f64 / n as f64,
                radial_fraction: fraction,
                weight,
            });
        }
    }
    Ok(SubrayPattern {
        quality,
        divergence,
        subrays,
    })
}

impl Subray {
    /// Direction of this subray around a unit central direction.
    pub fn direction(&self, central: &Vec3, basis: &(Vec3, Vec3)) -> Vec3 {
        if self.radial_angle == 0.0 {
            return *central;
        }
        let (s, c) = self.radial_angle.sin_cos();
        let (sa, ca) = self.azimuth.sin_cos();
        (central * c + (basis.0 * ca + basis.1 * sa) * s).normalize()
    }
}

impl SubrayPattern {
    pub fn len(&self) -> usize {
        self.subrays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subrays.is_empty()
    }

    /// Subray directions around `central`.
    pub fn directions(&self, central: &Vec3) -> Vec<Vec3> {
        let basis = orthonormal_basis(central);
        self.subrays
            .iter()
            .map(|s| s.direction(central, &basis))
            .collect()
    }
}
