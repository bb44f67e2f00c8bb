#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vls_core::raycast::{Material, Primitive, Ray, Vec3};
use vls_core::survey::MeasurementRecord;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bundled example data directory.
pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn random_triangles(rng: &mut impl Rng, n: usize, extent: f64, size: f64) -> Vec<Primitive> {
    let m = Arc::new(Material::default());
    (0..n)
        .map(|_| {
            let c = Vec3::from_fn(|_, _| rng.random_range(-extent..extent));
            let v = [(); 3].map(|_| c + Vec3::from_fn(|_, _| rng.random_range(-size..size)));
            Primitive::triangle(v, m.clone(), 0)
        })
        .collect()
}

pub fn random_ray(rng: &mut impl Rng, extent: f64) -> Ray {
    let origin = Vec3::from_fn(|_, _| rng.random_range(-1.5 * extent..1.5 * extent));
    let target = Vec3::from_fn(|_, _| rng.random_range(-extent..extent));
    Ray::new(origin, (target - origin).normalize())
}

/// Nearest hit by testing every primitive; ties go to the lower index.
pub fn brute_force(prims: &[Primitive], ray: &Ray) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in prims.iter().enumerate() {
        if let Some(hit) = p.intersect(ray, i) {
            if best.is_none_or(|(_, t)| hit.t_enter < t) {
                best = Some((i, hit.t_enter));
            }
        }
    }
    best
}

pub fn random_points(rng: &mut impl Rng, n: usize) -> Vec<MeasurementRecord> {
    (0..n)
        .map(|i| MeasurementRecord {
            position: Vec3::new(
                rng.random_range(-500.0..500.0),
                rng.random_range(1000.0..2000.0),
                rng.random_range(-20.0..80.0),
            ),
            intensity: rng.random_range(0.0..3.0),
            return_number: rng.random_range(1..=3),
            total_returns: 3,
            gps_time: i as f64 * 1e-5,
            fullwave_index: i as u64,
            part_id: 0,
            classification: rng.random_range(0..10),
            echo_width_ns: None,
        })
        .collect()
}
