use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use super::geometry::{Aabb, Ray, Vec3};
use crate::waveform::lad::LadLut;

/// Surface properties shared by the primitives of a scene part.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    pub name: String,
    pub reflectance: f64,
    pub specularity: f64,
    pub is_ground: bool,
    pub classification: u8,
}

impl Default for Material {
    fn default() -> Self {
        Material {
            name: "default".to_string(),
            reflectance: 0.5,
            specularity: 0.0,
            is_ground: false,
            classification: 0,
        }
    }
}

/// How the incidence angle of a ray on an opaque voxel without a normal is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VoxelIncidence {
    /// Use the normal of the cube face the ray enters through.
    #[default]
    Face,
    /// Every ray hits at 0° incidence.
    Zero,
}

#[derive(Debug, Clone)]
pub enum PrimitiveKind {
    Triangle {
        vertices: [Vec3; 3],
    },
    Voxel {
        centre: Vec3,
        half_size: f64,
        normal: Option<Vec3>,
        incidence: VoxelIncidence,
    },
    /// Transmissive voxel carrying plant area density (m²/m³).
    DetailedVoxel {
        centre: Vec3,
        half_size: f64,
        pad: f64,
        lut: Arc<LadLut>,
    },
}

#[derive(Debug, Clone)]
pub struct Primitive {
    pub kind: PrimitiveKind,
    pub material: Arc<Material>,
    pub part_id: u32,
}

/// A ray hit. `t_exit` is only set for volumetric primitives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    pub t_enter: f64,
    pub t_exit: Option<f64>,
    pub primitive: usize,
    pub point: Vec3,
    pub incidence_angle: f64,
}

/// Determinant cutoff of the barycentric triangle test.
pub const TRIANGLE_DET_EPS: f64 = 1e-12;

impl Primitive {
    pub fn triangle(vertices: [Vec3; 3], material: Arc<Material>, part_id: u32) -> Primitive {
        Primitive {
            kind: PrimitiveKind::Triangle { vertices },
            material,
            part_id,
        }
    }

    pub fn bounds(&self) -> Aabb {
        match &self.kind {
            PrimitiveKind::Triangle { vertices } => Aabb::from_points(vertices.iter()),
            PrimitiveKind::Voxel {
                centre, half_size, ..
            }
            | PrimitiveKind::DetailedVoxel {
                centre, half_size, ..
            } => Aabb::new(
                centre - Vec3::repeat(*half_size),
                centre + Vec3::repeat(*half_size),
            ),
        }
    }

    pub fn centroid(&self) -> Vec3 {
        match &self.kind {
            PrimitiveKind::Triangle { vertices } => (vertices[0] + vertices[1] + vertices[2]) / 3.0,
            PrimitiveKind::Voxel { centre, .. } | PrimitiveKind::DetailedVoxel { centre, .. } => {
                *centre
            }
        }
    }

    pub fn is_transmissive(&self) -> bool {
        matches!(self.kind, PrimitiveKind::DetailedVoxel { .. })
    }

    /// Intersects the ray with this primitive. `index` is copied into the result.
    pub fn intersect(&self, ray: &Ray, index: usize) -> Option<Intersection> {
        match &self.kind {
            PrimitiveKind::Triangle { vertices } => {
                let (t, normal) = intersect_triangle(ray, vertices)?;
                Some(Intersection {
                    t_enter: t,
                    t_exit: None,
                    primitive: index,
                    point: ray.at(t),
                    incidence_angle: incidence(&ray.direction, &normal),
                })
            }
            PrimitiveKind::Voxel {
                normal, incidence: mode, ..
            } => {
                let (t0, t1, face_axis) = intersect_box(ray, &self.bounds())?;
                let angle = match (normal, mode) {
                    (Some(n), _) => incidence(&ray.direction, n),
                    (None, VoxelIncidence::Zero) => 0.0,
                    (None, VoxelIncidence::Face) => {
                        ray.direction[face_axis].abs().min(1.0).acos()
                    }
                };
                Some(Intersection {
                    t_enter: t0,
                    t_exit: Some(t1),
                    primitive: index,
                    point: ray.at(t0),
                    incidence_angle: angle,
                })
            }
            PrimitiveKind::DetailedVoxel { .. } => {
                let (t0, t1, _) = intersect_box(ray, &self.bounds())?;
                Some(Intersection {
                    t_enter: t0,
                    t_exit: Some(t1),
                    primitive: index,
                    point: ray.at(t0),
                    incidence_angle: 0.0,
                })
            }
        }
    }
}

/// Angle between a direction and a surface normal, folded to [0, π/2].
pub fn incidence(direction: &Vec3, normal: &Vec3) -> f64 {
    let c = direction.dot(normal).abs() / (direction.norm() * normal.norm());
    c.min(1.0).acos().clamp(0.0, FRAC_PI_2)
}

/// Barycentric ray/triangle test. Returns the forward distance and the
/// (unnormalized) geometric normal.
pub fn intersect_triangle(ray: &Ray, v: &[Vec3; 3]) -> Option<(f64, Vec3)> {
    let e1 = v[1] - v[0];
    let e2 = v[2] - v[0];
    let p = ray.direction.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < TRIANGLE_DET_EPS {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - v[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let w = ray.direction.dot(&q) * inv;
    if w < 0.0 || u + w > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    if t < 0.0 {
        return None;
    }
    Some((t, e1.cross(&e2)))
}

/// Slab test that also reports the axis of the entry face.
fn intersect_box(ray: &Ray, b: &Aabb) -> Option<(f64, f64, usize)> {
    let mut t0 = 0.0_f64;
    let mut t1 = f64::INFINITY;
    let mut axis = 0;
    let mut best_near = f64::NEG_INFINITY;
    for a in 0..3 {
        let d = ray.direction[a];
        let o = ray.origin[a];
        if d == 0.0 {
            if o < b.min[a] || o > b.max[a] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d;
        let mut near = (b.min[a] - o) * inv;
        let mut far = (b.max[a] - o) * inv;
        if near > far {
            std::mem::swap(&mut near, &mut far);
        }
        if near > best_near {
            best_near = near;
            axis = a;
        }
        t0 = t0.max(near);
        t1 = t1.min(far);
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1, axis))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> [Vec3; 3] {
        [
            Vec3::new(-1.0, -1.0, 0.0),
            Vec3::new(1.0, -1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ]
    }

    #[test]
    fn nadir_ray_hits_triangle_at_origin() {
        let p = Primitive::triangle(tri(), Arc::new(Material::default()), 0);
        let ray = Ray::new(Vec3::new(0.0, 0.0, 1.0), -Vec3::z());
        let hit = p.intersect(&ray, 7).unwrap();
        assert!((hit.t_enter - 1.0).abs() < 1e-12);
        assert!(hit.point.norm() < 1e-12);
        assert!(hit.t_exit.is_none());
        assert_eq!(hit.primitive, 7);
        assert!(hit.incidence_angle.abs() < 1e-12);
    }

    #[test]
    fn parallel_and_backward_rays_miss() {
        let parallel = Ray::new(Vec3::new(-5.0, 0.0, 0.0), Vec3::x());
        assert!(intersect_triangle(&parallel, &tri()).is_none());
        let behind = Ray::new(Vec3::new(0.0, 0.0, 1.0), Vec3::z());
        assert!(intersect_triangle(&behind, &tri()).is_none());
    }

    #[test]
    fn oblique_incidence_is_folded() {
        let dir = Vec3::new(1.0, 0.0, 1.0);
        let ray = Ray::new(Vec3::new(-0.5, 0.0, -0.5), dir);
        let (_, n) = intersect_triangle(&ray, &tri()).unwrap();
        let a = incidence(&ray.direction, &n);
        assert!((a - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn voxel_face_and_zero_incidence() {
        let mat = Arc::new(Material::default());
        let make = |incidence| Primitive {
            kind: PrimitiveKind::Voxel {
                centre: Vec3::zeros(),
                half_size: 0.5,
                normal: None,
                incidence,
            },
            material: mat.clone(),
            part_id: 0,
        };
        let ray = Ray::new(Vec3::new(-0.2, 0.0, 5.0), Vec3::new(0.02, 0.0, -1.0));
        let face = make(VoxelIncidence::Face).intersect(&ray, 0).unwrap();
        let expected = ray.direction.z.abs().acos();
        assert!((face.incidence_angle - expected).abs() < 1e-12);
        assert!(face.t_exit.unwrap() > face.t_enter);
        let zero = make(VoxelIncidence::Zero).intersect(&ray, 0).unwrap();
        assert_eq!(zero.incidence_angle, 0.0);
    }
}
