use nalgebra::Vector3;

/// A point or direction in scene coordinates (metres).
pub type Vec3 = Vector3<f64>;

/// A half-line with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Builds a ray, normalizing `direction`.
    pub fn new(origin: Vec3, direction: Vec3) -> Ray {
        Ray {
            origin,
            direction: direction.normalize(),
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

/// Re-emits a ray just past the exit distance of a traversed primitive.
///
/// The new origin is `origin + (t_exit + epsilon) * direction`; the direction is kept.
pub fn continue_ray(ray: &Ray, t_exit: f64, epsilon: f64) -> Ray {
    Ray {
        origin: ray.origin + ray.direction * (t_exit + epsilon),
        direction: ray.direction,
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Aabb {
        debug_assert!(min.x <= max.x && min.y <= max.y && min.z <= max.z);
        Aabb { min, max }
    }

    /// An inverted box that any `grow` call replaces.
    pub fn empty() -> Aabb {
        Aabb {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Aabb {
        let mut b = Aabb::empty();
        for p in points {
            b.grow_point(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    pub fn grow_point(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn grow(&mut self, other: &Aabb) {
        self.min = self.min.inf(&other.min);
        self.max = self.max.sup(&other.max);
    }

    pub fn centroid(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|a| self.min[a] <= other.max[a] && other.min[a] <= self.max[a])
    }

    /// Slab test. Returns the parametric interval of the ray inside the box,
    /// clipped to `t >= 0`.
    pub fn intersect(&self, ray: &Ray) -> Option<(f64, f64)> {
        let mut t0 = 0.0_f64;
        let mut t1 = f64::INFINITY;
        for a in 0..3 {
            let d = ray.direction[a];
            let o = ray.origin[a];
            if d == 0.0 {
                if o < self.min[a] || o > self.max[a] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / d;
            let mut near = (self.min[a] - o) * inv;
            let mut far = (self.max[a] - o) * inv;
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

/// Two unit vectors completing `axis` to a right-handed orthonormal basis.
pub fn orthonormal_basis(axis: &Vec3) -> (Vec3, Vec3) {
    let helper = if axis.z.abs() < 0.9 {
        Vec3::z()
    } else {
        Vec3::x()
    };
    let u = helper.cross(axis).normalize();
    let v = axis.cross(&u);
    (u, v)
}
