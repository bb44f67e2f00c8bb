//! Geometry, ray/primitive intersection and kD-tree queries.

pub mod geometry;
pub mod kdtree;
pub mod primitive;
pub mod transform;

pub use geometry::{continue_ray, orthonormal_basis, Aabb, Ray, Vec3};
pub use kdtree::{KdTree, KdTreeConfig, TraversalStats};
pub use primitive::{
    incidence, intersect_triangle, Intersection, Material, Primitive, PrimitiveKind,
    VoxelIncidence,
};
pub use transform::{AxisAngle, RotationMode, Transform};

/// Default step past an exit point when a ray continues through a primitive (m).
pub const DEFAULT_CONTINUE_EPSILON: f64 = 1e-5;
