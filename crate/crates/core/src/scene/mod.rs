//! Scene inputs and their assembly into one ray-traceable scene.

pub mod obj;
pub mod pointcloud;
pub mod raster;
pub mod voxels;

use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use obj::{load_wavefront_obj, parse_mtl};
pub use pointcloud::{
    average_color, estimate_normal_svd, voxelize_point_cloud, NormalMode, VoxelAggregate,
    VoxelGridSpec, VoxelizeOptions, VoxelizedCloud, XyzColumns,
};
pub use raster::{load_ascii_grid, parse_ascii_grid, raster_to_mesh, HeightGrid};
pub use voxels::{
    load_pad_voxels, parse_vox, scaled_side, PadVoxelFile, PadVoxelMode, PadVoxelOptions,
    PadVoxelRecord,
};

use crate::error::{Result, VlsError};
use crate::raycast::{Aabb, KdTree, KdTreeConfig, Material, Primitive, Ray, Transform, Vec3};

/// Primitives loaded from one input source.
#[derive(Debug, Clone)]
pub struct ScenePart {
    pub id: String,
    pub index: u32,
    pub primitives: Vec<Primitive>,
    pub source_path: PathBuf,
    pub transform: Transform,
    pub material_override: Option<Material>,
}

impl ScenePart {
    pub fn new(index: u32, source: &Path, primitives: Vec<Primitive>) -> ScenePart {
        ScenePart {
            id: source
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("part{index}")),
            index,
            primitives,
            source_path: source.to_path_buf(),
            transform: Transform::default(),
            material_override: None,
        }
    }

    pub fn apply_transform(&mut self, transform: Transform) -> Result<()> {
        transform.apply(&mut self.primitives)?;
        self.transform = transform;
        Ok(())
    }

    /// Replaces the material of every primitive.
    pub fn override_material(&mut self, material: Material) {
        let shared = Arc::new(material.clone());
        for p in &mut self.primitives {
            p.material = shared.clone();
        }
        self.material_override = Some(material);
    }

    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::empty();
        for p in &self.primitives {
            b.grow(&p.bounds());
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartInfo {
    pub id: String,
    pub source_path: PathBuf,
    pub primitive_count: usize,
}

/// Immutable scene shared by all workers.
#[derive(Debug)]
pub struct Scene {
    pub name: String,
    pub parts: Vec<PartInfo>,
    pub tree: KdTree,
}

impl Scene {
    /// Builds the kD-tree over all parts. Part ids on primitives are
    /// reassigned to the position of their part in `parts`.
    pub fn assemble(name: impl Into<String>, parts: Vec<ScenePart>, config: KdTreeConfig) -> Result<Scene> {
        let name = name.into();
        let mut infos = Vec::with_capacity(parts.len());
        let mut all = Vec::new();
        for (i, part) in parts.into_iter().enumerate() {
            if part.primitives.is_empty() {
                return Err(VlsError::EmptyPart(part.id));
            }
            infos.push(PartInfo {
                id: part.id,
                source_path: part.source_path,
                primitive_count: part.primitives.len(),
            });
            all.extend(part.primitives.into_iter().map(|mut p| {
                p.part_id = i as u32;
                p
            }));
        }
        if all.is_empty() {
            return Err(VlsError::Config(format!("scene `{name}` has no primitives")));
        }
        let tree = KdTree::build(all, config)?;
        Ok(Scene {
            name,
            parts: infos,
            tree,
        })
    }

    pub fn bounds(&self) -> &Aabb {
        self.tree.bounds()
    }

    pub fn primitive_count(&self) -> usize {
        self.tree.primitives().len()
    }

    /// Height of the highest ground surface under (x, y), if any.
    pub fn ground_height(&self, x: f64, y: f64) -> Option<f64> {
        let top = self.bounds().max.z + 1.0;
        let ray = Ray::new(Vec3::new(x, y, top), -Vec3::z());
        self.tree
            .nearest_hit_where(&ray, |p| p.material.is_ground)
            .map(|h| h.point.z)
    }
}
