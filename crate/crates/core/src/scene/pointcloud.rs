//! Point cloud voxelization. Stage one streams the file once for bounds and
//! count; stage two streams it again per batch of x cell slabs and
//! aggregates the points of each occupied cell.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use log::warn;
use nalgebra::DMatrix;

use super::ScenePart;
use crate::error::{Result, VlsError};
use crate::raycast::{Aabb, Material, Primitive, PrimitiveKind, Vec3, VoxelIncidence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NormalMode {
    #[default]
    NearestToCentre,
    Average,
    Estimate,
    None,
}

impl FromStr for NormalMode {
    type Err = VlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nearesttocentre" | "nearesttocenter" | "nearest" => Ok(NormalMode::NearestToCentre),
            "average" | "mean" => Ok(NormalMode::Average),
            "estimate" | "svd" => Ok(NormalMode::Estimate),
            "none" => Ok(NormalMode::None),
            other => Err(VlsError::Config(format!("unknown normal mode `{other}`"))),
        }
    }
}

/// Meaning of the columns after x y z.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XyzColumns {
    /// Decided by column count: 6 means normals, 9 normals and colour.
    #[default]
    Auto,
    /// Six columns carry colour instead of normals.
    Rgb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGridSpec {
    pub min_corner: Vec3,
    pub max_corner: Vec3,
    pub resolution: f64,
    pub counts: [usize; 3],
}

impl VoxelGridSpec {
    pub fn new(min_corner: Vec3, max_corner: Vec3, resolution: f64) -> Result<VoxelGridSpec> {
        if !(resolution > 0.0) {
            return Err(VlsError::Config(format!("voxel size must be > 0, got {resolution}")));
        }
        let extent = max_corner - min_corner;
        let counts = [0, 1, 2].map(|a| ((extent[a] / resolution).ceil() as usize).max(1));
        Ok(VoxelGridSpec {
            min_corner,
            max_corner,
            resolution,
            counts,
        })
    }

    /// Cell of a point; cells are half-open except the last along each axis.
    pub fn cell_of(&self, p: &Vec3) -> [usize; 3] {
        [0, 1, 2].map(|a| {
            let k = ((p[a] - self.min_corner[a]) / self.resolution).floor();
            (k.max(0.0) as usize).min(self.counts[a] - 1)
        })
    }

    pub fn cell_centre(&self, cell: [usize; 3]) -> Vec3 {
        Vec3::from_fn(|a, _| self.min_corner[a] + (cell[a] as f64 + 0.5) * self.resolution)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelAggregate {
    pub cell: [usize; 3],
    pub centre: Vec3,
    pub point_count: u64,
    pub normal: Option<Vec3>,
    pub color: Option<[u8; 3]>,
}

#[derive(Debug, Clone)]
pub struct VoxelizeOptions {
    pub voxel_size: f64,
    pub normal_mode: NormalMode,
    /// Points per stage-two batch; 0 processes everything at once.
    pub max_points_per_batch: u64,
    pub columns: XyzColumns,
}

impl VoxelizeOptions {
    pub fn new(voxel_size: f64) -> VoxelizeOptions {
        VoxelizeOptions {
            voxel_size,
            normal_mode: NormalMode::default(),
            max_points_per_batch: 0,
            columns: XyzColumns::Auto,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VoxelizedCloud {
    pub source: PathBuf,
    pub grid: VoxelGridSpec,
    /// Sorted by cell index (i, j, k).
    pub voxels: Vec<VoxelAggregate>,
    pub total_points: u64,
    pub batches: usize,
}

#[derive(Debug, Clone, Copy)]
struct Row {
    p: Vec3,
    normal: Option<Vec3>,
    rgb: Option<[f64; 3]>,
}

fn parse_row(line: &str, columns: XyzColumns, path: &Path, line_no: usize) -> Result<Option<Row>> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') || line.starts_with("//") {
        return Ok(None);
    }
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| VlsError::parse(path, line_no, format!("non-numeric value `{t}`")))
        })
        .collect::<Result<_>>()?;
    if vals.len() < 3 {
        return Err(VlsError::parse(path, line_no, "row needs at least x y z"));
    }
    let v3 = |i: usize| Vec3::new(vals[i], vals[i + 1], vals[i + 2]);
    let rgb = |i: usize| [vals[i], vals[i + 1], vals[i + 2]];
    let (normal, color) = match (vals.len(), columns) {
        (n, _) if n >= 9 => (Some(v3(3)), Some(rgb(6))),
        (n, XyzColumns::Rgb) if n >= 6 => (None, Some(rgb(3))),
        (n, XyzColumns::Auto) if n >= 6 => (Some(v3(3)), None),
        _ => (None, None),
    };
    Ok(Some(Row {
        p: v3(0),
        normal,
        rgb: color,
    }))
}

fn for_each_row(path: &Path, columns: XyzColumns, mut f: impl FnMut(Row)) -> Result<()> {
    let file = File::open(path).map_err(|e| VlsError::io(path, e))?;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| VlsError::io(path, e))?;
        if let Some(row) = parse_row(&line, columns, path, i + 1)? {
            f(row);
        }
    }
    Ok(())
}

/// Least-squares plane normal through `points`, oriented to positive z,
/// then y, then x. Returns `None` for fewer than three points or a
/// degenerate (collinear) set.
pub fn estimate_normal_svd(points: &[Vec3]) -> Option<Vec3> {
    if points.len() < 3 {
        return None;
    }
    let mean = points.iter().sum::<Vec3>() / points.len() as f64;
    let m = DMatrix::from_fn(points.len(), 3, |r, c| points[r][c] - mean[c]);
    let svd = m.svd(false, true);
    let v_t = svd.v_t?;
    let s = &svd.singular_values;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let (largest, middle, smallest) = (s[order[0]], s[order[1]], order[2]);
    if largest <= 0.0 || middle <= 1e-9 * largest {
        return None;
    }
    let n = Vec3::new(v_t[(smallest, 0)], v_t[(smallest, 1)], v_t[(smallest, 2)]).normalize();
    Some(orient_normal(n))
}

/// Sign convention: positive z; ties go to positive y, then x.
pub fn orient_normal(n: Vec3) -> Vec3 {
    const EPS: f64 = 1e-12;
    let flip = if n.z.abs() > EPS {
        n.z < 0.0
    } else if n.y.abs() > EPS {
        n.y < 0.0
    } else {
        n.x < 0.0
    };
    if flip {
        -n
    } else {
        n
    }
}

/// Per channel `sqrt(mean(c²))`, rounded to [0, 255].
pub fn average_color(colors: &[[f64; 3]]) -> Option<[u8; 3]> {
    if colors.is_empty() {
        return None;
    }
    let mut sq = [0.0; 3];
    for c in colors {
        for k in 0..3 {
            sq[k] += c[k] * c[k];
        }
    }
    Some(channel_rms(sq, colors.len() as u64))
}

fn channel_rms(sq: [f64; 3], n: u64) -> [u8; 3] {
    sq.map(|s| (s / n as f64).sqrt().round().clamp(0.0, 255.0) as u8)
}

#[derive(Default)]
struct CellAcc {
    count: u64,
    nearest: Option<(f64, Vec3)>,
    normal_sum: Vec3,
    normal_count: u64,
    color_sq: [f64; 3],
    color_count: u64,
    points: Vec<Vec3>,
}

pub fn voxelize_point_cloud(path: &Path, options: &VoxelizeOptions) -> Result<VoxelizedCloud> {
    // stage 1: bounds, count and which optional columns exist
    let mut bounds = Aabb::empty();
    let mut total = 0u64;
    let mut has_normals = false;
    for_each_row(path, options.columns, |row| {
        bounds.grow_point(&row.p);
        total += 1;
        has_normals |= row.normal.is_some();
    })?;
    if total == 0 {
        return Err(VlsError::EmptyPart(format!("{}: no points", path.display())));
    }
    let grid = VoxelGridSpec::new(bounds.min, bounds.max, options.voxel_size)?;

    let mut mode = options.normal_mode;
    if matches!(mode, NormalMode::NearestToCentre | NormalMode::Average) && !has_normals {
        warn!(
            "{}: no normal columns, estimating normals from the points instead",
            path.display()
        );
        mode = NormalMode::Estimate;
    }

    let nx = grid.counts[0];
    let batches = if options.max_points_per_batch == 0 {
        1
    } else {
        (total.div_ceil(options.max_points_per_batch) as usize).clamp(1, nx)
    };

    // stage 2
    let mut voxels = Vec::new();
    let mut fallbacks = 0usize;
    for b in 0..batches {
        let lo = b * nx / batches;
        let hi = (b + 1) * nx / batches;
        let mut cells: BTreeMap<[usize; 3], CellAcc> = BTreeMap::new();
        for_each_row(path, options.columns, |row| {
            let cell = grid.cell_of(&row.p);
            if cell[0] < lo || cell[0] >= hi {
                return;
            }
            let acc = cells.entry(cell).or_default();
            acc.count += 1;
            if let Some(n) = row.normal {
                let d = (row.p - grid.cell_centre(cell)).norm_squared();
                if acc.nearest.is_none_or(|(best, _)| d < best) {
                    acc.nearest = Some((d, n));
                }
                acc.normal_sum += n;
                acc.normal_count += 1;
            }
            if let Some(c) = row.rgb {
                for k in 0..3 {
                    acc.color_sq[k] += c[k] * c[k];
                }
                acc.color_count += 1;
            }
            if mode == NormalMode::Estimate {
                acc.points.push(row.p);
            }
        })?;
        for (cell, acc) in cells {
            let normal = match mode {
                NormalMode::None => None,
                NormalMode::NearestToCentre => acc
                    .nearest
                    .and_then(|(_, n)| (n.norm() > 0.0).then(|| n.normalize())),
                NormalMode::Average => (acc.normal_count > 0 && acc.normal_sum.norm() > 0.0)
                    .then(|| acc.normal_sum.normalize()),
                NormalMode::Estimate => Some(estimate_normal_svd(&acc.points).unwrap_or_else(|| {
                    fallbacks += 1;
                    Vec3::z()
                })),
            };
            voxels.push(VoxelAggregate {
                cell,
                centre: grid.cell_centre(cell),
                point_count: acc.count,
                normal,
                color: (acc.color_count > 0).then(|| channel_rms(acc.color_sq, acc.color_count)),
            });
        }
    }
    if fallbacks > 0 {
        warn!(
            "{}: {fallbacks} voxels had too few or collinear points, normal set to (0,0,1)",
            path.display()
        );
    }
    Ok(VoxelizedCloud {
        source: path.to_path_buf(),
        grid,
        voxels,
        total_points: total,
        batches,
    })
}

impl VoxelizedCloud {
    /// One opaque voxel primitive per occupied cell.
    pub fn into_part(self, material: Arc<Material>, incidence: VoxelIncidence, part_id: u32) -> ScenePart {
        let half = self.grid.resolution / 2.0;
        let primitives = self
            .voxels
            .iter()
            .map(|v| Primitive {
                kind: PrimitiveKind::Voxel {
                    centre: v.centre,
                    half_size: half,
                    normal: v.normal,
                    incidence,
                },
                material: material.clone(),
                part_id,
            })
            .collect();
        ScenePart::new(part_id, &self.source, primitives)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix3, Rotation3};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    fn write_points(rows: &[String]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# test cloud").unwrap();
        for r in rows {
            writeln!(f, "{r}").unwrap();
        }
        f.flush().unwrap();
        f
    }

    #[test]
    fn cube_corners_fill_one_voxel() {
        let mut rows = Vec::new();
        for k in 0..8 {
            rows.push(format!("{} {} {}", k & 1, (k >> 1) & 1, (k >> 2) & 1));
        }
        let f = write_points(&rows);
        let mut opts = VoxelizeOptions::new(2.0);
        opts.normal_mode = NormalMode::None;
        let v = voxelize_point_cloud(f.path(), &opts).unwrap();
        assert_eq!(v.voxels.len(), 1);
        assert_eq!(v.voxels[0].point_count, 8);
        assert_eq!(v.grid.cell_of(&Vec3::repeat(0.5)), v.voxels[0].cell);
    }

    #[test]
    fn distant_points_fill_two_voxels() {
        let f = write_points(&["0 0 0".into(), "10 0 0".into()]);
        let mut opts = VoxelizeOptions::new(1.0);
        opts.normal_mode = NormalMode::None;
        let v = voxelize_point_cloud(f.path(), &opts).unwrap();
        assert_eq!(v.voxels.len(), 2);
        assert_eq!(v.grid.counts, [10, 1, 1]);
    }

    #[test]
    fn errors_name_line_and_empty_input() {
        let f = write_points(&["0 0 0".into(), "1 a 0".into()]);
        match voxelize_point_cloud(f.path(), &VoxelizeOptions::new(1.0)) {
            Err(VlsError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let f = write_points(&[]);
        assert!(matches!(
            voxelize_point_cloud(f.path(), &VoxelizeOptions::new(1.0)),
            Err(VlsError::EmptyPart(_))
        ));
    }

    #[test]
    fn normal_modes_use_file_normals() {
        let n1 = Vec3::new(0.0, 0.0, 1.0);
        let n2 = Vec3::new(1.0, 0.0, 0.0);
        let f = write_points(&[
            format!("0.1 0.1 0.1 {} {} {}", n2.x, n2.y, n2.z),
            format!("0.9 0.9 0.9 {} {} {}", n2.x, n2.y, n2.z),
            format!("0.5 0.52 0.5 {} {} {}", n1.x, n1.y, n1.z),
            "2 2 2 0 0 1".into(),
        ]);
        let mut opts = VoxelizeOptions::new(1.0);
        let nearest = voxelize_point_cloud(f.path(), &opts).unwrap();
        assert_eq!(nearest.voxels[0].normal, Some(n1));
        opts.normal_mode = NormalMode::Average;
        let avg = voxelize_point_cloud(f.path(), &opts).unwrap();
        let expected = (n1 + n2 * 2.0).normalize();
        assert!((avg.voxels[0].normal.unwrap() - expected).norm() < 1e-12);
    }

    #[test]
    fn rgb_columns_are_averaged() {
        let f = write_points(&["0 0 0 0 0 0".into(), "0.1 0 0 255 255 255".into()]);
        let mut opts = VoxelizeOptions::new(1.0);
        opts.columns = XyzColumns::Rgb;
        opts.normal_mode = NormalMode::None;
        let v = voxelize_point_cloud(f.path(), &opts).unwrap();
        assert_eq!(v.voxels[0].color, Some([180, 180, 180]));
    }

    #[test]
    fn average_color_examples() {
        assert_eq!(average_color(&[[100.0, 150.0, 200.0]]), Some([100, 150, 200]));
        assert_eq!(average_color(&[[0.0; 3], [255.0; 3]]), Some([180, 180, 180]));
        assert_eq!(average_color(&[[7.0, 8.0, 9.0]; 5]), Some([7, 8, 9]));
        assert_eq!(average_color(&[]), None);
    }

    #[test]
    fn svd_normals_of_axis_planes() {
        let plane = |f: &dyn Fn(f64, f64) -> Vec3| -> Vec<Vec3> {
            (0..25).map(|k| f((k % 5) as f64, (k / 5) as f64 * 0.7)).collect()
        };
        let n = estimate_normal_svd(&plane(&|a, b| Vec3::new(a, b, 5.0))).unwrap();
        assert!((n - Vec3::z()).norm() < 1e-12);
        let n = estimate_normal_svd(&plane(&|a, b| Vec3::new(2.0, a, b))).unwrap();
        assert!((n - Vec3::x()).norm() < 1e-12);
        assert!(estimate_normal_svd(&[Vec3::zeros(), Vec3::x()]).is_none());
        let line: Vec<Vec3> = (0..10).map(|k| Vec3::new(k as f64, 0.0, 0.0)).collect();
        assert!(estimate_normal_svd(&line).is_none());
    }

    #[test]
    fn svd_noisy_slanted_plane_matches_scatter_eigenvector() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec3> = (0..400)
            .map(|_| {
                let x: f64 = rng.random_range(-5.0..5.0);
                let y: f64 = rng.random_range(-5.0..5.0);
                Vec3::new(x, y, x + rng.random_range(-0.05..0.05))
            })
            .collect();
        let n = estimate_normal_svd(&pts).unwrap();
        // oracle: smallest eigenvector of the 3x3 scatter matrix
        let mean = pts.iter().sum::<Vec3>() / pts.len() as f64;
        let scatter: Matrix3<f64> = pts.iter().map(|p| (p - mean) * (p - mean).transpose()).sum();
        let eig = scatter.symmetric_eigen();
        let imin = eig.eigenvalues.imin();
        let oracle = orient_normal(eig.eigenvectors.column(imin).into_owned());
        assert!((n - oracle).norm() < 1e-9);
        let truth = Vec3::new(-1.0, 0.0, 1.0).normalize();
        assert!(n.dot(&truth).acos() < 1f64.to_radians());
    }

    proptest! {
        #[test]
        fn svd_normal_follows_rotation(
            ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0,
            angle in 0.0f64..6.28, seed in 0u64..1000,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Vec3> = (0..30)
                .map(|_| Vec3::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-0.1..0.1),
                ))
                .collect();
            let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(Vec3::new(ax, ay, az)), angle);
            let rotated: Vec<Vec3> = pts.iter().map(|p| rot * p).collect();
            let n = estimate_normal_svd(&pts).unwrap();
            let nr = estimate_normal_svd(&rotated).unwrap();
            // equal up to the sign convention
            let expected = rot * n;
            prop_assert!((nr - expected).norm() < 1e-6 || (nr + expected).norm() < 1e-6);
        }
    }

    #[test]
    fn batches_give_identical_aggregates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<String> = (0..100_000)
            .map(|_| {
                let p: [f64; 3] = [rng.random_range(0.0..50.0), rng.random_range(0.0..20.0), rng.random_range(0.0..5.0)];
                let n = Vec3::new(rng.random(), rng.random(), 1.0).normalize();
                format!("{} {} {} {} {} {} {} {} {}", p[0], p[1], p[2], n.x, n.y, n.z,
                    rng.random_range(0..256), rng.random_range(0..256), rng.random_range(0..256))
            })
            .collect();
        let f = write_points(&rows);
        let mut opts = VoxelizeOptions::new(1.0);
        opts.normal_mode = NormalMode::Average;
        let one = voxelize_point_cloud(f.path(), &opts).unwrap();
        opts.max_points_per_batch = 10_000;
        let ten = voxelize_point_cloud(f.path(), &opts).unwrap();
        assert_eq!((one.batches, ten.batches), (1, 10));
        assert_eq!(one.voxels.len(), ten.voxels.len());
        for (a, b) in one.voxels.iter().zip(&ten.voxels) {
            assert_eq!(a.cell, b.cell);
            assert_eq!(a.point_count, b.point_count);
            assert_eq!(a.color, b.color);
            assert!((a.normal.unwrap() - b.normal.unwrap()).norm() < 1e-9);
        }
        assert_eq!(one.voxels.iter().map(|v| v.point_count).sum::<u64>(), 100_000);
    }
}
