//! Plant area density voxel files.
//!
//! ```text
//! min_corner: 0 0 0
//! max_corner: 10 10 5
//! split: 20 20 10
//! i j k PadBVTotal
//! 0 0 0 1.25
//! ```
//!
//! The column-name line is optional. Without it PAD is the fourth column;
//! with it the column named `PadBVTotal` or `pad` is used. Rows whose PAD is
//! zero or NaN are skipped.

use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use log::warn;
use rand::Rng;

use super::ScenePart;
use crate::error::{Result, VlsError};
use crate::raycast::{Material, Primitive, PrimitiveKind, Vec3, VoxelIncidence};
use crate::waveform::LadLut;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PadVoxelRecord {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    /// Plant area density, m²/m³.
    pub pad: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PadVoxelFile {
    pub min_corner: Vec3,
    pub max_corner: Vec3,
    pub split: [usize; 3],
    pub records: Vec<PadVoxelRecord>,
}

impl PadVoxelFile {
    pub fn cell_size(&self) -> Vec3 {
        Vec3::from_fn(|a, _| (self.max_corner[a] - self.min_corner[a]) / self.split[a] as f64)
    }

    pub fn centre(&self, r: &PadVoxelRecord) -> Vec3 {
        let size = self.cell_size();
        let idx = [r.i, r.j, r.k];
        Vec3::from_fn(|a, _| self.min_corner[a] + (idx[a] as f64 + 0.5) * size[a])
    }

    pub fn max_pad(&self) -> f64 {
        self.records.iter().map(|r| r.pad).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PadVoxelMode {
    Opaque,
    Scaled,
    #[default]
    Transmissive,
}

impl FromStr for PadVoxelMode {
    type Err = VlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "opaque" => Ok(PadVoxelMode::Opaque),
            "scaled" => Ok(PadVoxelMode::Scaled),
            "transmissive" | "detailed" => Ok(PadVoxelMode::Transmissive),
            other => Err(VlsError::Config(format!("unknown voxel mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PadVoxelOptions {
    pub mode: PadVoxelMode,
    pub alpha: f64,
    /// Reference density for scaling; the file maximum when unset.
    pub pad_max: Option<f64>,
    pub random_shift: bool,
    pub incidence: VoxelIncidence,
    pub lut: Arc<LadLut>,
}

/// Side of a scaled voxel: `a0 (PAD / PADmax)^alpha`.
pub fn scaled_side(a0: f64, pad: f64, pad_max: f64, alpha: f64) -> f64 {
    a0 * (pad / pad_max).powf(alpha)
}

fn triple<T: FromStr>(rest: &str, path: &Path, line: usize, key: &str) -> Result<[T; 3]> {
    let vals: Vec<T> = rest
        .split_whitespace()
        .map(|t| t.parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| VlsError::parse(path, line, format!("malformed `{key}` header")))?;
    vals.try_into()
        .map_err(|_| VlsError::parse(path, line, format!("`{key}` needs three values")))
}

pub fn parse_vox(path: &Path) -> Result<PadVoxelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| VlsError::io(path, e))?;
    let mut min_corner = None;
    let mut max_corner = None;
    let mut split = None;
    let mut pad_col = 3usize;
    let mut records = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some((key, rest)) = line.split_once(':') {
            match key.trim().to_ascii_lowercase().as_str() {
                "min_corner" => min_corner = Some(triple::<f64>(rest, path, line_no, "min_corner")?),
                "max_corner" => max_corner = Some(triple::<f64>(rest, path, line_no, "max_corner")?),
                "split" => split = Some(triple::<usize>(rest, path, line_no, "split")?),
                _ => {}
            }
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols[0].chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            pad_col = cols
                .iter()
                .position(|c| c.eq_ignore_ascii_case("padbvtotal") || c.eq_ignore_ascii_case("pad"))
                .ok_or_else(|| VlsError::parse(path, line_no, "column header lacks a PAD column"))?;
            continue;
        }
        if split.is_none() {
            return Err(VlsError::parse(path, line_no, "data row before the header"));
        }
        if cols.len() <= pad_col {
            return Err(VlsError::parse(path, line_no, "row lacks the PAD column"));
        }
        let index = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| VlsError::parse(path, line_no, format!("bad voxel index `{t}`")))
        };
        let pad: f64 = cols[pad_col]
            .parse()
            .map_err(|_| VlsError::parse(path, line_no, format!("bad PAD `{}`", cols[pad_col])))?;
        let rec = PadVoxelRecord {
            i: index(cols[0])?,
            j: index(cols[1])?,
            k: index(cols[2])?,
            pad,
        };
        let s = split.unwrap_or_default();
        if rec.i >= s[0] || rec.j >= s[1] || rec.k >= s[2] {
            return Err(VlsError::parse(path, line_no, "voxel index outside the grid"));
        }
        if pad.is_nan() || pad <= 0.0 {
            continue;
        }
        records.push(rec);
    }

    let missing = |k: &str| VlsError::parse(path, 0, format!("header lacks `{k}`"));
    let min_corner = min_corner.ok_or_else(|| missing("min_corner"))?;
    let max_corner = max_corner.ok_or_else(|| missing("max_corner"))?;
    let split = split.ok_or_else(|| missing("split"))?;
    let (min_corner, max_corner) = (Vec3::from(min_corner), Vec3::from(max_corner));
    if split.contains(&0) || (0..3).any(|a| max_corner[a] <= min_corner[a]) {
        return Err(VlsError::parse(path, 0, "grid header describes an empty volume"));
    }
    Ok(PadVoxelFile {
        min_corner,
        max_corner,
        split,
        records,
    })
}

/// Builds primitives for a parsed voxel file. `rng` drives the optional
/// random shift of scaled voxels.
pub fn pad_voxels_to_part<R: Rng + ?Sized>(
    file: &PadVoxelFile,
    options: &PadVoxelOptions,
    material: Arc<Material>,
    part_id: u32,
    source: &Path,
    rng: &mut R,
) -> Result<ScenePart> {
    if !(options.alpha >= 0.0) {
        return Err(VlsError::Config(format!("alpha must be >= 0, got {}", options.alpha)));
    }
    let size = file.cell_size();
    let a0 = size.min();
    if size.max() - a0 > 1e-6 * a0 {
        warn!(
            "{}: cells are not cubic ({:?}), using side {a0}",
            source.display(),
            size.as_slice()
        );
    }
    let pad_max = options.pad_max.unwrap_or_else(|| file.max_pad());
    if options.mode == PadVoxelMode::Scaled && !(pad_max > 0.0) {
        return Err(VlsError::Config("PADmax must be > 0".into()));
    }
    let mut clamped = 0usize;
    let mut primitives = Vec::with_capacity(file.records.len());
    for rec in &file.records {
        let centre = file.centre(rec);
        let kind = match options.mode {
            PadVoxelMode::Opaque => PrimitiveKind::Voxel {
                centre,
                half_size: a0 / 2.0,
                normal: None,
                incidence: options.incidence,
            },
            PadVoxelMode::Scaled => {
                let pad = if rec.pad > pad_max {
                    clamped += 1;
                    pad_max
                } else {
                    rec.pad
                };
                let shift = if options.random_shift {
                    let q = a0 / 4.0;
                    Vec3::from_fn(|_, _| rng.random_range(-q..q))
                } else {
                    Vec3::zeros()
                };
                PrimitiveKind::Voxel {
                    centre: centre + shift,
                    half_size: scaled_side(a0, pad, pad_max, options.alpha) / 2.0,
                    normal: None,
                    incidence: options.incidence,
                }
            }
            PadVoxelMode::Transmissive => PrimitiveKind::DetailedVoxel {
                centre,
                half_size: a0 / 2.0,
                pad: rec.pad,
                lut: options.lut.clone(),
            },
        };
        primitives.push(Primitive {
            kind,
            material: material.clone(),
            part_id,
        });
    }
    if clamped > 0 {
        warn!(
            "{}: {clamped} voxels exceed PADmax {pad_max} and were clamped",
            source.display()
        );
    }
    if primitives.is_empty() {
        return Err(VlsError::EmptyPart(format!(
            "{}: no voxel with positive PAD",
            source.display()
        )));
    }
    Ok(ScenePart::new(part_id, source, primitives))
}

pub fn load_pad_voxels<R: Rng + ?Sized>(
    path: &Path,
    options: &PadVoxelOptions,
    material: Arc<Material>,
    part_id: u32,
    rng: &mut R,
) -> Result<ScenePart> {
    let file = parse_vox(path)?;
    pad_voxels_to_part(&file, options, material, part_id, path, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::LadPreset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SAMPLE: &str = "# forest plot\nmin_corner: 0 0 0\nmax_corner: 2 2 1\nsplit: 4 4 2\n\
i j k PadBVTotal angleMean\n0 0 0 2.0 40\n1 0 0 0 40\n3 3 1 0.5 40\n2 1 0 NaN 40\n";

    fn options(mode: PadVoxelMode) -> PadVoxelOptions {
        PadVoxelOptions {
            mode,
            alpha: 0.5,
            pad_max: None,
            random_shift: false,
            incidence: VoxelIncidence::Face,
            lut: Arc::new(LadLut::preset(LadPreset::Spherical)),
        }
    }

    fn half_sizes(part: &ScenePart) -> Vec<f64> {
        part.primitives
            .iter()
            .map(|p| match &p.kind {
                PrimitiveKind::Voxel { half_size, .. } | PrimitiveKind::DetailedVoxel { half_size, .. } => *half_size,
                _ => unreachable!(),
            })
            .collect()
    }

    fn load(text: &str, opts: &PadVoxelOptions) -> Result<ScenePart> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.vox");
        std::fs::write(&p, text).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        load_pad_voxels(&p, opts, Arc::new(Material::default()), 0, &mut rng)
    }

    #[test]
    fn scaled_side_examples() {
        assert_eq!(scaled_side(0.5, 3.0, 3.0, 0.7), 0.5);
        assert_eq!(scaled_side(0.5, 0.1, 3.0, 0.0), 0.5);
        assert!((scaled_side(0.5, 0.25, 1.0, 0.5) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn parses_header_and_skips_empty_cells() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.vox");
        std::fs::write(&p, SAMPLE).unwrap();
        let f = parse_vox(&p).unwrap();
        assert_eq!(f.split, [4, 4, 2]);
        assert_eq!(f.records.len(), 2);
        assert_eq!(f.centre(&f.records[1]), Vec3::new(1.75, 1.75, 0.75));
    }

    #[test]
    fn modes_produce_expected_primitives() {
        let opaque = load(SAMPLE, &options(PadVoxelMode::Opaque)).unwrap();
        assert_eq!(half_sizes(&opaque), vec![0.25, 0.25]);
        let scaled = load(SAMPLE, &options(PadVoxelMode::Scaled)).unwrap();
        // PADmax = 2: 0.5·(0.5/2)^0.5 = 0.25
        assert_eq!(half_sizes(&scaled), vec![0.25, 0.125]);
        let tr = load(SAMPLE, &options(PadVoxelMode::Transmissive)).unwrap();
        assert!(tr.primitives.iter().all(|p| p.is_transmissive()));
    }

    #[test]
    fn scaled_clamps_above_pad_max() {
        let mut o = options(PadVoxelMode::Scaled);
        o.pad_max = Some(1.0);
        let part = load(SAMPLE, &o).unwrap();
        assert_eq!(half_sizes(&part)[0], 0.25);
    }

    #[test]
    fn random_shift_is_bounded_and_seeded() {
        let mut o = options(PadVoxelMode::Scaled);
        o.random_shift = true;
        let a = load(SAMPLE, &o).unwrap();
        let b = load(SAMPLE, &o).unwrap();
        for (pa, pb) in a.primitives.iter().zip(&b.primitives) {
            assert_eq!(pa.centroid(), pb.centroid());
        }
        let c = a.primitives[0].centroid() - Vec3::new(0.25, 0.25, 0.25);
        assert!(c.amax() < 0.125);
    }

    #[test]
    fn malformed_header_is_a_parse_error() {
        let bad = "min_corner: 0 0\nmax_corner: 1 1 1\nsplit: 1 1 1\n0 0 0 1\n";
        match load(bad, &options(PadVoxelMode::Opaque)) {
            Err(VlsError::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        let missing = "min_corner: 0 0 0\nmax_corner: 1 1 1\n";
        assert!(matches!(load(missing, &options(PadVoxelMode::Opaque)), Err(VlsError::Parse { .. })));
    }
}
