//! Wavefront OBJ/MTL loading. Only geometry and the material attributes the
//! simulator uses are read; texture coordinates and smoothing groups are
//! ignored.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::warn;

use super::ScenePart;
use crate::error::{Result, VlsError};
use crate::raycast::{Material, Primitive, Vec3};

/// Triangles with an area at or below this (m²) are dropped.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// Parses the materials of an MTL file.
///
/// `Kd` red maps to reflectance and `Ks` red to specularity; the
/// `isGround` and `classification` extensions set the ground flag and class
/// code.
pub fn parse_mtl(path: &Path) -> Result<HashMap<String, Material>> {
    let text = std::fs::read_to_string(path).map_err(|e| VlsError::io(path, e))?;
    let mut materials = HashMap::new();
    let mut current: Option<Material> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let key = tokens.next().unwrap_or_default();
        let rest: Vec<&str> = tokens.collect();
        let number = |idx: usize| -> Result<f64> {
            rest.get(idx)
                .ok_or_else(|| VlsError::parse(path, i + 1, format!("`{key}` needs a value")))?
                .parse::<f64>()
                .map_err(|e| VlsError::parse(path, i + 1, format!("`{key}`: {e}")))
        };
        match key {
            "newmtl" => {
                if let Some(m) = current.take() {
                    materials.insert(m.name.clone(), m);
                }
                current = Some(Material {
                    name: rest.join(" "),
                    ..Material::default()
                });
            }
            _ => {
                let Some(m) = current.as_mut() else {
                    continue;
                };
                match key {
                    "Kd" => m.reflectance = number(0)?.clamp(0.0, 1.0),
                    "Ks" => m.specularity = number(0)?.clamp(0.0, 1.0),
                    "isGround" => {
                        m.is_ground = matches!(
                            rest.first().map(|s| s.to_ascii_lowercase()).as_deref(),
                            Some("true" | "1")
                        )
                    }
                    "classification" => {
                        m.classification = number(0)? as u8
                    }
                    _ => {}
                }
            }
        }
    }
    if let Some(m) = current.take() {
        materials.insert(m.name.clone(), m);
    }
    Ok(materials)
}

fn resolve_index(token: &str, vertex_count: usize, path: &Path, line: usize) -> Result<usize> {
    let first = token.split('/').next().unwrap_or_default();
    let idx: i64 = first
        .parse()
        .map_err(|_| VlsError::parse(path, line, format!("bad face index `{token}`")))?;
    let resolved = if idx > 0 {
        idx - 1
    } else if idx < 0 {
        vertex_count as i64 + idx
    } else {
        -1
    };
    if resolved < 0 || resolved as usize >= vertex_count {
        return Err(VlsError::parse(
            path,
            line,
            format!("face index {idx} out of range ({vertex_count} vertices)"),
        ));
    }
    Ok(resolved as usize)
}

/// Loads an OBJ file into a scene part. Polygons are fan-triangulated.
///
/// When `mtl_path` is `None` the file's own `mtllib` directive is used,
/// resolved relative to the OBJ file.
pub fn load_wavefront_obj(obj_path: &Path, mtl_path: Option<&Path>, part_id: u32) -> Result<ScenePart> {
    let text = std::fs::read_to_string(obj_path).map_err(|e| VlsError::io(obj_path, e))?;
    let base = obj_path.parent().map(Path::to_path_buf).unwrap_or_default();

    let mut materials: HashMap<String, Arc<Material>> = HashMap::new();
    let load_mtl = |p: &Path, materials: &mut HashMap<String, Arc<Material>>| match parse_mtl(p) {
        Ok(m) => materials.extend(m.into_iter().map(|(k, v)| (k, Arc::new(v)))),
        Err(e) => warn!("{}: material library not loaded ({e}); using defaults", obj_path.display()),
    };
    if let Some(p) = mtl_path {
        load_mtl(p, &mut materials);
    }

    let default = Arc::new(Material::default());
    let mut active = default.clone();
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut primitives = Vec::new();
    let mut degenerate = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let key = tokens.next().unwrap_or_default();
        match key {
            "v" => {
                let coords: Vec<f64> = tokens
                    .take(3)
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| VlsError::parse(obj_path, line_no, format!("bad vertex: {e}")))?;
                if coords.len() != 3 {
                    return Err(VlsError::parse(obj_path, line_no, "vertex needs 3 coordinates"));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            "vn" => {
                let ok = tokens.take(3).filter(|t| t.parse::<f64>().is_ok()).count() == 3;
                if !ok {
                    return Err(VlsError::parse(obj_path, line_no, "bad vertex normal"));
                }
            }
            "f" => {
                let idx: Vec<usize> = tokens
                    .map(|t| resolve_index(t, vertices.len(), obj_path, line_no))
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(VlsError::parse(obj_path, line_no, "face needs at least 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    let tri = [vertices[idx[0]], vertices[idx[k]], vertices[idx[k + 1]]];
                    let area = 0.5 * (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).norm();
                    if area <= MIN_TRIANGLE_AREA {
                        degenerate += 1;
                        continue;
                    }
                    primitives.push(Primitive::triangle(tri, active.clone(), part_id));
                }
            }
            "usemtl" => {
                let name: Vec<&str> = tokens.collect();
                let name = name.join(" ");
                active = materials.get(&name).cloned().unwrap_or_else(|| {
                    warn!("{}:{line_no}: unknown material `{name}`, using defaults", obj_path.display());
                    let m = Arc::new(Material {
                        name: name.clone(),
                        ..Material::default()
                    });
                    materials.insert(name.clone(), m.clone());
                    m
                });
            }
            "mtllib" if mtl_path.is_none() => {
                let name: Vec<&str> = tokens.collect();
                let p: PathBuf = base.join(name.join(" "));
                load_mtl(&p, &mut materials);
            }
            _ => {}
        }
    }
    if degenerate > 0 {
        warn!("{}: skipped {degenerate} degenerate triangles", obj_path.display());
    }
    if primitives.is_empty() {
        return Err(VlsError::EmptyPart(obj_path.display().to_string()));
    }
    Ok(ScenePart::new(part_id, obj_path, primitives))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raycast::PrimitiveKind;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn single_triangle() {
        let dir = tempfile::tempdir().unwrap();
        let obj = write(dir.path(), "t.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
        let part = load_wavefront_obj(&obj, None, 0).unwrap();
        assert_eq!(part.primitives.len(), 1);
        assert_eq!(part.primitives[0].material.reflectance, 0.5);
    }

    #[test]
    fn quad_is_fan_triangulated() {
        let dir = tempfile::tempdir().unwrap();
        let obj = write(
            dir.path(),
            "q.obj",
            "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/1 3/3/1 4/4/1\n",
        );
        let part = load_wavefront_obj(&obj, None, 0).unwrap();
        assert_eq!(part.primitives.len(), 2);
        let diag = |p: &Primitive| match &p.kind {
            PrimitiveKind::Triangle { vertices } => vertices.to_vec(),
            _ => unreachable!(),
        };
        let a = diag(&part.primitives[0]);
        let b = diag(&part.primitives[1]);
        // both share the 1-3 diagonal
        assert!(a.contains(&Vec3::zeros()) && b.contains(&Vec3::zeros()));
        assert!(a.contains(&Vec3::new(1.0, 1.0, 0.0)) && b.contains(&Vec3::new(1.0, 1.0, 0.0)));
    }

    #[test]
    fn usemtl_groups_resolve_materials() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "m.mtl",
            "newmtl ground\nKd 0.2 0.2 0.2\nisGround true\nclassification 2\n\nnewmtl roof\nKd 0.8 0.1 0.1\nKs 0.3 0.3 0.3\n",
        );
        let obj = write(
            dir.path(),
            "m.obj",
            "mtllib m.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nusemtl ground\nf 1 2 3\nusemtl roof\nf 1 2 4\n",
        );
        let part = load_wavefront_obj(&obj, None, 4).unwrap();
        let g = &part.primitives[0].material;
        let r = &part.primitives[1].material;
        assert_eq!((g.name.as_str(), g.reflectance, g.is_ground, g.classification), ("ground", 0.2, true, 2));
        assert_eq!((r.name.as_str(), r.reflectance, r.specularity, r.is_ground), ("roof", 0.8, 0.3, false));
        assert_eq!(part.primitives[1].part_id, 4);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let obj = write(dir.path(), "bad.obj", "v 0 0 0\nv 1 x 0\n");
        match load_wavefront_obj(&obj, None, 0) {
            Err(VlsError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let obj = write(dir.path(), "bad2.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\n\nf 1 2 9\n");
        match load_wavefront_obj(&obj, None, 0) {
            Err(VlsError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_mtl_falls_back_to_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let obj = write(
            dir.path(),
            "n.obj",
            "mtllib nope.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\nusemtl steel\nf -3 -2 -1\n",
        );
        let part = load_wavefront_obj(&obj, None, 0).unwrap();
        assert_eq!(part.primitives[0].material.reflectance, 0.5);
        assert_eq!(part.primitives[0].material.name, "steel");
    }
}
