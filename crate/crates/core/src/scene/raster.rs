//! Esri-style ASCII height grids. Pixel centres become mesh vertices; any
//! 2×2 block touching a no-data pixel leaves a hole.

use std::path::Path;
use std::sync::Arc;

use super::ScenePart;
use crate::error::{Result, VlsError};
use crate::raycast::{Material, Primitive, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct HeightGrid {
    pub ncols: usize,
    pub nrows: usize,
    /// Lower-left corner of the lower-left cell.
    pub xll: f64,
    pub yll: f64,
    pub cell_size: f64,
    pub nodata: Option<f64>,
    /// Row-major heights, first row is the northernmost.
    pub values: Vec<f64>,
}

impl HeightGrid {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let v = self.values[row * self.ncols + col];
        match self.nodata {
            Some(nd) if v == nd => None,
            _ if v.is_nan() => None,
            _ => Some(v),
        }
    }

    /// Pixel centre of (row, col) in world coordinates.
    pub fn centre(&self, row: usize, col: usize, z: f64) -> Vec3 {
        let x = self.xll + (col as f64 + 0.5) * self.cell_size;
        let y = self.yll + ((self.nrows - 1 - row) as f64 + 0.5) * self.cell_size;
        Vec3::new(x, y, z)
    }
}

pub fn parse_ascii_grid(path: &Path) -> Result<HeightGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| VlsError::io(path, e))?;
    let mut ncols = None;
    let mut nrows = None;
    let mut xll = None;
    let mut yll = None;
    let mut centre_ref = false;
    let mut cell_size = None;
    let mut nodata = None;
    let mut values = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let first = line.split_whitespace().next().unwrap_or_default();
        if first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) && values.is_empty() {
            let value = line
                .split_whitespace()
                .nth(1)
                .ok_or_else(|| VlsError::parse(path, line_no, format!("`{first}` needs a value")))?;
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|e| VlsError::parse(path, line_no, format!("`{first}`: {e}")))
            };
            match first.to_ascii_lowercase().as_str() {
                "ncols" => ncols = Some(num(value)? as usize),
                "nrows" => nrows = Some(num(value)? as usize),
                "xllcorner" => xll = Some(num(value)?),
                "yllcorner" => yll = Some(num(value)?),
                "xllcenter" => {
                    xll = Some(num(value)?);
                    centre_ref = true;
                }
                "yllcenter" => {
                    yll = Some(num(value)?);
                    centre_ref = true;
                }
                "cellsize" => cell_size = Some(num(value)?),
                "nodata_value" => nodata = Some(num(value)?),
                other => {
                    return Err(VlsError::parse(path, line_no, format!("unknown header key `{other}`")))
                }
            }
            continue;
        }
        for tok in line.split_whitespace() {
            values.push(
                tok.parse::<f64>()
                    .map_err(|e| VlsError::parse(path, line_no, format!("bad height `{tok}`: {e}")))?,
            );
        }
    }

    let missing = |k: &str| VlsError::parse(path, 0, format!("header lacks `{k}`"));
    let ncols = ncols.ok_or_else(|| missing("ncols"))?;
    let nrows = nrows.ok_or_else(|| missing("nrows"))?;
    let cell_size = cell_size.ok_or_else(|| missing("cellsize"))?;
    let mut xll = xll.ok_or_else(|| missing("xllcorner"))?;
    let mut yll = yll.ok_or_else(|| missing("yllcorner"))?;
    if !(cell_size > 0.0) {
        return Err(VlsError::parse(path, 0, "cellsize must be > 0"));
    }
    if centre_ref {
        xll -= cell_size / 2.0;
        yll -= cell_size / 2.0;
    }
    if values.len() != ncols * nrows {
        return Err(VlsError::parse(
            path,
            0,
            format!("expected {} heights, found {}", ncols * nrows, values.len()),
        ));
    }
    Ok(HeightGrid {
        ncols,
        nrows,
        xll,
        yll,
        cell_size,
        nodata,
        values,
    })
}

/// Triangulates the grid. The diagonal of each block runs from its
/// lower-left to its upper-right pixel centre.
pub fn raster_to_mesh(grid: &HeightGrid, material: Arc<Material>, part_id: u32, source: &Path) -> Result<ScenePart> {
    let mut primitives = Vec::new();
    for row in 0..grid.nrows.saturating_sub(1) {
        for col in 0..grid.ncols.saturating_sub(1) {
            // `row` is the upper row of the block
            let (Some(ul), Some(ur), Some(ll), Some(lr)) = (
                grid.get(row, col),
                grid.get(row, col + 1),
                grid.get(row + 1, col),
                grid.get(row + 1, col + 1),
            ) else {
                continue;
            };
            let ul = grid.centre(row, col, ul);
            let ur = grid.centre(row, col + 1, ur);
            let ll = grid.centre(row + 1, col, ll);
            let lr = grid.centre(row + 1, col + 1, lr);
            primitives.push(Primitive::triangle([ll, lr, ur], material.clone(), part_id));
            primitives.push(Primitive::triangle([ll, ur, ul], material.clone(), part_id));
        }
    }
    if primitives.is_empty() {
        return Err(VlsError::EmptyPart(format!(
            "{}: raster has no fully valid 2x2 block",
            source.display()
        )));
    }
    Ok(ScenePart::new(part_id, source, primitives))
}

/// Reads and triangulates an ASCII grid. Terrain is ground unless the
/// material says otherwise.
pub fn load_ascii_grid(path: &Path, material: Option<Material>, part_id: u32) -> Result<ScenePart> {
    let grid = parse_ascii_grid(path)?;
    let material = material.unwrap_or_else(|| Material {
        name: "terrain".into(),
        is_ground: true,
        classification: 2,
        ..Material::default()
    });
    raster_to_mesh(&grid, Arc::new(material), part_id, path)
}
