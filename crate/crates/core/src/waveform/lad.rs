//! Leaf angle distribution look-up tables and the extinction coefficient of
//! transmissive vegetation voxels.
//!
//! A table row is `(horizontal, vertical, g_L)`: the horizontal and vertical
//! components of a unit direction and the hit probability density of leaf
//! orientations along it. Extinction integrates `g_L * |cos|` over the upper
//! hemisphere of leaf directions:
//!
//! ```text
//! sigma = PAD / (2 pi) * ∫ g_L(Ω_L) |Ω' · Ω_L| dΩ_L
//! ```
//!
//! The presets are axisymmetric, so the azimuthal part of the integral is
//! done in closed form and the remaining polar part with the trapezoidal rule
//! over the table's vertical-component samples.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Result, VlsError};
use crate::raycast::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadRow {
    pub horizontal: f64,
    pub vertical: f64,
    pub g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LadPreset {
    Planophile,
    Erectophile,
    Plagiophile,
    Extremophile,
    Spherical,
    Uniform,
}

impl LadPreset {
    pub const ALL: [LadPreset; 6] = [
        LadPreset::Planophile,
        LadPreset::Erectophile,
        LadPreset::Plagiophile,
        LadPreset::Extremophile,
        LadPreset::Spherical,
        LadPreset::Uniform,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LadPreset::Planophile => "planophile",
            LadPreset::Erectophile => "erectophile",
            LadPreset::Plagiophile => "plagiophile",
            LadPreset::Extremophile => "extremophile",
            LadPreset::Spherical => "spherical",
            LadPreset::Uniform => "uniform",
        }
    }

    fn table(self) -> &'static str {
        match self {
            LadPreset::Planophile => include_str!("../../data/lad/planophile.txt"),
            LadPreset::Erectophile => include_str!("../../data/lad/erectophile.txt"),
            LadPreset::Plagiophile => include_str!("../../data/lad/plagiophile.txt"),
            LadPreset::Extremophile => include_str!("../../data/lad/extremophile.txt"),
            LadPreset::Spherical => include_str!("../../data/lad/spherical.txt"),
            LadPreset::Uniform => include_str!("../../data/lad/uniform.txt"),
        }
    }
}

impl fmt::Display for LadPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LadPreset {
    type Err = VlsError;

    fn from_str(s: &str) -> Result<Self> {
        LadPreset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| VlsError::Config(format!("unknown leaf angle distribution `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadLut {
    name: String,
    rows: Vec<LadRow>,
}

impl LadLut {
    /// Validates and sorts the rows by vertical component.
    pub fn new(name: impl Into<String>, mut rows: Vec<LadRow>) -> Result<LadLut> {
        let name = name.into();
        if rows.is_empty() {
            return Err(VlsError::Config(format!("look-up table `{name}` is empty")));
        }
        for r in &rows {
            let unit = r.horizontal * r.horizontal + r.vertical * r.vertical;
            if !(0.0..=1.0).contains(&r.horizontal)
                || !(0.0..=1.0).contains(&r.vertical)
                || (unit - 1.0).abs() > 1e-5
            {
                return Err(VlsError::Config(format!(
                    "look-up table `{name}`: ({}, {}) is not a unit direction",
                    r.horizontal, r.vertical
                )));
            }
            if !(r.g > 0.0) {
                return Err(VlsError::Config(format!(
                    "look-up table `{name}`: hit probability must be > 0, got {}",
                    r.g
                )));
            }
        }
        rows.sort_by(|a, b| a.vertical.total_cmp(&b.vertical));
        Ok(LadLut { name, rows })
    }

    pub fn preset(preset: LadPreset) -> LadLut {
        LadLut::parse(preset.name(), preset.table(), Path::new(preset.name()))
            .expect("bundled look-up tables are valid")
    }

    pub fn from_file(path: &Path) -> Result<LadLut> {
        let text = std::fs::read_to_string(path).map_err(|e| VlsError::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        LadLut::parse(name, &text, path)
    }

    /// Parses whitespace-separated `horizontal vertical g_L` rows; `#` starts a comment line.
    pub fn parse(name: impl Into<String>, text: &str, path: &Path) -> Result<LadLut> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| VlsError::parse(path, i + 1, format!("bad number: {e}")))?;
            if vals.len() != 3 {
                return Err(VlsError::parse(path, i + 1, "expected 3 columns"));
            }
            rows.push(LadRow {
                horizontal: vals[0],
                vertical: vals[1],
                g: vals[2],
            });
        }
        LadLut::new(name, rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rows(&self) -> &[LadRow] {
        &self.rows
    }

    /// Linear interpolation of `g_L` in the vertical component, clamped at the ends.
    pub fn interpolate(&self, vertical: f64) -> f64 {
        let rows = &self.rows;
        let v = vertical.abs();
        if v <= rows[0].vertical {
            return rows[0].g;
        }
        let last = rows[rows.len() - 1];
        if v >= last.vertical {
            return last.g;
        }
        let k = rows.partition_point(|r| r.vertical <= v);
        let (a, b) = (rows[k - 1], rows[k]);
        let w = (v - a.vertical) / (b.vertical - a.vertical);
        a.g + w * (b.g - a.g)
    }

    /// Extinction per unit plant area density for a ray whose vertical
    /// direction cosine is `mu` (sign ignored).
    pub fn projection(&self, mu: f64) -> f64 {
        let mu = mu.abs().min(1.0);
        let rows = &self.rows;
        let f = |r: &LadRow| r.g * azimuthal_kernel(mu, r.vertical);
        let mut total = 0.0;
        // constant extension of the table to [0, 1]
        total += rows[0].vertical * f(&rows[0]);
        for pair in rows.windows(2) {
            total += 0.5 * (pair[1].vertical - pair[0].vertical) * (f(&pair[0]) + f(&pair[1]));
        }
        let last = &rows[rows.len() - 1];
        total += (1.0 - last.vertical) * f(last);
        total
    }
}

/// `(1 / 2π) ∫₀^{2π} |μ μ_L + sin θ sin θ_L cos φ| dφ` for direction cosines
/// `mu` and `mu_leaf` in [0, 1].
pub fn azimuthal_kernel(mu: f64, mu_leaf: f64) -> f64 {
    let a = mu * mu_leaf;
    let b = (1.0 - mu * mu).max(0.0).sqrt() * (1.0 - mu_leaf * mu_leaf).max(0.0).sqrt();
    if b <= a {
        return a;
    }
    let phi = (-a / b).acos();
    (a * (2.0 * phi - PI) + 2.0 * b * phi.sin()) / PI
}

/// Extinction coefficient σ (1/m) of a voxel with plant area density `pad`
/// (m²/m³) for a ray travelling along `direction`.
pub fn extinction_coefficient(pad: f64, lut: &LadLut, direction: &Vec3) -> f64 {
    if pad == 0.0 {
        return 0.0;
    }
    let mu = direction.z / direction.norm();
    pad * lut.projection(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erectophile_endpoints_are_stored_verbatim() {
        let lut = LadLut::preset(LadPreset::Erectophile);
        let first = lut.rows()[0];
        let last = *lut.rows().last().unwrap();
        assert_eq!((first.horizontal, first.vertical, first.g), (1.0, 0.0, 0.424413));
        assert_eq!((last.horizontal, last.vertical, last.g), (0.0, 1.0, 0.848822));
    }

    #[test]
    fn all_presets_load_and_are_sorted() {
        for p in LadPreset::ALL {
            let lut = LadLut::preset(p);
            assert!(lut.rows().windows(2).all(|w| w[0].vertical <= w[1].vertical));
            assert_eq!(p.name().parse::<LadPreset>().unwrap(), p);
        }
    }

    #[test]
    fn empty_table_is_config_error() {
        assert!(matches!(LadLut::new("x", vec![]), Err(VlsError::Config(_))));
    }

    #[test]
    fn non_unit_row_rejected() {
        let rows = vec![LadRow {
            horizontal: 0.5,
            vertical: 0.5,
            g: 1.0,
        }];
        assert!(LadLut::new("x", rows).is_err());
    }

    #[test]
    fn kernel_closed_form_matches_azimuth_sum() {
        for &(mu, ml) in &[(0.0, 0.0), (1.0, 0.3), (0.3, 0.8), (0.7, 0.2), (0.5, 0.5)] {
            let n = 200_000;
            let st = (1.0f64 - mu * mu).sqrt() * (1.0f64 - ml * ml).sqrt();
            let sum: f64 = (0..n)
                .map(|k| {
                    let phi = (k as f64 + 0.5) * 2.0 * PI / n as f64;
                    (mu * ml + st * phi.cos()).abs()
                })
                .sum::<f64>()
                / n as f64;
            assert!((azimuthal_kernel(mu, ml) - sum).abs() < 1e-8, "{mu} {ml}");
        }
    }

    #[test]
    fn unit_density_gives_half_projection() {
        let rows = (0..=90)
            .map(|d| {
                let e = (d as f64).to_radians();
                LadRow {
                    horizontal: e.cos(),
                    vertical: e.sin(),
                    g: 1.0,
                }
            })
            .collect();
        let lut = LadLut::new("flat", rows).unwrap();
        for mu in [0.0, 0.3, 0.9, 1.0] {
            assert!((lut.projection(mu) - 0.5).abs() < 2e-3);
        }
    }

    #[test]
    fn zero_pad_and_linearity() {
        let lut = LadLut::preset(LadPreset::Spherical);
        let d = Vec3::new(0.2, 0.1, -0.9);
        assert_eq!(extinction_coefficient(0.0, &lut, &d), 0.0);
        let s1 = extinction_coefficient(0.7, &lut, &d);
        let s2 = extinction_coefficient(1.4, &lut, &d);
        assert!((s2 - 2.0 * s1).abs() < 1e-15);
    }
}
