//! Space-separated point rows:
//! `x y z intensity returnNumber totalReturns gpsTime fullwaveIndex partId classification [echoWidth]`.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Result, VlsError};
use crate::survey::MeasurementRecord;

pub const HEADER: &str =
    "# x y z intensity returnNumber totalReturns gpsTime fullwaveIndex partId classification";

/// Nine significant digits without trailing zeros; exponent form outside [1e-5, 1e9).
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..9).contains(&exp) {
        return format!("{v:.8e}");
    }
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub struct AsciiPointWriter<W: Write> {
    out: W,
    path: PathBuf,
    echo_width: bool,
}

impl<W: Write> AsciiPointWriter<W> {
    /// Writes the header line. With `echo_width` set an eleventh column holds
    /// the fitted echo width (ns), or `NaN` when unavailable.
    pub fn new(mut out: W, path: &Path, echo_width: bool) -> Result<Self> {
        let extra = if echo_width { " echoWidth" } else { "" };
        writeln!(out, "{HEADER}{extra}").map_err(|e| VlsError::io(path, e))?;
        Ok(AsciiPointWriter {
            out,
            path: path.to_path_buf(),
            echo_width,
        })
    }

    pub fn write_all(&mut self, points: &[MeasurementRecord]) -> Result<()> {
        for p in points {
            self.write_point(p).map_err(|e| VlsError::io(&self.path, e))?;
        }
        Ok(())
    }

    fn write_point(&mut self, p: &MeasurementRecord) -> std::io::Result<()> {
        write!(
            self.out,
            "{} {} {} {} {} {} {} {} {} {}",
            format_sig9(p.position.x),
            format_sig9(p.position.y),
            format_sig9(p.position.z),
            format_sig9(p.intensity),
            p.return_number,
            p.total_returns,
            format_sig9(p.gps_time),
            p.fullwave_index,
            p.part_id,
            p.classification
        )?;
        if self.echo_width {
            write!(self.out, " {}", format_sig9(p.echo_width_ns.unwrap_or(f64::NAN)))?;
        }
        writeln!(self.out)
    }

    pub fn into_inner(mut self) -> Result<W> {
        self.out.flush().map_err(|e| VlsError::io(&self.path, e))?;
        Ok(self.out)
    }
}

/// Writes `points` to `path`, gzip-compressed when `zip` is set.
pub fn write_ascii(points: &[MeasurementRecord], path: &Path, zip: bool, echo_width: bool) -> Result<()> {
    let sink = super::TextSink::create(path, zip)?;
    let mut w = AsciiPointWriter::new(sink, path, echo_width)?;
    w.write_all(points)?;
    w.into_inner()?.finish().map_err(|e| VlsError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raycast::Vec3;
    use proptest::prelude::*;

    fn point(x: f64) -> MeasurementRecord {
        MeasurementRecord {
            position: Vec3::new(x, -2.5, 1e-7),
            intensity: 3.25e-9,
            return_number: 1,
            total_returns: 2,
            gps_time: 0.125,
            fullwave_index: 77,
            part_id: 3,
            classification: 2,
            echo_width_ns: Some(1.5),
        }
    }

    #[test]
    fn sig9_examples() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(10.12345), "10.12345");
        assert_eq!(format_sig9(123456.789012), "123456.789");
        assert_eq!(format_sig9(-0.5), "-0.5");
        assert_eq!(format_sig9(3.25e-9), "3.25000000e-9");
        assert_eq!(format_sig9(2.0), "2");
    }

    proptest! {
        #[test]
        fn sig9_round_trips(v in -1e12f64..1e12) {
            let back: f64 = format_sig9(v).parse().unwrap();
            let tol = v.abs() * 5e-9 + 1e-300;
            prop_assert!((back - v).abs() <= tol, "{v} -> {}", format_sig9(v));
        }
    }

    #[test]
    fn empty_file_has_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.xyz");
        write_ascii(&[], &path, false, false).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with('#'));
    }

    #[test]
    fn one_point_has_ten_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.xyz");
        write_ascii(&[point(10.12345)], &path, false, false).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(' ').collect();
        assert_eq!(row.len(), 10);
        assert_eq!(row[7], "77");
        let vals: Vec<f64> = row.iter().map(|s| s.parse().unwrap()).collect();
        for (a, b) in vals.iter().zip(point(10.12345).to_row()) {
            assert!((a - b).abs() <= b.abs() * 5e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn echo_width_column() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.xyz");
        let mut q = point(1.0);
        q.echo_width_ns = None;
        write_ascii(&[point(1.0), q], &path, false, true).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(' ').collect()).collect();
        assert_eq!(rows[0].len(), 11);
        assert_eq!(rows[0][10], "1.5");
        assert_eq!(rows[1][10], "NaN");
    }
}
