//! LAS 1.0, point data format 1. The header is written as a placeholder and
//! completed once all points are known.

use std::fs::File;
use std::io::{BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{Result, VlsError};
use crate::raycast::Vec3;
use crate::survey::MeasurementRecord;

pub const LAS_SCALE: f64 = 1e-4;
pub const HEADER_SIZE: u16 = 227;
pub const RECORD_LENGTH: u16 = 28;
/// Two-byte point data start signature required by version 1.0.
const START_SIGNATURE: [u8; 2] = [0xDD, 0xCC];
const POINT_OFFSET: u32 = HEADER_SIZE as u32 + 2;

/// Header fields that depend on the point data.
#[derive(Debug, Clone, PartialEq)]
pub struct LasSummary {
    pub point_count: u32,
    pub by_return: [u32; 5],
    pub offset: Vec3,
    pub min: Vec3,
    pub max: Vec3,
}

fn fixed<const N: usize>(s: &str) -> [u8; N] {
    let mut b = [0u8; N];
    let n = s.len().min(N);
    b[..n].copy_from_slice(&s.as_bytes()[..n]);
    b
}

pub fn encode_header(s: &LasSummary) -> Vec<u8> {
    let mut h = Vec::with_capacity(HEADER_SIZE as usize);
    h.extend_from_slice(b"LASF");
    h.extend_from_slice(&0u32.to_le_bytes());
    h.extend_from_slice(&[0u8; 16]);
    h.extend_from_slice(&[1, 0]);
    h.extend_from_slice(&fixed::<32>("SIMULATION"));
    h.extend_from_slice(&fixed::<32>(concat!("vls ", env!("CARGO_PKG_VERSION"))));
    h.extend_from_slice(&0u16.to_le_bytes());
    h.extend_from_slice(&0u16.to_le_bytes());
    h.extend_from_slice(&HEADER_SIZE.to_le_bytes());
    h.extend_from_slice(&POINT_OFFSET.to_le_bytes());
    h.extend_from_slice(&0u32.to_le_bytes());
    h.push(1);
    h.extend_from_slice(&RECORD_LENGTH.to_le_bytes());
    h.extend_from_slice(&s.point_count.to_le_bytes());
    for n in s.by_return {
        h.extend_from_slice(&n.to_le_bytes());
    }
    for _ in 0..3 {
        h.extend_from_slice(&LAS_SCALE.to_le_bytes());
    }
    for v in s.offset.iter() {
        h.extend_from_slice(&v.to_le_bytes());
    }
    for axis in 0..3 {
        h.extend_from_slice(&s.max[axis].to_le_bytes());
        h.extend_from_slice(&s.min[axis].to_le_bytes());
    }
    debug_assert_eq!(h.len(), HEADER_SIZE as usize);
    h
}

/// Scaled integer of `v` relative to `offset`.
pub fn quantize(v: f64, offset: f64) -> Result<i32> {
    let q = ((v - offset) / LAS_SCALE).round();
    if !(q >= i32::MIN as f64 && q <= i32::MAX as f64) {
        return Err(VlsError::Las(format!(
            "coordinate {v} does not fit a 32-bit integer at scale {LAS_SCALE} with offset {offset}; \
             use a larger scale or split the output"
        )));
    }
    Ok(q as i32)
}

/// Writes all points at once. Offsets are the floor of the per-axis minimum
/// and intensities are scaled so the largest maps to 65535.
pub fn write_las(points: &[MeasurementRecord], path: &Path) -> Result<LasSummary> {
    let mut w = LasPointWriter::create(path)?;
    if let Some(p) = points.first() {
        let mut min = p.position;
        let mut max_intensity = 0.0f64;
        for q in points {
            min = min.inf(&q.position);
            max_intensity = max_intensity.max(q.intensity);
        }
        w.offset = Some(min.map(f64::floor));
        w.intensity_scale = Some(intensity_scale(max_intensity));
    }
    w.write_all(points)?;
    w.finish()
}

fn intensity_scale(max_intensity: f64) -> f64 {
    if max_intensity > 0.0 {
        65535.0 / max_intensity
    } else {
        0.0
    }
}

/// Streaming writer. Without a preset offset the floor of the first point is
/// used, and intensities are scaled by the first non-zero batch maximum.
pub struct LasPointWriter {
    out: BufWriter<File>,
    path: PathBuf,
    pub offset: Option<Vec3>,
    pub intensity_scale: Option<f64>,
    count: u64,
    by_return: [u32; 5],
    min: Vec3,
    max: Vec3,
}

impl LasPointWriter {
    pub fn create(path: &Path) -> Result<LasPointWriter> {
        let file = File::create(path).map_err(|e| VlsError::io(path, e))?;
        let mut out = BufWriter::new(file);
        let placeholder = LasSummary {
            point_count: 0,
            by_return: [0; 5],
            offset: Vec3::zeros(),
            min: Vec3::zeros(),
            max: Vec3::zeros(),
        };
        out.write_all(&encode_header(&placeholder))
            .and_then(|_| out.write_all(&START_SIGNATURE))
            .map_err(|e| VlsError::io(path, e))?;
        Ok(LasPointWriter {
            out,
            path: path.to_path_buf(),
            offset: None,
            intensity_scale: None,
            count: 0,
            by_return: [0; 5],
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        })
    }

    pub fn write_all(&mut self, points: &[MeasurementRecord]) -> Result<()> {
        if points.is_empty() {
            return Ok(());
        }
        let offset = *self.offset.get_or_insert_with(|| points[0].position.map(f64::floor));
        let scale = match self.intensity_scale {
            Some(s) if s > 0.0 => s,
            _ => {
                let s = intensity_scale(points.iter().map(|p| p.intensity).fold(0.0, f64::max));
                self.intensity_scale = Some(s);
                s
            }
        };
        for p in points {
            let mut rec = [0u8; RECORD_LENGTH as usize];
            let mut deq = Vec3::zeros();
            for axis in 0..3 {
                let q = quantize(p.position[axis], offset[axis])?;
                rec[axis * 4..axis * 4 + 4].copy_from_slice(&q.to_le_bytes());
                deq[axis] = q as f64 * LAS_SCALE + offset[axis];
            }
            let intensity = (p.intensity * scale).round().clamp(0.0, 65535.0) as u16;
            rec[12..14].copy_from_slice(&intensity.to_le_bytes());
            let ret = p.return_number.clamp(1, 7) as u8;
            let total = p.total_returns.clamp(1, 7) as u8;
            rec[14] = ret | (total << 3);
            rec[15] = p.classification & 0x1f;
            rec[20..28].copy_from_slice(&p.gps_time.to_le_bytes());
            self.out.write_all(&rec).map_err(|e| VlsError::io(&self.path, e))?;

            self.min = self.min.inf(&deq);
            self.max = self.max.sup(&deq);
            if (1..=5).contains(&ret) {
                self.by_return[ret as usize - 1] += 1;
            }
            self.count += 1;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<LasSummary> {
        let point_count = u32::try_from(self.count)
            .map_err(|_| VlsError::Las(format!("{} points exceed the LAS 1.0 limit", self.count)))?;
        let summary = if point_count == 0 {
            LasSummary {
                point_count,
                by_return: [0; 5],
                offset: Vec3::zeros(),
                min: Vec3::zeros(),
                max: Vec3::zeros(),
            }
        } else {
            LasSummary {
                point_count,
                by_return: self.by_return,
                offset: self.offset.unwrap_or_default(),
                min: self.min,
                max: self.max,
            }
        };
        let path = self.path.clone();
        let io = |e: std::io::Error| VlsError::io(&path, e);
        self.out.seek(SeekFrom::Start(0)).map_err(io)?;
        self.out.write_all(&encode_header(&summary)).map_err(io)?;
        self.out.flush().map_err(io)?;
        Ok(summary)
    }
}
