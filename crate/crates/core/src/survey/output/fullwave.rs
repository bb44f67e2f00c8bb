//! One row per pulse with at least one hit:
//! `fullwaveIndex ox oy oz dx dy dz minTime_ns binWidth_ns bins...`.

use std::io::Write;
use std::path::{Path, PathBuf};

use super::ascii::format_sig9;
use crate::error::{Result, VlsError};
use crate::waveform::WaveformRecord;

pub struct WaveformWriter<W: Write> {
    out: W,
    path: PathBuf,
}

impl<W: Write> WaveformWriter<W> {
    pub fn new(out: W, path: &Path) -> Self {
        WaveformWriter {
            out,
            path: path.to_path_buf(),
        }
    }

    pub fn write(&mut self, wf: &WaveformRecord) -> Result<()> {
        write_row(&mut self.out, wf).map_err(|e| VlsError::io(&self.path, e))
    }

    pub fn into_inner(mut self) -> Result<W> {
        self.out.flush().map_err(|e| VlsError::io(&self.path, e))?;
        Ok(self.out)
    }
}

fn write_row<W: Write>(out: &mut W, wf: &WaveformRecord) -> std::io::Result<()> {
    write!(out, "{}", wf.fullwave_index)?;
    for v in wf.beam_origin.iter().chain(wf.beam_direction.iter()) {
        write!(out, " {}", format_sig9(*v))?;
    }
    write!(out, " {} {}", format_sig9(wf.min_time_ns), format_sig9(wf.bin_width_ns))?;
    for b in &wf.bins {
        write!(out, " {}", format_sig9(*b))?;
    }
    writeln!(out)
}

pub fn write_waveforms(waveforms: &[WaveformRecord], path: &Path, zip: bool) -> Result<()> {
    let mut w = WaveformWriter::new(super::TextSink::create(path, zip)?, path);
    for wf in waveforms {
        w.write(wf)?;
    }
    w.into_inner()?.finish().map_err(|e| VlsError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raycast::Vec3;

    #[test]
    fn row_layout() {
        let wf = WaveformRecord {
            fullwave_index: 9,
            beam_origin: Vec3::new(1.0, 2.0, 3.0),
            beam_direction: Vec3::new(0.0, 0.0, -1.0),
            bin_width_ns: 0.25,
            min_time_ns: 66.5,
            pulse_delay_ns: 4.0,
            bins: vec![0.0, 0.5, 0.25],
        };
        let mut buf = Vec::new();
        write_row(&mut buf, &wf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "9 1 2 3 0 0 -1 66.5 0.25 0 0.5 0.25\n");
    }
}
