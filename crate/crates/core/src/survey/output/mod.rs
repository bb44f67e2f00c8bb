//! Output files: ASCII points, LAS 1.0, waveforms and trajectory.

pub mod ascii;
pub mod fullwave;
pub mod las;
pub mod trajectory;

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

pub use ascii::{format_sig9, write_ascii, AsciiPointWriter};
pub use fullwave::{write_waveforms, WaveformWriter};
pub use las::{write_las, LasPointWriter, LAS_SCALE};
pub use trajectory::write_trajectory;

use super::runtime::PulseSink;
use super::{MeasurementRecord, OutputFlags, TrajectoryRecord};
use crate::error::{Result, VlsError};
use crate::waveform::WaveformRecord;

/// A buffered text sink, gzip-compressed on request.
pub(crate) enum TextSink {
    Plain(BufWriter<File>),
    Gzip(GzEncoder<BufWriter<File>>),
}

impl TextSink {
    pub(crate) fn create(path: &Path, zip: bool) -> Result<TextSink> {
        let file = BufWriter::new(File::create(path).map_err(|e| VlsError::io(path, e))?);
        Ok(if zip {
            TextSink::Gzip(GzEncoder::new(file, Compression::default()))
        } else {
            TextSink::Plain(file)
        })
    }

    pub(crate) fn finish(self) -> io::Result<()> {
        match self {
            TextSink::Plain(mut w) => w.flush(),
            TextSink::Gzip(g) => g.finish()?.flush(),
        }
    }
}

impl Write for TextSink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            TextSink::Plain(w) => w.write(buf),
            TextSink::Gzip(w) => w.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            TextSink::Plain(w) => w.flush(),
            TextSink::Gzip(w) => w.flush(),
        }
    }
}

/// Decompresses a gzip file written with `zipOutput`.
pub fn unzip(input: &Path, output: &Path) -> Result<u64> {
    let file = File::open(input).map_err(|e| VlsError::io(input, e))?;
    let mut decoder = GzDecoder::new(BufReader::new(file));
    let mut out = BufWriter::new(File::create(output).map_err(|e| VlsError::io(output, e))?);
    let n = io::copy(&mut decoder, &mut out).map_err(|e| VlsError::io(input, e))?;
    out.flush().map_err(|e| VlsError::io(output, e))?;
    Ok(n)
}

/// File names of one run under `<root>/<survey name>/`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub dir: PathBuf,
    pub points: PathBuf,
    pub las: Option<PathBuf>,
    pub waveform: Option<PathBuf>,
    pub trajectory: PathBuf,
}

impl OutputPaths {
    pub fn new(root: &Path, survey_name: &str, flags: &OutputFlags) -> OutputPaths {
        let dir = root.join(survey_name);
        let gz = if flags.zip { ".gz" } else { "" };
        OutputPaths {
            points: dir.join(format!("points.xyz{gz}")),
            las: flags.las.then(|| dir.join("points.las")),
            waveform: flags.write_waveform.then(|| dir.join(format!("fullwave.txt{gz}"))),
            trajectory: dir.join(format!("trajectory.txt{gz}")),
            dir,
        }
    }
}

/// Streams a run to the files named by `OutputPaths`.
pub struct OutputWriter {
    paths: OutputPaths,
    flags: OutputFlags,
    points: Option<AsciiPointWriter<TextSink>>,
    las: Option<LasPointWriter>,
    waveforms: Option<WaveformWriter<TextSink>>,
}

impl OutputWriter {
    pub fn create(root: &Path, survey_name: &str, flags: OutputFlags) -> Result<OutputWriter> {
        let paths = OutputPaths::new(root, survey_name, &flags);
        fs::create_dir_all(&paths.dir).map_err(|e| VlsError::io(&paths.dir, e))?;
        let points = AsciiPointWriter::new(
            TextSink::create(&paths.points, flags.zip)?,
            &paths.points,
            flags.calc_echo_width,
        )?;
        let las = paths.las.as_deref().map(LasPointWriter::create).transpose()?;
        let waveforms = match &paths.waveform {
            Some(p) => Some(WaveformWriter::new(TextSink::create(p, flags.zip)?, p)),
            None => None,
        };
        Ok(OutputWriter {
            paths,
            flags,
            points: Some(points),
            las,
            waveforms,
        })
    }

    pub fn paths(&self) -> &OutputPaths {
        &self.paths
    }

    /// Flushes every file and completes the LAS header.
    pub fn finish(mut self) -> Result<OutputPaths> {
        if let Some(w) = self.points.take() {
            w.into_inner()?.finish().map_err(|e| VlsError::io(&self.paths.points, e))?;
        }
        if let Some(w) = self.las.take() {
            w.finish()?;
        }
        if let (Some(w), Some(p)) = (self.waveforms.take(), &self.paths.waveform) {
            w.into_inner()?.finish().map_err(|e| VlsError::io(p, e))?;
        }
        Ok(self.paths)
    }
}

impl PulseSink for OutputWriter {
    fn trajectory(&mut self, records: &[TrajectoryRecord]) -> Result<()> {
        let path = &self.paths.trajectory;
        let mut sink = TextSink::create(path, self.flags.zip)?;
        write_trajectory(&mut sink, records).map_err(|e| VlsError::io(path, e))?;
        sink.finish().map_err(|e| VlsError::io(path, e))
    }

    fn pulse(&mut self, _index: u64, points: &[MeasurementRecord], waveform: Option<&WaveformRecord>) -> Result<()> {
        if let Some(w) = &mut self.points {
            w.write_all(points)?;
        }
        if let Some(w) = &mut self.las {
            w.write_all(points)?;
        }
        if let (Some(w), Some(wf)) = (&mut self.waveforms, waveform) {
            w.write(wf)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Read;

    #[test]
    fn gzip_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let gz = dir.path().join("a.txt.gz");
        let mut sink = TextSink::create(&gz, true).unwrap();
        sink.write_all(b"1 2 3\n").unwrap();
        sink.finish().unwrap();
        let out = dir.path().join("a.txt");
        assert_eq!(unzip(&gz, &out).unwrap(), 6);
        let mut s = String::new();
        File::open(&out).unwrap().read_to_string(&mut s).unwrap();
        assert_eq!(s, "1 2 3\n");
    }

    #[test]
    fn unzip_missing_file_names_path() {
        let err = unzip(Path::new("/nonexistent/x.gz"), Path::new("/tmp/y")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.gz"));
    }

    #[test]
    fn output_layout() {
        let flags = OutputFlags {
            las: true,
            zip: true,
            ..OutputFlags::default()
        };
        let p = OutputPaths::new(Path::new("out"), "tls", &flags);
        assert_eq!(p.points, Path::new("out/tls/points.xyz.gz"));
        assert_eq!(p.las.as_deref(), Some(Path::new("out/tls/points.las")));
        assert!(p.waveform.is_none());
    }
}
