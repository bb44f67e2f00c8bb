//! Surveys: XML configuration, leg orchestration, pulse dispatch across
//! workers, output writers and a programmatic handle.

pub mod config;
pub mod handle;
pub mod output;
pub mod rng;
pub mod runtime;

use std::path::PathBuf;
use std::sync::Arc;

pub use config::{parse_survey, parse_survey_with_seed};
pub use handle::{HandleState, RunResult, SimulationHandle};
pub use output::{unzip, OutputPaths, OutputWriter};
pub use rng::{default_workers, stream_rng, SeedPolicy, StreamKind};
pub use runtime::{run_survey, run_survey_into, CollectingSink, PulseSink, RunOutput, RunReport};

use crate::beam::ScannerSpec;
use crate::error::{Result, VlsError};
use crate::platform::{Leg, PlatformSpec, PlatformState, DEFAULT_TICK_S};
use crate::raycast::Vec3;
use crate::scene::Scene;
use crate::waveform::DEFAULT_MIN_POWER_FRACTION;

/// Scanner settings of one leg. Unset values fall back to the scanner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScannerSettings {
    pub active: bool,
    pub pulse_freq_hz: Option<f64>,
    pub scan_freq_hz: Option<f64>,
    /// Half scan field, rad.
    pub scan_angle_max: Option<f64>,
    /// Head rotation speed about the mount's vertical axis, rad/s.
    pub head_rotate_per_sec: f64,
    pub head_rotate_start: f64,
    pub head_rotate_stop: Option<f64>,
    /// Dwell time of static legs, s.
    pub duration_s: Option<f64>,
}

impl Default for ScannerSettings {
    fn default() -> Self {
        ScannerSettings {
            active: true,
            pulse_freq_hz: None,
            scan_freq_hz: None,
            scan_angle_max: None,
            head_rotate_per_sec: 0.0,
            head_rotate_start: 0.0,
            head_rotate_stop: None,
            duration_s: None,
        }
    }
}

impl ScannerSettings {
    /// The scanner with this leg's overrides applied.
    pub fn apply(&self, base: &ScannerSpec) -> ScannerSpec {
        let mut s = base.clone();
        if let Some(f) = self.pulse_freq_hz {
            s.pulse_freq_hz = f;
        }
        if let Some(f) = self.scan_freq_hz {
            s.deflector.scan_freq = f;
        }
        if let Some(a) = self.scan_angle_max {
            s.deflector.scan_angle_max = a;
        }
        s
    }

    /// Head angle `t` seconds into the leg, held at the stop angle once reached.
    pub fn head_angle(&self, t: f64) -> f64 {
        let a = self.head_rotate_start + self.head_rotate_per_sec * t;
        match self.head_rotate_stop {
            Some(stop) if self.head_rotate_per_sec > 0.0 => a.min(stop),
            Some(stop) if self.head_rotate_per_sec < 0.0 => a.max(stop),
            _ => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurveyLeg {
    pub platform: Leg,
    pub scanner: ScannerSettings,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullwaveSettings {
    pub bin_width_ns: f64,
    pub max_fullwave_range_ns: f64,
    /// Overrides the scanner's subray quality when set.
    pub beam_sample_quality: Option<u32>,
    pub min_power_fraction: f64,
}

impl Default for FullwaveSettings {
    fn default() -> Self {
        FullwaveSettings {
            bin_width_ns: 0.25,
            max_fullwave_range_ns: 100.0,
            beam_sample_quality: None,
            min_power_fraction: DEFAULT_MIN_POWER_FRACTION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OutputFlags {
    pub las: bool,
    pub write_waveform: bool,
    pub calc_echo_width: bool,
    pub zip: bool,
}

#[derive(Debug, Clone)]
pub struct Survey {
    pub name: String,
    pub path: PathBuf,
    pub scanner: ScannerSpec,
    /// Every scanner defined in the scanner file, for exchanging.
    pub scanner_catalogue: Vec<ScannerSpec>,
    pub platform: PlatformSpec,
    pub scene: Arc<Scene>,
    pub legs: Vec<SurveyLeg>,
    pub seed: Option<String>,
    pub trajectory_interval_s: f64,
    pub fullwave: FullwaveSettings,
    pub tick_s: f64,
    pub outputs: OutputFlags,
}

impl Survey {
    pub fn new(name: impl Into<String>, scanner: ScannerSpec, platform: PlatformSpec, scene: Arc<Scene>) -> Survey {
        Survey {
            name: name.into(),
            path: PathBuf::new(),
            scanner_catalogue: vec![scanner.clone()],
            scanner,
            platform,
            scene,
            legs: Vec::new(),
            seed: None,
            trajectory_interval_s: 0.1,
            fullwave: FullwaveSettings::default(),
            tick_s: DEFAULT_TICK_S,
            outputs: OutputFlags::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(VlsError::Config(format!("survey `{}`: {m}", self.name)));
        if self.legs.is_empty() {
            return err("needs at least one leg".into());
        }
        if !(self.fullwave.bin_width_ns > 0.0) {
            return err(format!("binWidth_ns must be > 0, got {}", self.fullwave.bin_width_ns));
        }
        if !(self.fullwave.max_fullwave_range_ns >= self.fullwave.bin_width_ns) {
            return err("maxFullwaveRange_ns must be at least one bin".into());
        }
        if !(self.trajectory_interval_s > 0.0) {
            return err("trajectoryInterval_s must be > 0".into());
        }
        if !(self.tick_s > 0.0) {
            return err("kinematics tick must be > 0".into());
        }
        self.platform.validate()?;
        for (i, leg) in self.legs.iter().enumerate() {
            leg.scanner.apply(&self.effective_scanner()).validate().map_err(|e| {
                VlsError::Config(format!("survey `{}`, leg {i}: {e}", self.name))
            })?;
        }
        Ok(())
    }

    /// The scanner with survey-wide fullwave overrides applied.
    pub fn effective_scanner(&self) -> ScannerSpec {
        let mut s = self.scanner.clone();
        if let Some(q) = self.fullwave.beam_sample_quality {
            s.beam_sample_quality = q;
        }
        s
    }

    /// Scanner of leg `i` with all overrides applied.
    pub fn leg_scanner(&self, i: usize) -> ScannerSpec {
        self.legs[i].scanner.apply(&self.effective_scanner())
    }

    pub fn platform_legs(&self) -> Vec<Leg> {
        self.legs.iter().map(|l| l.platform).collect()
    }
}

/// One simulated return. Intensities are relative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub position: Vec3,
    pub intensity: f64,
    pub return_number: u32,
    pub total_returns: u32,
    /// Seconds since survey start.
    pub gps_time: f64,
    /// Index of the emitting pulse; shared by all its returns.
    pub fullwave_index: u64,
    pub part_id: u32,
    pub classification: u8,
    /// Fitted echo width (ns) when requested.
    pub echo_width_ns: Option<f64>,
}

impl MeasurementRecord {
    /// Values in ASCII column order.
    pub fn to_row(&self) -> [f64; 10] {
        [
            self.position.x,
            self.position.y,
            self.position.z,
            self.intensity,
            self.return_number as f64,
            self.total_returns as f64,
            self.gps_time,
            self.fullwave_index as f64,
            self.part_id as f64,
            self.classification as f64,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub time: f64,
    pub position: Vec3,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl From<&PlatformState> for TrajectoryRecord {
    fn from(s: &PlatformState) -> Self {
        TrajectoryRecord {
            time: s.time,
            position: s.position,
            roll: s.roll,
            pitch: s.pitch,
            yaw: s.yaw,
        }
    }
}

impl TrajectoryRecord {
    pub fn to_row(&self) -> [f64; 7] {
        [
            self.time,
            self.position.x,
            self.position.y,
            self.position.z,
            self.roll,
            self.pitch,
            self.yaw,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::scanner::tests::sample_scanner;

    #[test]
    fn leg_overrides_apply_over_scanner() {
        let base = sample_scanner();
        let s = ScannerSettings {
            pulse_freq_hz: Some(1234.0),
            ..ScannerSettings::default()
        };
        let eff = s.apply(&base);
        assert_eq!(eff.pulse_freq_hz, 1234.0);
        assert_eq!(eff.deflector, base.deflector);
        assert_eq!(ScannerSettings::default().apply(&base), base);
    }

    #[test]
    fn head_angle_stops() {
        let s = ScannerSettings {
            head_rotate_per_sec: 0.5,
            head_rotate_start: 0.1,
            head_rotate_stop: Some(1.0),
            ..ScannerSettings::default()
        };
        assert!((s.head_angle(1.0) - 0.6).abs() < 1e-15);
        assert_eq!(s.head_angle(10.0), 1.0);
        let back = ScannerSettings {
            head_rotate_per_sec: -1.0,
            head_rotate_stop: Some(-0.5),
            ..ScannerSettings::default()
        };
        assert_eq!(back.head_angle(3.0), -0.5);
    }
}
