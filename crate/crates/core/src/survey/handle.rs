//! Programmatic control of a loaded survey: parameter access by dotted path,
//! scanner exchange and runs with a periodic callback.
//!
//! Parameters use the units of the XML attributes:
//!
//! | path | meaning |
//! |------|---------|
//! | `scanner.pulseFreq` | Hz |
//! | `scanner.scanFreq` | Hz |
//! | `scanner.scanAngle` | half scan field, degrees |
//! | `scanner.beamDivergence` | rad |
//! | `scanner.accuracy` | range error std, m |
//! | `scanner.peakPower` | W |
//! | `scanner.pulseLength` | ns |
//! | `scanner.maxNOR` | returns per pulse, 0 = unlimited |
//! | `scanner.beamSampleQuality` | subray rings |
//! | `platform.positionNoise` | m |
//! | `platform.maxAccel` | m/s² |
//! | `fwf.binWidth`, `fwf.maxFullwaveRange` | ns |
//! | `survey.trajectoryInterval` | s |
//! | `leg.N.x`, `leg.N.y`, `leg.N.z` | waypoint, m |
//! | `leg.N.speed` | m/s |
//! | `leg.N.pulseFreq` | Hz, overrides the scanner |
//! | `leg.N.duration` | static dwell, s |
//! | `leg.N.active` | 0 or 1 |

use std::fmt::Display;
use std::path::Path;
use std::sync::{Mutex, MutexGuard};

use super::config::{parse_survey, parse_survey_with_seed};
use super::rng::{default_workers, SeedPolicy};
use super::runtime::{run_survey_into, CollectingSink, PulseSink, RunReport};
use super::{MeasurementRecord, Survey, TrajectoryRecord};
use crate::beam::{generate_subrays, SubrayPattern};
use crate::error::{Result, VlsError};
use crate::waveform::WaveformRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HandleState {
    Loaded,
    Running,
    Finished,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub points: Vec<MeasurementRecord>,
    pub waveforms: Vec<WaveformRecord>,
    pub trajectory: Vec<TrajectoryRecord>,
    pub report: RunReport,
}

impl RunResult {
    /// N×10 rows in ASCII column order.
    pub fn points_array(&self) -> Vec<[f64; 10]> {
        self.points.iter().map(MeasurementRecord::to_row).collect()
    }

    /// M×7 rows: time x y z roll pitch yaw.
    pub fn trajectory_array(&self) -> Vec<[f64; 7]> {
        self.trajectory.iter().map(TrajectoryRecord::to_row).collect()
    }
}

/// A loaded survey. Methods take `&self` so a callback may inspect the
/// handle while a run is in progress; mutation is refused until it ends.
pub struct SimulationHandle {
    survey: Mutex<Survey>,
    policy: Mutex<SeedPolicy>,
    state: Mutex<HandleState>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|p| p.into_inner())
}

impl SimulationHandle {
    pub fn open(path: &Path) -> Result<SimulationHandle> {
        Ok(SimulationHandle::from_survey(parse_survey(path)?))
    }

    /// Opens with a fixed seed used for the scene and for runs.
    pub fn open_with_seed(path: &Path, seed: &str) -> Result<SimulationHandle> {
        let h = SimulationHandle::from_survey(parse_survey_with_seed(path, Some(seed))?);
        h.set_seed_policy(SeedPolicy::new(Some(seed.into()), default_workers(), false))?;
        Ok(h)
    }

    pub fn from_survey(survey: Survey) -> SimulationHandle {
        let policy = SeedPolicy::new(survey.seed.clone(), default_workers(), false);
        SimulationHandle {
            survey: Mutex::new(survey),
            policy: Mutex::new(policy),
            state: Mutex::new(HandleState::Loaded),
        }
    }

    pub fn state(&self) -> HandleState {
        *lock(&self.state)
    }

    /// A copy of the current survey.
    pub fn survey(&self) -> Survey {
        lock(&self.survey).clone()
    }

    fn ensure_idle(&self, what: &str) -> Result<()> {
        match self.state() {
            HandleState::Running => Err(VlsError::State(format!("cannot {what} while the survey is running"))),
            _ => Ok(()),
        }
    }

    pub fn set_seed_policy(&self, policy: SeedPolicy) -> Result<()> {
        self.ensure_idle("change the seed")?;
        *lock(&self.policy) = policy;
        Ok(())
    }

    pub fn seed_policy(&self) -> SeedPolicy {
        lock(&self.policy).clone()
    }

    pub fn get_param(&self, path: &str) -> Result<f64> {
        let mut copy = self.survey();
        access(&mut copy, path, None)
    }

    /// Sets a parameter; the survey is left unchanged if the result is invalid.
    pub fn set_param(&self, path: &str, value: f64) -> Result<()> {
        self.ensure_idle("change parameters")?;
        let mut guard = lock(&self.survey);
        let mut copy = guard.clone();
        access(&mut copy, path, Some(value))?;
        copy.validate()?;
        *guard = copy;
        Ok(())
    }

    /// Replaces the scanner by the catalogue entry with this id or name.
    pub fn exchange_scanner(&self, name: &str) -> Result<()> {
        self.ensure_idle("exchange the scanner")?;
        let mut survey = lock(&self.survey);
        let found = survey
            .scanner_catalogue
            .iter()
            .find(|s| s.id == name || s.name == name)
            .cloned();
        match found {
            Some(s) => {
                survey.scanner = s;
                Ok(())
            }
            None => {
                let names: Vec<String> = survey
                    .scanner_catalogue
                    .iter()
                    .map(|s| format!("{} ({})", s.id, s.name))
                    .collect();
                Err(VlsError::Config(format!(
                    "unknown scanner `{name}`; available: {}",
                    names.join(", ")
                )))
            }
        }
    }

    /// Subray pattern of the current scanner.
    pub fn subray_pattern(&self) -> Result<SubrayPattern> {
        let s = lock(&self.survey).effective_scanner();
        generate_subrays(s.beam_sample_quality, s.beam_divergence_rad)
    }

    pub fn run(&self) -> Result<RunResult> {
        self.run_inner(&mut CollectingSink::new(false))
    }

    /// Runs and calls `callback` with the points of every `every_n` completed
    /// pulses. A trailing group of fewer pulses is not reported. An error
    /// from the callback aborts the run.
    pub fn run_with_callback<F, E>(&self, every_n: usize, callback: F) -> Result<RunResult>
    where
        F: FnMut(&[MeasurementRecord]) -> std::result::Result<(), E>,
        E: Display,
    {
        if every_n == 0 {
            return Err(VlsError::Config("callback interval must be at least one pulse".into()));
        }
        let mut sink = CallbackSink {
            inner: CollectingSink::new(false),
            every_n: every_n as u64,
            pulses: 0,
            batch: Vec::new(),
            callback,
        };
        self.run_inner(&mut sink)
    }

    fn run_inner<S: PulseSink + Collect>(&self, sink: &mut S) -> Result<RunResult> {
        {
            let mut state = lock(&self.state);
            if *state == HandleState::Running {
                return Err(VlsError::State("the survey is already running".into()));
            }
            *state = HandleState::Running;
        }
        let survey = self.survey();
        let policy = self.seed_policy();
        let outcome = run_survey_into(&survey, &policy, sink);
        *lock(&self.state) = if outcome.is_ok() {
            HandleState::Finished
        } else {
            HandleState::Loaded
        };
        let report = outcome?;
        let c = sink.collected();
        Ok(RunResult {
            points: std::mem::take(&mut c.points),
            waveforms: std::mem::take(&mut c.waveforms),
            trajectory: std::mem::take(&mut c.trajectory),
            report,
        })
    }
}

trait Collect {
    fn collected(&mut self) -> &mut CollectingSink;
}

impl Collect for CollectingSink {
    fn collected(&mut self) -> &mut CollectingSink {
        self
    }
}

struct CallbackSink<F> {
    inner: CollectingSink,
    every_n: u64,
    pulses: u64,
    batch: Vec<MeasurementRecord>,
    callback: F,
}

impl<F> Collect for CallbackSink<F> {
    fn collected(&mut self) -> &mut CollectingSink {
        &mut self.inner
    }
}

impl<F, E> PulseSink for CallbackSink<F>
where
    F: FnMut(&[MeasurementRecord]) -> std::result::Result<(), E>,
    E: Display,
{
    fn trajectory(&mut self, records: &[TrajectoryRecord]) -> Result<()> {
        self.inner.trajectory(records)
    }

    fn pulse(&mut self, index: u64, points: &[MeasurementRecord], waveform: Option<&WaveformRecord>) -> Result<()> {
        self.inner.pulse(index, points, waveform)?;
        self.batch.extend_from_slice(points);
        self.pulses += 1;
        if self.pulses % self.every_n == 0 {
            (self.callback)(&self.batch).map_err(|e| VlsError::Callback(e.to_string()))?;
            self.batch.clear();
        }
        Ok(())
    }
}

fn rw(slot: &mut f64, value: Option<f64>) -> f64 {
    if let Some(v) = value {
        *slot = v;
    }
    *slot
}

fn count(value: f64, path: &str) -> Result<u64> {
    if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
        Ok(value as u64)
    } else {
        Err(VlsError::Config(format!("`{path}` needs a non-negative integer, got {value}")))
    }
}

/// Reads, and with `value` set also writes, one parameter.
fn access(survey: &mut Survey, path: &str, value: Option<f64>) -> Result<f64> {
    let unknown = || VlsError::Config(format!("unknown parameter `{path}`"));
    let parts: Vec<&str> = path.split('.').collect();
    match parts.as_slice() {
        ["scanner", name] => {
            let s = &mut survey.scanner;
            match *name {
                "pulseFreq" => Ok(rw(&mut s.pulse_freq_hz, value)),
                "scanFreq" => Ok(rw(&mut s.deflector.scan_freq, value)),
                "scanAngle" => {
                    let mut deg = s.deflector.scan_angle_max.to_degrees();
                    rw(&mut deg, value);
                    if value.is_some() {
                        s.deflector.scan_angle_max = deg.to_radians();
                    }
                    Ok(deg)
                }
                "beamDivergence" => Ok(rw(&mut s.beam_divergence_rad, value)),
                "accuracy" => Ok(rw(&mut s.range_error_std_m, value)),
                "peakPower" => Ok(rw(&mut s.peak_power_w, value)),
                "pulseLength" => Ok(rw(&mut s.pulse_length_ns, value)),
                "maxNOR" => {
                    if let Some(v) = value {
                        s.max_returns = count(v, path)? as usize;
                    }
                    Ok(s.max_returns as f64)
                }
                "beamSampleQuality" => {
                    if let Some(v) = value {
                        survey.fullwave.beam_sample_quality = Some(count(v, path)? as u32);
                    }
                    Ok(survey.effective_scanner().beam_sample_quality as f64)
                }
                _ => Err(unknown()),
            }
        }
        ["platform", "positionNoise"] => Ok(rw(&mut survey.platform.position_noise_std, value)),
        ["platform", "maxAccel"] => Ok(rw(&mut survey.platform.max_accel, value)),
        ["fwf", "binWidth"] => Ok(rw(&mut survey.fullwave.bin_width_ns, value)),
        ["fwf", "maxFullwaveRange"] => Ok(rw(&mut survey.fullwave.max_fullwave_range_ns, value)),
        ["survey", "trajectoryInterval"] => Ok(rw(&mut survey.trajectory_interval_s, value)),
        ["leg", i, name] => {
            let i: usize = i.parse().map_err(|_| unknown())?;
            let n = survey.legs.len();
            let base_freq = survey.effective_scanner().pulse_freq_hz;
            let leg = survey
                .legs
                .get_mut(i)
                .ok_or_else(|| VlsError::Config(format!("`{path}`: survey has {n} legs")))?;
            match *name {
                "x" => Ok(rw(&mut leg.platform.waypoint.x, value)),
                "y" => Ok(rw(&mut leg.platform.waypoint.y, value)),
                "z" => Ok(rw(&mut leg.platform.waypoint.z, value)),
                "speed" => Ok(rw(&mut leg.platform.speed, value)),
                "pulseFreq" => {
                    if value.is_some() {
                        leg.scanner.pulse_freq_hz = value;
                    }
                    Ok(leg.scanner.pulse_freq_hz.unwrap_or(base_freq))
                }
                "duration" => {
                    if value.is_some() {
                        leg.platform.duration = value;
                        leg.scanner.duration_s = value;
                    }
                    leg.platform.duration.ok_or_else(|| VlsError::Config(format!("`{path}` is not set")))
                }
                "active" => {
                    if let Some(v) = value {
                        leg.scanner.active = v != 0.0;
                    }
                    Ok(leg.scanner.active as u8 as f64)
                }
                _ => Err(unknown()),
            }
        }
        _ => Err(unknown()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::config::tests::fixture;

    fn handle(leg: &str) -> (tempfile::TempDir, SimulationHandle) {
        let dir = tempfile::tempdir().unwrap();
        let path = fixture(dir.path(), r#"seed="7""#, leg);
        let h = SimulationHandle::open(&path).unwrap();
        (dir, h)
    }

    #[test]
    fn read_and_write_parameters() {
        let (_d, h) = handle(r#"duration_s="0.2""#);
        assert_eq!(h.get_param("scanner.pulseFreq").unwrap(), 1000.0);
        assert!((h.get_param("scanner.scanAngle").unwrap() - 10.0).abs() < 1e-12);
        h.set_param("scanner.pulseFreq", 2000.0).unwrap();
        assert_eq!(h.get_param("leg.0.pulseFreq").unwrap(), 2000.0);
        assert_eq!(h.get_param("leg.0.duration").unwrap(), 0.2);
        assert!(h.get_param("scanner.nope").is_err());
        assert!(h.get_param("leg.5.x").is_err());
        assert!(h.set_param("scanner.pulseFreq", -1.0).is_err());
        assert_eq!(h.get_param("scanner.pulseFreq").unwrap(), 2000.0);
    }

    #[test]
    fn doubling_pulse_frequency_doubles_points() {
        let (_d, h) = handle(r#"duration_s="0.2""#);
        let a = h.run().unwrap();
        h.set_param("scanner.pulseFreq", 2000.0).unwrap();
        let b = h.run().unwrap();
        assert_eq!(a.points.len(), 200);
        assert_eq!(b.points.len(), 400);
        assert_eq!(h.state(), HandleState::Finished);
    }

    #[test]
    fn callback_counting() {
        let (_d, h) = handle(r#"duration_s="1""#);
        let mut calls = 0;
        let mut seen = std::collections::HashSet::new();
        let r = h
            .run_with_callback(100, |batch| {
                calls += 1;
                for p in batch {
                    assert!(seen.insert(p.fullwave_index));
                }
                Ok::<(), String>(())
            })
            .unwrap();
        assert_eq!(r.report.pulses, 1000);
        assert_eq!(calls, 10);
        assert_eq!(r.points_array().len(), r.points.len());
        assert_eq!(r.trajectory_array()[0].len(), 7);
    }

    #[test]
    fn callback_error_aborts() {
        let (_d, h) = handle(r#"duration_s="1""#);
        let err = h.run_with_callback(10, |_| Err("boom")).unwrap_err();
        assert!(matches!(err, VlsError::Callback(ref m) if m == "boom"));
        assert_eq!(h.state(), HandleState::Loaded);
    }

    #[test]
    fn exchange_during_run_is_refused() {
        let (_d, h) = handle(r#"duration_s="0.1""#);
        let mut refused = false;
        h.run_with_callback(10, |_| {
            refused |= matches!(h.exchange_scanner("b"), Err(VlsError::State(_)));
            refused &= matches!(h.set_param("scanner.pulseFreq", 5.0), Err(VlsError::State(_)));
            assert_eq!(h.state(), HandleState::Running);
            Ok::<(), String>(())
        })
        .unwrap();
        assert!(refused);
    }

    #[test]
    fn exchange_scanner_halves_cone() {
        let (_d, h) = handle(r#"duration_s="0.1""#);
        let before = h.subray_pattern().unwrap();
        h.exchange_scanner("Beta").unwrap();
        let after = h.subray_pattern().unwrap();
        let outer = |p: &SubrayPattern| p.subrays.iter().map(|s| s.radial_angle).fold(0.0, f64::max);
        assert!((outer(&after) - outer(&before) / 2.0).abs() < 1e-15);
        let err = h.exchange_scanner("gamma").unwrap_err().to_string();
        assert!(err.contains("a (Alpha)") && err.contains("b (Beta)"), "{err}");
    }

    #[test]
    fn swap_and_back_is_identity() {
        let (_d, h) = handle(r#"duration_s="0.1""#);
        h.set_seed_policy(SeedPolicy::deterministic("3")).unwrap();
        let a = h.run().unwrap();
        h.exchange_scanner("b").unwrap();
        h.exchange_scanner("a").unwrap();
        let b = h.run().unwrap();
        assert_eq!(a.points_array(), b.points_array());
    }

    #[test]
    fn open_missing_file() {
        assert!(SimulationHandle::open(Path::new("/nonexistent.xml")).is_err());
    }
}
