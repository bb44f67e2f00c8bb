//! Pulse dispatch. Pulses of a leg are processed in chunks on a worker pool;
//! each pulse draws from its own random stream, and completed chunks are
//! handed to the sink in pulse order.

use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use log::{debug, info};
use nalgebra::Rotation3;
use rand::Rng;
use rayon::prelude::*;

use super::rng::{SeedPolicy, StreamKind};
use super::{MeasurementRecord, ScannerSettings, Survey, TrajectoryRecord};
use crate::beam::{
    beam_width_at_range, deflector_angle, generate_subrays, scanner_frame_direction, ScannerSpec,
    SubrayPattern,
};
use crate::error::{Result, VlsError};
use crate::platform::{apply_position_noise, simulate_trajectory, Trajectory};
use crate::raycast::{continue_ray, PrimitiveKind, Ray, Vec3, DEFAULT_CONTINUE_EPSILON};
use crate::scene::Scene;
use crate::waveform::{
    accumulate_waveform, apply_range_error, detect_peaks, fit_echo_width,
    received_intensity_opaque, received_intensity_vegetation, sample_transmissive_return,
    truncate_returns, IntensityModelParams, LadLut, SubrayEcho, WaveformRecord, WaveformSettings,
};

/// Pulses handed to the pool at once.
const CHUNK_PULSES: u64 = 4096;
/// Upper bound on voxel traversals of one subray.
const MAX_CONTINUATIONS: usize = 100_000;
/// Half-width of the echo-width fit window in pulse lengths.
const FIT_WINDOW_PULSE_LENGTHS: f64 = 3.0;

/// Receives the results of every emitted pulse in pulse order.
pub trait PulseSink {
    fn trajectory(&mut self, _records: &[TrajectoryRecord]) -> Result<()> {
        Ok(())
    }

    /// `waveform` is `None` when no subray hit anything.
    fn pulse(&mut self, index: u64, points: &[MeasurementRecord], waveform: Option<&WaveformRecord>) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub pulses: u64,
    pub points: u64,
    pub waveforms: u64,
    pub wall_time: Duration,
    pub workers: usize,
    pub seed: String,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub points: Vec<MeasurementRecord>,
    pub waveforms: Vec<WaveformRecord>,
    pub trajectory: Vec<TrajectoryRecord>,
    pub report: RunReport,
}

/// Keeps everything in memory. Waveforms are only kept on request.
#[derive(Debug, Default)]
pub struct CollectingSink {
    pub keep_waveforms: bool,
    pub points: Vec<MeasurementRecord>,
    pub waveforms: Vec<WaveformRecord>,
    pub trajectory: Vec<TrajectoryRecord>,
}

impl CollectingSink {
    pub fn new(keep_waveforms: bool) -> CollectingSink {
        CollectingSink {
            keep_waveforms,
            ..CollectingSink::default()
        }
    }
}

impl PulseSink for CollectingSink {
    fn trajectory(&mut self, records: &[TrajectoryRecord]) -> Result<()> {
        self.trajectory.extend_from_slice(records);
        Ok(())
    }

    fn pulse(&mut self, _index: u64, points: &[MeasurementRecord], waveform: Option<&WaveformRecord>) -> Result<()> {
        self.points.extend_from_slice(points);
        if let (true, Some(wf)) = (self.keep_waveforms, waveform) {
            self.waveforms.push(wf.clone());
        }
        Ok(())
    }
}

/// Runs the survey and collects all results in memory.
pub fn run_survey(survey: &Survey, policy: &SeedPolicy) -> Result<RunOutput> {
    let mut sink = CollectingSink::new(survey.outputs.write_waveform);
    let report = run_survey_into(survey, policy, &mut sink)?;
    Ok(RunOutput {
        points: sink.points,
        waveforms: sink.waveforms,
        trajectory: sink.trajectory,
        report,
    })
}

/// Per-leg constants shared by all pulses of the leg.
struct LegContext {
    scanner: ScannerSpec,
    settings: ScannerSettings,
    pattern: SubrayPattern,
    waveform: WaveformSettings,
    params: IntensityModelParams,
    waist: f64,
    wavelength_m: f64,
    leg_start: f64,
    min_power_fraction: f64,
    calc_echo_width: bool,
}

impl LegContext {
    fn new(survey: &Survey, leg: usize, leg_start: f64) -> Result<LegContext> {
        let scanner = survey.leg_scanner(leg);
        scanner.validate()?;
        let pattern = generate_subrays(scanner.beam_sample_quality, scanner.beam_divergence_rad)?;
        Ok(LegContext {
            waveform: WaveformSettings {
                bin_width_ns: survey.fullwave.bin_width_ns,
                max_fullwave_range_ns: survey.fullwave.max_fullwave_range_ns,
                tau_ns: scanner.tau_ns(),
            },
            params: scanner.intensity_params(),
            waist: scanner.beam_waist_radius(),
            wavelength_m: scanner.wavelength_m(),
            settings: survey.legs[leg].scanner,
            pattern,
            scanner,
            leg_start,
            min_power_fraction: survey.fullwave.min_power_fraction,
            calc_echo_width: survey.outputs.calc_echo_width,
        })
    }
}

#[derive(Debug, Default)]
struct PulseResult {
    points: Vec<MeasurementRecord>,
    waveform: Option<WaveformRecord>,
}

/// Simulates the platform trajectory and streams every pulse into `sink`.
pub fn run_survey_into(survey: &Survey, policy: &SeedPolicy, sink: &mut dyn PulseSink) -> Result<RunReport> {
    let started = Instant::now();
    survey.validate()?;
    let trajectory = simulate_trajectory(
        &survey.platform,
        &survey.platform_legs(),
        Some(&survey.scene),
        survey.tick_s,
    )?;
    let records: Vec<TrajectoryRecord> = trajectory
        .sample(survey.trajectory_interval_s)
        .iter()
        .map(TrajectoryRecord::from)
        .collect();
    sink.trajectory(&records)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(policy.workers)
        .build()
        .map_err(|e| VlsError::Simulation(format!("cannot start worker pool: {e}")))?;
    info!(
        "survey `{}`: {} legs, {} workers, seed `{}`",
        survey.name,
        survey.legs.len(),
        policy.workers,
        policy.master_seed
    );

    let mut report = RunReport {
        pulses: 0,
        points: 0,
        waveforms: 0,
        wall_time: Duration::ZERO,
        workers: policy.workers,
        seed: policy.master_seed.clone(),
    };
    let mut next_index = 0u64;
    for (i, span) in trajectory.legs.iter().enumerate() {
        if !survey.legs[i].scanner.active {
            continue;
        }
        let ctx = LegContext::new(survey, i, span.start_time)?;
        let freq = ctx.scanner.pulse_freq_hz;
        let count = (span.duration() * freq + 1e-9).floor().max(0.0) as u64;
        debug!("leg {i}: {count} pulses from t = {:.3} s", span.start_time);
        let mut k = 0;
        while k < count {
            let end = (k + CHUNK_PULSES).min(count);
            let base = next_index;
            let job = || {
                pool.install(|| {
                    (k..end)
                        .into_par_iter()
                        .map(|j| {
                            let t = span.start_time + j as f64 / freq;
                            simulate_pulse(survey, &ctx, &trajectory, policy, base + j, t)
                        })
                        .collect::<Vec<Result<PulseResult>>>()
                })
            };
            let results = panic::catch_unwind(AssertUnwindSafe(job)).map_err(|p| {
                let msg = p
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| p.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "unknown panic".into());
                VlsError::Simulation(format!("worker panicked in leg {i}: {msg}"))
            })?;
            for (j, r) in (k..end).zip(results) {
                let r = r?;
                report.pulses += 1;
                report.points += r.points.len() as u64;
                report.waveforms += r.waveform.is_some() as u64;
                sink.pulse(base + j, &r.points, r.waveform.as_ref())?;
            }
            k = end;
        }
        next_index += count;
    }
    report.wall_time = started.elapsed();
    info!(
        "survey `{}`: {} pulses, {} points in {:.2?}",
        survey.name, report.pulses, report.points, report.wall_time
    );
    Ok(report)
}

/// World-frame origin and central direction of the beam at time `t`.
fn beam_pose(survey: &Survey, ctx: &LegContext, trajectory: &Trajectory, t: f64, rng: &mut impl Rng) -> (Vec3, Vec3) {
    let state = apply_position_noise(&trajectory.state_at(t), rng, survey.platform.position_noise_std);
    let attitude = state.attitude();
    let mount = &survey.platform.mount;
    let head = Rotation3::from_axis_angle(&Vec3::z_axis(), ctx.settings.head_angle(t - ctx.leg_start));
    let angle = deflector_angle(&ctx.scanner.deflector, t);
    let local = scanner_frame_direction(ctx.scanner.deflector.kind, &angle);
    let direction = (attitude * head.matrix() * mount.rotation() * local).normalize();
    (state.position + attitude * mount.offset, direction)
}

fn simulate_pulse(
    survey: &Survey,
    ctx: &LegContext,
    trajectory: &Trajectory,
    policy: &SeedPolicy,
    index: u64,
    t: f64,
) -> Result<PulseResult> {
    let mut rng = policy.rng(StreamKind::Pulse, index);
    let (origin, direction) = beam_pose(survey, ctx, trajectory, t, &mut rng);

    let mut echoes = Vec::new();
    for (subray, dir) in ctx.pattern.subrays.iter().zip(ctx.pattern.directions(&direction)) {
        if let Some(mut echo) = trace_subray(&survey.scene, ctx, Ray::new(origin, dir), &mut rng)? {
            let r = echo.range * subray.radial_angle.tan();
            let w = beam_width_at_range(ctx.waist, ctx.wavelength_m, echo.range, ctx.scanner.focusing_range_m);
            echo.weight = if w > 0.0 && w.is_finite() {
                (-2.0 * r * r / (w * w)).exp()
            } else {
                subray.weight
            };
            echoes.push(echo);
        }
    }
    let Some(wf) = accumulate_waveform(&echoes, &ctx.waveform, index, origin, direction) else {
        return Ok(PulseResult::default());
    };

    let mut peaks = detect_peaks(&wf, ctx.min_power_fraction);
    truncate_returns(&mut peaks, ctx.scanner.max_returns);
    let tree = &survey.scene.tree;
    let mut points = Vec::with_capacity(peaks.len());
    for peak in &peaks {
        let source = echoes
            .iter()
            .min_by(|a, b| (a.range - peak.range).abs().total_cmp(&(b.range - peak.range).abs()))
            .and_then(|e| e.primitive)
            .map(|p| tree.primitive(p));
        let echo_width_ns = if ctx.calc_echo_width {
            fit_echo_width(&wf, peak, FIT_WINDOW_PULSE_LENGTHS * ctx.scanner.pulse_length_ns).map(|w| w.sigma_ns)
        } else {
            None
        };
        let range = apply_range_error(peak.range, &mut rng, ctx.scanner.range_error_std_m);
        points.push(MeasurementRecord {
            position: origin + direction * range,
            intensity: peak.power,
            return_number: peak.return_number,
            total_returns: peak.total_returns,
            gps_time: t,
            fullwave_index: index,
            part_id: source.map_or(0, |p| p.part_id),
            classification: source.map_or(0, |p| p.material.classification),
            echo_width_ns,
        });
    }
    Ok(PulseResult {
        points,
        waveform: Some(wf),
    })
}

/// Follows one subray through transmissive voxels until it returns from a
/// surface or voxel, or leaves the scene. The echo weight is left at 1.
fn trace_subray(scene: &Scene, ctx: &LegContext, mut ray: Ray, rng: &mut impl Rng) -> Result<Option<SubrayEcho>> {
    let tree = &scene.tree;
    let power = ctx.scanner.peak_power_w;
    let mut travelled = 0.0;
    let mut projection: Option<(*const LadLut, f64)> = None;
    for _ in 0..MAX_CONTINUATIONS {
        let Some(hit) = tree.nearest_hit(&ray) else {
            return Ok(None);
        };
        let prim = tree.primitive(hit.primitive);
        let t_in = hit.t_enter.max(0.0);
        match &prim.kind {
            PrimitiveKind::DetailedVoxel { pad, lut, .. } => {
                let t_out = hit.t_exit.unwrap_or(t_in);
                // The direction is fixed along the subray, so the projection
                // only changes with the LAD table.
                let g = match projection {
                    Some((table, g)) if std::ptr::eq(table, Arc::as_ptr(lut)) => g,
                    _ => {
                        let g = lut.projection(ray.direction.z / ray.direction.norm());
                        projection = Some((Arc::as_ptr(lut), g));
                        g
                    }
                };
                let sigma = if *pad == 0.0 { 0.0 } else { pad * g };
                if let Some(s) = sample_transmissive_return(sigma, t_out - t_in, rng) {
                    let range = travelled + t_in + s;
                    if range <= 0.0 {
                        return Ok(None);
                    }
                    let intensity = received_intensity_vegetation(power, range, sigma, &ctx.params)?;
                    return Ok(Some(echo(range, intensity, hit.primitive)));
                }
                travelled += t_out + DEFAULT_CONTINUE_EPSILON;
                ray = continue_ray(&ray, t_out, DEFAULT_CONTINUE_EPSILON);
            }
            _ => {
                let range = travelled + t_in;
                if range <= 0.0 {
                    return Ok(None);
                }
                let intensity = received_intensity_opaque(
                    power,
                    range,
                    prim.material.reflectance,
                    hit.incidence_angle,
                    &ctx.params,
                )?;
                return Ok(Some(echo(range, intensity, hit.primitive)));
            }
        }
    }
    Err(VlsError::Simulation(format!(
        "subray exceeded {MAX_CONTINUATIONS} voxel traversals"
    )))
}

fn echo(range: f64, intensity: f64, primitive: usize) -> SubrayEcho {
    SubrayEcho {
        range,
        intensity,
        weight: 1.0,
        primitive: Some(primitive),
    }
}
