//! Full-waveform synthesis from per-subray echoes.

use crate::raycast::Vec3;

/// Speed of light in m/ns.
pub const SPEED_OF_LIGHT_M_PER_NS: f64 = 0.299_792_458;

/// Pulse shape samples beyond this many τ are dropped (relative power < 1e-14).
const PULSE_SUPPORT_TAU: f64 = 45.0;

/// Two-way travel time (ns) to a target at `range` metres.
pub fn two_way_time_ns(range: f64) -> f64 {
    2.0 * range / SPEED_OF_LIGHT_M_PER_NS
}

/// Range (m) of a two-way travel time (ns).
pub fn range_from_time_ns(time_ns: f64) -> f64 {
    0.5 * time_ns * SPEED_OF_LIGHT_M_PER_NS
}

/// One subray's interaction with the scene.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubrayEcho {
    pub range: f64,
    pub intensity: f64,
    pub weight: f64,
    /// Index of the primitive that produced the echo, if known.
    pub primitive: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformSettings {
    pub bin_width_ns: f64,
    pub max_fullwave_range_ns: f64,
    pub tau_ns: f64,
}

impl WaveformSettings {
    pub fn bin_count(&self) -> usize {
        (self.max_fullwave_range_ns / self.bin_width_ns).floor().max(1.0) as usize
    }

    /// Delay between an echo's two-way time and the maximum of its pulse.
    pub fn pulse_delay_ns(&self) -> f64 {
        2.0 * self.tau_ns
    }
}

/// Received power of one pulse, binned on `[k Δ, (k + 1) Δ)` ns after emission.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformRecord {
    pub fullwave_index: u64,
    pub beam_origin: Vec3,
    pub beam_direction: Vec3,
    pub bin_width_ns: f64,
    /// Start time of the first stored bin.
    pub min_time_ns: f64,
    /// Time from an echo's two-way time to its pulse maximum.
    pub pulse_delay_ns: f64,
    pub bins: Vec<f64>,
}

impl WaveformRecord {
    pub fn bin_centre_ns(&self, bin: usize) -> f64 {
        self.min_time_ns + (bin as f64 + 0.5) * self.bin_width_ns
    }

    pub fn max_power(&self) -> f64 {
        self.bins.iter().copied().fold(0.0, f64::max)
    }
}

/// Sums the shifted pulse of every echo into `bins`, where `bins[0]` is
/// absolute bin `start_bin`.
pub fn accumulate_into(bins: &mut [f64], start_bin: i64, echoes: &[SubrayEcho], settings: &WaveformSettings) {
    let dt = settings.bin_width_ns;
    let tau = settings.tau_ns;
    let n = bins.len() as i64;
    for echo in echoes {
        let amplitude = echo.weight * echo.intensity;
        if amplitude == 0.0 {
            continue;
        }
        let shift = two_way_time_ns(echo.range);
        // First bin whose centre lies after the echo arrival.
        let mut first = ((shift / dt - 0.5).floor() as i64 + 1 - start_bin).max(0);
        while first > 0 && (start_bin + first - 1) as f64 * dt + 0.5 * dt - shift > 0.0 {
            first -= 1;
        }
        while first < n && (start_bin + first) as f64 * dt + 0.5 * dt - shift <= 0.0 {
            first += 1;
        }
        let last = (((shift + PULSE_SUPPORT_TAU * tau) / dt).ceil() as i64 - start_bin).min(n - 1);
        if first > last {
            continue;
        }
        let x0 = ((start_bin + first) as f64 * dt + 0.5 * dt - shift) / tau;
        let step = dt / tau;
        // exp(-x) over consecutive bins is a geometric sequence.
        let ratio = (-step).exp();
        let mut decay = (-x0).exp();
        for (i, b) in bins[first as usize..=last as usize].iter_mut().enumerate() {
            let x = x0 + i as f64 * step;
            *b += amplitude * x * x * decay;
            decay *= ratio;
        }
    }
}

/// Builds the waveform of one pulse. The window opens at the bin holding the
/// earliest echo and spans `max_fullwave_range_ns`; later contributions are
/// discarded. Returns `None` when there are no echoes.
pub fn accumulate_waveform(
    echoes: &[SubrayEcho],
    settings: &WaveformSettings,
    fullwave_index: u64,
    beam_origin: Vec3,
    beam_direction: Vec3,
) -> Option<WaveformRecord> {
    let first = echoes
        .iter()
        .map(|e| e.range)
        .min_by(|a, b| a.total_cmp(b))?;
    let start_bin = (two_way_time_ns(first) / settings.bin_width_ns).floor() as i64;
    let mut bins = vec![0.0; settings.bin_count()];
    accumulate_into(&mut bins, start_bin, echoes, settings);
    Some(WaveformRecord {
        fullwave_index,
        beam_origin,
        beam_direction,
        bin_width_ns: settings.bin_width_ns,
        min_time_ns: start_bin as f64 * settings.bin_width_ns,
        pulse_delay_ns: settings.pulse_delay_ns(),
        bins,
    })
}
