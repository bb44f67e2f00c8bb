use super::accumulate::{range_from_time_ns, WaveformRecord};

/// Default detection threshold relative to the waveform maximum.
pub const DEFAULT_MIN_POWER_FRACTION: f64 = 0.01;

/// One echo extracted from a waveform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoCandidate {
    /// Bin index of the local maximum.
    pub bin: usize,
    /// Centre of the peak bin (ns after emission).
    pub peak_time_ns: f64,
    /// Two-way travel time of the echo: peak time minus the pulse delay.
    pub time_ns: f64,
    pub range: f64,
    pub power: f64,
    pub echo_width_ns: Option<f64>,
    pub return_number: u32,
    pub total_returns: u32,
    pub source_primitive: Option<usize>,
}

/// Strict local maxima at or above `min_power_fraction` of the waveform
/// maximum, in time order. Neighbours outside the record count as zero.
pub fn detect_peaks(wf: &WaveformRecord, min_power_fraction: f64) -> Vec<EchoCandidate> {
    let bins = &wf.bins;
    let threshold = min_power_fraction * wf.max_power();
    let mut peaks = Vec::new();
    for (k, &v) in bins.iter().enumerate() {
        let prev = if k == 0 { 0.0 } else { bins[k - 1] };
        let next = bins.get(k + 1).copied().unwrap_or(0.0);
        if v > prev && v > next && v >= threshold && v > 0.0 {
            let peak_time = wf.bin_centre_ns(k);
            let time = peak_time - wf.pulse_delay_ns;
            peaks.push(EchoCandidate {
                bin: k,
                peak_time_ns: peak_time,
                time_ns: time,
                range: range_from_time_ns(time),
                power: v,
                echo_width_ns: None,
                return_number: 0,
                total_returns: 0,
                source_primitive: None,
            });
        }
    }
    number_returns(&mut peaks);
    peaks
}

/// Keeps the first `max_returns` echoes (0 keeps all) and renumbers.
pub fn truncate_returns(echoes: &mut Vec<EchoCandidate>, max_returns: usize) {
    if max_returns > 0 && echoes.len() > max_returns {
        echoes.truncate(max_returns);
    }
    number_returns(echoes);
}

fn number_returns(echoes: &mut [EchoCandidate]) {
    let total = echoes.len() as u32;
    for (i, e) in echoes.iter_mut().enumerate() {
        e.return_number = i as u32 + 1;
        e.total_returns = total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raycast::Vec3;
    use crate::waveform::accumulate::{accumulate_waveform, SubrayEcho, WaveformSettings};

    fn settings() -> WaveformSettings {
        WaveformSettings {
            bin_width_ns: 0.2,
            max_fullwave_range_ns: 100.0,
            tau_ns: 4.0 / 1.75,
        }
    }

    fn wave(ranges: &[f64]) -> WaveformRecord {
        let echoes: Vec<_> = ranges
            .iter()
            .map(|&range| SubrayEcho {
                range,
                intensity: 1.0,
                weight: 1.0,
                primitive: None,
            })
            .collect();
        accumulate_waveform(&echoes, &settings(), 3, Vec3::zeros(), -Vec3::z()).unwrap()
    }

    #[test]
    fn single_echo_single_peak_at_pulse_maximum() {
        let wf = wave(&[50.0]);
        let peaks = detect_peaks(&wf, DEFAULT_MIN_POWER_FRACTION);
        assert_eq!(peaks.len(), 1);
        let argmax = wf
            .bins
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(peaks[0].bin, argmax);
        assert!((peaks[0].range - 50.0).abs() <= 0.5 * 0.2 * 0.3);
        assert_eq!((peaks[0].return_number, peaks[0].total_returns), (1, 1));
    }

    #[test]
    fn separated_echoes_yield_two_returns() {
        // 12 m apart is 80 ns, far beyond the pulse length
        let wf = wave(&[50.0, 62.0]);
        let peaks = detect_peaks(&wf, DEFAULT_MIN_POWER_FRACTION);
        assert_eq!(peaks.len(), 2);
        assert_eq!(peaks[0].return_number, 1);
        assert_eq!(peaks[1].return_number, 2);
        assert!(peaks[0].time_ns < peaks[1].time_ns);
        for p in &peaks {
            assert!(wf.bins[p.bin] > wf.bins[p.bin - 1] && wf.bins[p.bin] > wf.bins[p.bin + 1]);
        }
    }

    #[test]
    fn flat_zero_waveform_has_no_peaks() {
        let wf = WaveformRecord {
            fullwave_index: 0,
            beam_origin: Vec3::zeros(),
            beam_direction: Vec3::z(),
            bin_width_ns: 1.0,
            min_time_ns: 0.0,
            pulse_delay_ns: 0.0,
            bins: vec![0.0; 50],
        };
        assert!(detect_peaks(&wf, DEFAULT_MIN_POWER_FRACTION).is_empty());
    }

    #[test]
    fn truncation_renumbers() {
        let wf = wave(&[20.0, 26.0, 32.0]);
        let mut peaks = detect_peaks(&wf, DEFAULT_MIN_POWER_FRACTION);
        assert_eq!(peaks.len(), 3);
        truncate_returns(&mut peaks, 2);
        assert_eq!(peaks.len(), 2);
        assert!(peaks.iter().all(|p| p.total_returns == 2));
    }
}
