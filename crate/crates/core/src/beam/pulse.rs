//! Spatial and temporal pulse shape.

use std::f64::consts::PI;

/// Ratio between the scanner's nominal pulse length and the shape constant τ.
pub const PULSE_LENGTH_TO_TAU: f64 = 1.75;

/// 2D Gaussian power at radial distance `r` from the beam centre:
/// `I0 * exp(-2 r² / w²)`.
pub fn radial_intensity(peak_power: f64, r: f64, w: f64) -> f64 {
    peak_power * (-2.0 * r * r / (w * w)).exp()
}

/// Local beam radius at range `range` for waist radius `w0`, wavelength
/// `wavelength_m` and focusing range `focus_range` (all metres).
pub fn beam_width_at_range(w0: f64, wavelength_m: f64, range: f64, focus_range: f64) -> f64 {
    let k = wavelength_m / (PI * w0 * w0);
    let omega = k * range;
    let omega0 = k * focus_range;
    w0 * (omega0 * omega0 + omega * omega).sqrt()
}

/// τ (ns) for a nominal pulse length (ns).
pub fn tau_from_pulse_length(pulse_length_ns: f64) -> f64 {
    pulse_length_ns / PULSE_LENGTH_TO_TAU
}

/// Emitted power `I (t/τ)² exp(-t/τ)` at time `t` (ns) after pulse start.
/// Zero before the pulse starts.
pub fn pulse_power(intensity: f64, t: f64, tau: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = t / tau;
    intensity * x * x * (-x).exp()
}

/// Emission times (s, relative to leg start) of a pulse train.
pub fn schedule_pulses(pulse_freq: f64, leg_duration: f64) -> impl Iterator<Item = f64> {
    let count = if leg_duration > 0.0 && pulse_freq > 0.0 {
        (leg_duration * pulse_freq).floor() as u64
    } else {
        0
    };
    (0..count).map(move |k| k as f64 / pulse_freq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_profile_values() {
        assert_eq!(radial_intensity(3.0, 0.0, 0.2), 3.0);
        let at_w = radial_intensity(1.0, 0.2, 0.2);
        assert!((at_w - (-2.0f64).exp()).abs() < 1e-15);
        assert!((at_w - 0.13534).abs() < 1e-5);
        assert!((radial_intensity(1.0, 0.4, 0.2) - (-8.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn beam_width_special_ranges() {
        let (w0, lambda, r0) = (0.01, 1550e-9, 1000.0);
        let omega0 = lambda * r0 / (PI * w0 * w0);
        assert!((beam_width_at_range(w0, lambda, 0.0, r0) - w0 * omega0).abs() < 1e-18);
        let at_focus = beam_width_at_range(w0, lambda, r0, r0);
        assert!((at_focus - w0 * omega0 * 2f64.sqrt()).abs() < 1e-15);
        let omega = 1550e-9 * 2000.0 / (PI * 1e-4);
        let expected = 0.01 * (omega0 * omega0 + omega * omega).sqrt();
        assert!((beam_width_at_range(w0, lambda, 2000.0, r0) - expected).abs() < 1e-15);
    }

    #[test]
    fn pulse_shape_landmarks() {
        assert_eq!(pulse_power(1.0, 0.0, 2.0), 0.0);
        let tau = tau_from_pulse_length(3.5);
        assert!((tau - 2.0).abs() < 1e-15);
        let peak = pulse_power(1.0, 2.0 * tau, tau);
        assert!((peak - 4.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert!(pulse_power(1.0, 2.0 * tau - 0.01, tau) < peak);
        assert!(pulse_power(1.0, 2.0 * tau + 0.01, tau) < peak);
    }

    #[test]
    fn pulse_schedule() {
        let t: Vec<f64> = schedule_pulses(10.0, 1.0).collect();
        assert_eq!(t.len(), 10);
        assert!((t[9] - 0.9).abs() < 1e-15);
        assert_eq!(schedule_pulses(10.0, 0.0).count(), 0);
        let n = schedule_pulses(300_000.0, 2.0).count();
        assert_eq!(n, 600_000);
        let times: Vec<f64> = schedule_pulses(300_000.0, 2.0).collect();
        let max_err = times
            .windows(2)
            .map(|w| ((w[1] - w[0]) - 1.0 / 300_000.0).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 1e-12);
    }
}
