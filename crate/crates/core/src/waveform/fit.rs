//! Echo width: standard deviation of a Gaussian fitted around a waveform peak
//! by damped Gauss-Newton (Levenberg-Marquardt) least squares.

use nalgebra::{Matrix3, Vector3};

use super::accumulate::WaveformRecord;
use super::peaks::EchoCandidate;

pub const MAX_FIT_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoWidth {
    pub sigma_ns: f64,
    /// Set when the echo spans fewer than three bins; `sigma_ns` is then the
    /// standard deviation of a single bin.
    pub degenerate: bool,
}

/// Fits `A exp(-(t - μ)² / 2s²)` to the bins within `half_window_ns` of the
/// peak. Returns `None` if the fit does not converge.
pub fn fit_echo_width(
    wf: &WaveformRecord,
    peak: &EchoCandidate,
    half_window_ns: f64,
) -> Option<EchoWidth> {
    let centre = wf.bin_centre_ns(peak.bin);
    let scale = wf.bins[peak.bin];
    if !(scale > 0.0) {
        return None;
    }
    let samples: Vec<(f64, f64)> = wf
        .bins
        .iter()
        .enumerate()
        .map(|(k, v)| (wf.bin_centre_ns(k) - centre, v / scale))
        .filter(|(t, _)| t.abs() <= half_window_ns)
        .collect();
    let support = samples.iter().filter(|(_, y)| *y > 1e-9).count();
    if support < 3 {
        return Some(EchoWidth {
            sigma_ns: wf.bin_width_ns / 12f64.sqrt(),
            degenerate: true,
        });
    }

    let mass: f64 = samples.iter().map(|(_, y)| y.max(0.0)).sum();
    let mean: f64 = samples.iter().map(|(t, y)| t * y.max(0.0)).sum::<f64>() / mass;
    let var: f64 = samples
        .iter()
        .map(|(t, y)| (t - mean).powi(2) * y.max(0.0))
        .sum::<f64>()
        / mass;
    let mut p = Vector3::new(1.0, 0.0, var.sqrt().max(wf.bin_width_ns));
    let mut cost = residual_cost(&samples, &p);
    let mut damping = 1e-3;

    for _ in 0..MAX_FIT_ITERATIONS {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for &(t, y) in &samples {
            let (f, grad) = model(t, &p);
            jtj += grad * grad.transpose();
            jtr += grad * (y - f);
        }
        let mut accepted = false;
        while damping < 1e12 {
            let mut a = jtj;
            for i in 0..3 {
                a[(i, i)] += damping * jtj[(i, i)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                damping *= 10.0;
                continue;
            };
            let mut candidate = p + step;
            candidate[2] = candidate[2].abs();
            let c = residual_cost(&samples, &candidate);
            if c <= cost {
                let converged = step.norm() <= 1e-10 * (1.0 + p.norm()) || cost - c <= 1e-14 * cost.max(1e-300);
                p = candidate;
                cost = c;
                damping = (damping / 10.0).max(1e-12);
                accepted = true;
                if converged {
                    return finish(p[2]);
                }
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            // no descent direction left: stationary point
            return finish(p[2]);
        }
    }
    None
}

fn finish(sigma: f64) -> Option<EchoWidth> {
    (sigma.is_finite() && sigma > 0.0).then_some(EchoWidth {
        sigma_ns: sigma,
        degenerate: false,
    })
}

fn model(t: f64, p: &Vector3<f64>) -> (f64, Vector3<f64>) {
    let (a, mu, s) = (p[0], p[1], p[2]);
    let d = t - mu;
    let e = (-d * d / (2.0 * s * s)).exp();
    let f = a * e;
    (f, Vector3::new(e, f * d / (s * s), f * d * d / (s * s * s)))
}

fn residual_cost(samples: &[(f64, f64)], p: &Vector3<f64>) -> f64 {
    samples
        .iter()
        .map(|&(t, y)| {
            let r = y - model(t, p).0;
            r * r
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raycast::Vec3;
    use crate::waveform::accumulate::{accumulate_waveform, SubrayEcho, WaveformSettings};
    use crate::waveform::peaks::{detect_peaks, DEFAULT_MIN_POWER_FRACTION};

    fn record(bins: Vec<f64>, bin_width_ns: f64) -> WaveformRecord {
        WaveformRecord {
            fullwave_index: 0,
            beam_origin: Vec3::zeros(),
            beam_direction: Vec3::z(),
            bin_width_ns,
            min_time_ns: 0.0,
            pulse_delay_ns: 0.0,
            bins,
        }
    }

    #[test]
    fn recovers_synthetic_gaussian_width() {
        let dt = 0.25;
        let bins = (0..400)
            .map(|k| {
                let t = (k as f64 + 0.5) * dt;
                3e-7 * (-(t - 50.3f64).powi(2) / (2.0 * 2.0 * 2.0)).exp()
            })
            .collect();
        let wf = record(bins, dt);
        let peak = detect_peaks(&wf, DEFAULT_MIN_POWER_FRACTION)[0];
        let fit = fit_echo_width(&wf, &peak, 12.0).unwrap();
        assert!(!fit.degenerate);
        assert!((fit.sigma_ns - 2.0).abs() / 2.0 < 0.02, "{}", fit.sigma_ns);
    }

    #[test]
    fn single_bin_spike_is_degenerate() {
        let mut bins = vec![0.0; 50];
        bins[20] = 1.0;
        let wf = record(bins, 0.5);
        let peak = detect_peaks(&wf, DEFAULT_MIN_POWER_FRACTION)[0];
        let fit = fit_echo_width(&wf, &peak, 6.0).unwrap();
        assert!(fit.degenerate);
        assert!(fit.sigma_ns <= 0.5);
    }

    #[test]
    fn non_gaussian_pulse_fit_converges_without_moving_the_peak() {
        let settings = WaveformSettings {
            bin_width_ns: 0.25,
            max_fullwave_range_ns: 100.0,
            tau_ns: 4.0 / 1.75,
        };
        let echo = SubrayEcho {
            range: 40.0,
            intensity: 1.0,
            weight: 1.0,
            primitive: None,
        };
        let wf = accumulate_waveform(&[echo], &settings, 0, Vec3::zeros(), Vec3::z()).unwrap();
        let peak = detect_peaks(&wf, DEFAULT_MIN_POWER_FRACTION)[0];
        let before = peak;
        let fit = fit_echo_width(&wf, &peak, 12.0).unwrap();
        assert!(fit.sigma_ns > 0.0);
        assert_eq!(peak, before);
    }
}
