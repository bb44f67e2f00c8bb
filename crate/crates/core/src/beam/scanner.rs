use std::f64::consts::PI;

use super::deflector::DeflectorSpec;
use super::pulse::tau_from_pulse_length;
use crate::error::{Result, VlsError};
use crate::waveform::IntensityModelParams;

/// Static description of a laser scanner.
#[derive(Debug, Clone, PartialEq)]
pub struct ScannerSpec {
    pub id: String,
    pub name: String,
    pub pulse_freq_hz: f64,
    /// Half-angle beam divergence at the 1/e² points, rad.
    pub beam_divergence_rad: f64,
    pub wavelength_nm: f64,
    /// Beam waist radius w0 (m). Defaults to `λ / (π β)`.
    pub beam_waist_radius_m: Option<f64>,
    pub focusing_range_m: f64,
    pub pulse_length_ns: f64,
    /// Peak power I0 (W), relative scale of all intensities.
    pub peak_power_w: f64,
    /// Standard deviation of the ranging error (m).
    pub range_error_std_m: f64,
    pub receiver_diameter_m: f64,
    /// Product of atmospheric factor and scanner efficiency.
    pub atmospheric_efficiency: f64,
    /// Maximum returns per pulse; 0 means unlimited.
    pub max_returns: usize,
    pub beam_sample_quality: u32,
    pub deflector: DeflectorSpec,
}

impl ScannerSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pulseFreq_hz", self.pulse_freq_hz),
            ("beamDivergence_rad", self.beam_divergence_rad),
            ("wavelength_nm", self.wavelength_nm),
            ("focusingRange_m", self.focusing_range_m),
            ("pulseLength_ns", self.pulse_length_ns),
            ("peakPower_w", self.peak_power_w),
            ("receiverDiameter_m", self.receiver_diameter_m),
            ("atmosphericEfficiency", self.atmospheric_efficiency),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(VlsError::Config(format!(
                    "scanner `{}`: {name} must be > 0, got {v}",
                    self.id
                )));
            }
        }
        if let Some(w0) = self.beam_waist_radius_m {
            if !(w0 > 0.0) {
                return Err(VlsError::Config(format!(
                    "scanner `{}`: beamWaistRadius_m must be > 0",
                    self.id
                )));
            }
        }
        if !(self.range_error_std_m >= 0.0) {
            return Err(VlsError::Config(format!(
                "scanner `{}`: accuracy_m must be >= 0",
                self.id
            )));
        }
        if self.beam_sample_quality < 1 {
            return Err(VlsError::Config(format!(
                "scanner `{}`: beamSampleQuality must be >= 1",
                self.id
            )));
        }
        self.deflector.validate()
    }

    pub fn wavelength_m(&self) -> f64 {
        self.wavelength_nm * 1e-9
    }

    pub fn beam_waist_radius(&self) -> f64 {
        self.beam_waist_radius_m
            .unwrap_or_else(|| self.wavelength_m() / (PI * self.beam_divergence_rad))
    }

    pub fn tau_ns(&self) -> f64 {
        tau_from_pulse_length(self.pulse_length_ns)
    }

    pub fn intensity_params(&self) -> IntensityModelParams {
        IntensityModelParams {
            lambda_factor: self.atmospheric_efficiency,
            receiver_diameter_sq: self.receiver_diameter_m * self.receiver_diameter_m,
            beam_divergence_sq: self.beam_divergence_rad * self.beam_divergence_rad,
        }
    }
}
