//! Received power models. Outputs are relative, not calibrated watts.

use std::f64::consts::PI;

use crate::error::{Result, VlsError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityModelParams {
    /// Product of atmospheric factor and scanner efficiency.
    pub lambda_factor: f64,
    /// Square of the receiver diameter (m²).
    pub receiver_diameter_sq: f64,
    /// Square of the beam divergence (rad²).
    pub beam_divergence_sq: f64,
}

impl IntensityModelParams {
    fn geometric_factor(&self, power: f64, distance: f64) -> Result<f64> {
        if !(distance > 0.0) {
            return Err(VlsError::Domain(format!(
                "received intensity needs a positive distance, got {distance}"
            )));
        }
        Ok(self.lambda_factor * power * self.receiver_diameter_sq
            / (4.0 * PI * distance.powi(4) * self.beam_divergence_sq))
    }
}

/// Return from vegetation with cross-section `sigma`:
/// `λ σ P α² / (4π d⁴ β²)`.
pub fn received_intensity_vegetation(
    power: f64,
    distance: f64,
    sigma: f64,
    params: &IntensityModelParams,
) -> Result<f64> {
    Ok(sigma * params.geometric_factor(power, distance)?)
}

/// Lambertian return from an opaque surface: the vegetation model with the
/// cross-section replaced by `reflectance * cos(incidence)`.
pub fn received_intensity_opaque(
    power: f64,
    distance: f64,
    reflectance: f64,
    incidence_angle: f64,
    params: &IntensityModelParams,
) -> Result<f64> {
    let cos = incidence_angle.cos().max(0.0);
    Ok(reflectance * cos * params.geometric_factor(power, distance)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const PARAMS: IntensityModelParams = IntensityModelParams {
        lambda_factor: 0.9,
        receiver_diameter_sq: 4e-4,
        beam_divergence_sq: 9e-8,
    };

    #[test]
    fn direct_evaluation() {
        let i = received_intensity_vegetation(1.0, 100.0, 0.1, &PARAMS).unwrap();
        let expected = 0.9 * 0.1 * 4e-4 / (4.0 * PI * 1e8 * 9e-8);
        assert!((i - expected).abs() / expected < 1e-14);
        assert!((i - 3.183e-7).abs() < 1e-10);
    }

    #[test]
    fn fourth_power_law_and_zero_sigma() {
        let a = received_intensity_vegetation(1.0, 50.0, 0.3, &PARAMS).unwrap();
        let b = received_intensity_vegetation(1.0, 100.0, 0.3, &PARAMS).unwrap();
        assert!((a / b - 16.0).abs() < 1e-12);
        assert_eq!(received_intensity_vegetation(1.0, 50.0, 0.0, &PARAMS).unwrap(), 0.0);
    }

    #[test]
    fn zero_distance_is_domain_error() {
        assert!(matches!(
            received_intensity_vegetation(1.0, 0.0, 0.1, &PARAMS),
            Err(VlsError::Domain(_))
        ));
        assert!(received_intensity_opaque(1.0, 0.0, 0.5, 0.0, &PARAMS).is_err());
    }

    #[test]
    fn opaque_model_reductions() {
        let grazing = received_intensity_opaque(1.0, 10.0, 1.0, FRAC_PI_2, &PARAMS).unwrap();
        let normal = received_intensity_opaque(1.0, 10.0, 1.0, 0.0, &PARAMS).unwrap();
        assert!(grazing.abs() < 1e-15 * normal);
        let veg = received_intensity_vegetation(1.0, 10.0, 1.0, &PARAMS).unwrap();
        assert_eq!(normal, veg);
        let half = received_intensity_opaque(1.0, 10.0, 0.5, 0.0, &PARAMS).unwrap();
        assert!((half * 2.0 - normal).abs() < 1e-15 * normal);
    }
}
