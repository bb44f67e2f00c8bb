//! From subray hits to waveforms and echoes: vegetation extinction,
//! stochastic transmission, received power, binning, peak detection and
//! echo-width fitting.

pub mod accumulate;
pub mod fit;
pub mod intensity;
pub mod lad;
pub mod peaks;
pub mod transmission;

use rand::Rng;
use rand_distr::{Distribution, Normal};

pub use accumulate::{
    accumulate_into, accumulate_waveform, range_from_time_ns, two_way_time_ns, SubrayEcho,
    WaveformRecord, WaveformSettings, SPEED_OF_LIGHT_M_PER_NS,
};
pub use fit::{fit_echo_width, EchoWidth};
pub use intensity::{received_intensity_opaque, received_intensity_vegetation, IntensityModelParams};
pub use lad::{extinction_coefficient, LadLut, LadPreset, LadRow};
pub use peaks::{detect_peaks, truncate_returns, EchoCandidate, DEFAULT_MIN_POWER_FRACTION};
pub use transmission::{sample_transmissive_return, transmissive_distance};

/// Adds a zero-mean normal ranging error with standard deviation `sigma` (m).
pub fn apply_range_error<R: Rng + ?Sized>(range: f64, rng: &mut R, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return range;
    }
    let normal = Normal::new(0.0, sigma).expect("sigma is positive and finite");
    range + normal.sample(rng)
}
