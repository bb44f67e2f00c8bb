//! Scanner and deflector models, subray sampling and pulse shape.

pub mod deflector;
pub mod pulse;
pub mod scanner;
pub mod subrays;

pub use deflector::{
    deflector_angle, scanner_frame_direction, DeflectorAngle, DeflectorKind, DeflectorSpec,
};
pub use pulse::{
    beam_width_at_range, pulse_power, radial_intensity, schedule_pulses, tau_from_pulse_length,
};
pub use scanner::ScannerSpec;
pub use subrays::{generate_subrays, subray_count, Subray, SubrayPattern};
