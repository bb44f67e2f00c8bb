//! Virtual laser scanning: ray casting against mesh and voxel scenes,
//! full-waveform echo simulation and survey execution.

pub mod beam;
pub mod error;
pub mod platform;
pub mod raycast;
pub mod scene;
pub mod survey;
pub mod waveform;

pub use error::{Result, VlsError};
