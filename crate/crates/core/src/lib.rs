//! Piecewise-constant-strain Cosserat rod dynamics and strain-space control.

pub mod certificates;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod kinematics;
pub mod rod;
pub mod se3;
pub mod sim;

pub use error::{Error, Result};
