//! Numerical workbench for bilinear restriction estimates of dispersive phases.

pub mod bilinear;
pub mod cli;
pub mod dirac;
pub mod error;
pub mod packets;
pub mod phases;
pub mod spectral;
pub mod util;
pub mod variation;

pub use error::{Error, Result};
