//! Per-frame energy model for sensor-node modulation schemes.

pub mod cli;
pub mod error;
pub mod linkbudget;
pub mod montecarlo;
pub mod quad;
pub mod report;
pub mod scenario;
pub mod schemes;
pub mod solver;
pub mod special;
pub mod units;

pub use error::{Error, Result};
