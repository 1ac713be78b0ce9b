use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs of the computational-efficiency metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CeInput {
    pub data_mb: f64,
    pub cores: f64,
    pub minutes: f64,
}

impl CeInput {
    pub fn new(data_mb: f64, cores: f64, minutes: f64) -> Self {
        Self {
            data_mb,
            cores,
            minutes,
        }
    }
}

/// Megabytes processed per core per minute.
pub fn compute_ce(input: CeInput) -> Result<f64> {
    for (name, v) in [
        ("data size", input.data_mb),
        ("core count", input.cores),
        ("processing time", input.minutes),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(input.data_mb / (input.cores * input.minutes))
}
