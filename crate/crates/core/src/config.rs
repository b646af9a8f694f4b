//! Numeric thresholds shared by the decoder, the metrics and the tests.

use serde::{Deserialize, Serialize};

/// Relative residual / estimate error below which a receiver counts as decoded.
pub const DECODE_TOL: f64 = 1e-8;
/// Unintended-symbol coefficient, relative to the largest coefficient of the
/// same combined equation, below which interference counts as cancelled.
pub const CANCELLATION_TOL: f64 = 1e-10;
/// Condition number above which a system is reported singular.
pub const MAX_CONDITION: f64 = 1e12;
/// Rate path only: realizations with a precoder coefficient above this are redrawn.
pub const MAX_PRECODER_MAGNITUDE: f64 = 1e6;
/// Diagonal loading applied to a singular noise covariance in the rate path.
pub const COVARIANCE_RIDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub decode: f64,
    pub cancellation: f64,
    pub max_condition: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            decode: DECODE_TOL,
            cancellation: CANCELLATION_TOL,
            max_condition: MAX_CONDITION,
        }
    }
}
