use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::combine::{EffectiveSystem, ReceiverSystem};
use crate::channel::Rx;
use crate::config::Tolerances;
use crate::scheme::{SymbolSet, SYMBOLS, U_SYMBOLS, V_SYMBOLS};
use crate::view::AuditSummary;
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("system at {receiver} is singular (condition number {condition:e})")]
    SingularSystem { receiver: Rx, condition: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub estimates: SymbolSet,
    /// `‖A·est − b‖ / ‖b‖` at the u-receiver (0 when `b = 0`).
    pub residual_u: f64,
    pub residual_v: f64,
    pub condition_u: f64,
    pub condition_v: f64,
    pub audit: AuditSummary,
    pub resamples: u32,
}

impl DecodeReport {
    /// Relative estimate errors `‖est − s‖ / ‖s‖` for (u-symbols, v-symbols).
    pub fn estimate_errors(&self, truth: &SymbolSet) -> (f64, f64) {
        let est = self.estimates.to_array();
        let s = truth.to_array();
        let rel = |idx: &[usize]| {
            let num: f64 = idx.iter().map(|&k| (est[k] - s[k]).norm_sqr()).sum::<f64>().sqrt();
            let den: f64 = idx.iter().map(|&k| s[k].norm_sqr()).sum::<f64>().sqrt();
            if den > 0.0 {
                num / den
            } else {
                num
            }
        };
        (rel(&U_SYMBOLS), rel(&V_SYMBOLS))
    }
}

/// 2-norm condition number via singular values; infinite when singular.
pub fn condition_number(a: &DMatrix<C64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn solve_receiver(sys: &ReceiverSystem, tol: &Tolerances) -> Result<(DVector<C64>, f64, f64), DecodeError> {
    let condition = condition_number(&sys.a);
    let singular = DecodeError::SingularSystem {
        receiver: sys.receiver,
        condition,
    };
    if !condition.is_finite() || condition > tol.max_condition {
        return Err(singular);
    }
    let x = sys.a.clone().lu().solve(&sys.b).ok_or(singular)?;
    let bn = sys.b.norm();
    let residual = if bn > 0.0 {
        (&sys.a * &x - &sys.b).norm() / bn
    } else {
        0.0
    };
    Ok((x, residual, condition))
}

/// Solve both receivers' systems with partial-pivoting LU.
pub fn solve(system: &EffectiveSystem) -> Result<DecodeReport, DecodeError> {
    solve_with(system, &Tolerances::default())
}

pub fn solve_with(system: &EffectiveSystem, tol: &Tolerances) -> Result<DecodeReport, DecodeError> {
    let (xu, residual_u, condition_u) = solve_receiver(&system.u, tol)?;
    let (xv, residual_v, condition_v) = solve_receiver(&system.v, tol)?;
    let mut est = [C64::new(0.0, 0.0); SYMBOLS];
    for (k, &idx) in system.u.desired.iter().enumerate() {
        est[idx] = xu[k];
    }
    for (k, &idx) in system.v.desired.iter().enumerate() {
        est[idx] = xv[k];
    }
    Ok(DecodeReport {
        estimates: SymbolSet::from_array(est),
        residual_u,
        residual_v,
        condition_u,
        condition_v,
        audit: AuditSummary::default(),
        resamples: 0,
    })
}
