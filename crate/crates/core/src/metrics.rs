//! DoF accounting and finite-SNR sum-rate slopes.

use nalgebra::{Cholesky, DMatrix};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{COVARIANCE_RIDGE, DECODE_TOL};
use crate::csit::{CsitPattern, Fraction, LambdaDistribution};
use crate::decoder::{combine, DecodeReport, EffectiveSystem, Identifiability, ReceiverSystem};
use crate::pipeline::{draw_realization, trial_rng};
use crate::scheme::{classify_case, ReceivedSignals, SchemeError, U_SYMBOLS, V_SYMBOLS};
use crate::{BLOCK_SLOTS, C64};

/// Sum-DoF with perfect CSIT.
pub const PERFECT_CSIT_DOF: Fraction = Fraction::new_raw(4, 3);
/// Sum-DoF with delayed CSIT.
pub const DELAYED_CSIT_DOF: Fraction = Fraction::new_raw(6, 5);
/// Sum-DoF without CSIT.
pub const NO_CSIT_DOF: Fraction = Fraction::new_raw(1, 1);
/// Five symbols in four slots.
pub const SCHEME_DOF: Fraction = Fraction::new_raw(5, 4);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofAccount {
    pub symbols_delivered: u32,
    pub slots_used: u32,
    pub dof: Fraction,
}

impl DofAccount {
    /// Panics if `slots_used == 0`.
    pub fn new(symbols_delivered: u32, slots_used: u32) -> Self {
        assert!(slots_used > 0, "a DoF account needs at least one slot");
        Self {
            symbols_delivered,
            slots_used,
            dof: Fraction::new(symbols_delivered as i64, slots_used as i64),
        }
    }

    /// Sum of several blocks' symbols over their total slots.
    pub fn total<'a>(accounts: impl IntoIterator<Item = &'a DofAccount>) -> Option<DofAccount> {
        let (s, t) = accounts
            .into_iter()
            .fold((0, 0), |(s, t), a| (s + a.symbols_delivered, t + a.slots_used));
        (t > 0).then(|| DofAccount::new(s, t))
    }
}

/// Symbols whose receiver solved below the decode tolerance, over the slots used.
pub fn dof_account(report: &DecodeReport, pattern: &CsitPattern) -> DofAccount {
    dof_account_with(report, pattern, DECODE_TOL)
}

pub fn dof_account_with(report: &DecodeReport, pattern: &CsitPattern, tol: f64) -> DofAccount {
    let mut symbols = 0;
    if report.residual_u < tol {
        symbols += U_SYMBOLS.len() as u32;
    }
    if report.residual_v < tol {
        symbols += V_SYMBOLS.len() as u32;
    }
    DofAccount::new(symbols, pattern.len() as u32)
}

/// Identifiable dimensions per slot, as measured by the rank oracle.
pub fn dof_from_ranks(id: &Identifiability, slots_used: usize) -> DofAccount {
    DofAccount::new((id.rank_u + id.rank_v) as u32, slots_used as u32)
}

/// Time-sharing mix of the perfect, delayed and no-CSIT sum-DoF values.
pub fn baseline_mix(dist: &LambdaDistribution) -> Fraction {
    dist.perfect() * PERFECT_CSIT_DOF + dist.delayed() * DELAYED_CSIT_DOF + dist.absent() * NO_CSIT_DOF
}

fn log2_det_hpd(m: &DMatrix<C64>) -> f64 {
    let chol = Cholesky::new(m.clone()).or_else(|| {
        let n = m.nrows();
        Cholesky::new(m + DMatrix::<C64>::identity(n, n).scale(COVARIANCE_RIDGE))
    });
    match chol {
        Some(c) => 2.0 * c.l_dirty().diagonal().iter().map(|d| d.re.log2()).sum::<f64>(),
        None => f64::NEG_INFINITY,
    }
}

fn receiver_rate(sys: &ReceiverSystem, snr: f64) -> f64 {
    let n = sys.k.nrows();
    let mut k = sys.k.clone();
    if Cholesky::new(k.clone()).is_none() {
        k += DMatrix::<C64>::identity(n, n).scale(COVARIANCE_RIDGE);
    }
    let signal = (&sys.a * sys.a.adjoint()).scale(snr);
    // det(I + S K⁻¹) = det(K + S) / det(K)
    (log2_det_hpd(&(&k + signal)) - log2_det_hpd(&k)).max(0.0)
}

/// Gaussian-input sum rate of both effective systems, in bits per channel use.
/// Each transmitter gets `power / 2`; covariances are taken as given.
pub fn sum_rate(system: &EffectiveSystem, power: f64) -> f64 {
    let snr = power / 2.0;
    (receiver_rate(&system.u, snr) + receiver_rate(&system.v, snr)) / BLOCK_SLOTS as f64
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// `points` powers `2^e` with `e` evenly spaced over `[min_exp, max_exp]`.
pub fn power_grid(min_exp: f64, max_exp: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![min_exp.exp2()],
        _ => (0..points)
            .map(|i| (min_exp + (max_exp - min_exp) * i as f64 / (points - 1) as f64).exp2())
            .collect(),
    }
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("at least two power points are required, got {0}")]
    TooFewPowers(usize),
    #[error("power values must be positive and increasing")]
    BadPowers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSweep {
    pub pattern: CsitPattern,
    pub seed: u64,
    pub trials: u64,
    pub powers: Vec<f64>,
    pub mean_rate: Vec<f64>,
    pub std_rate: Vec<f64>,
    /// Least-squares slope of mean rate against `log2(P)`.
    pub slope: f64,
    /// Channel redraws over all trials (precoder magnitude limit).
    pub resamples: u64,
}

impl RateSweep {
    pub fn log2_powers(&self) -> Vec<f64> {
        self.powers.iter().map(|p| p.log2()).collect()
    }

    /// Slope over the upper half of the grid.
    pub fn top_half_slope(&self) -> f64 {
        let k = self.powers.len() / 2;
        fit_slope(&self.log2_powers()[k..], &self.mean_rate[k..])
    }
}

/// Average sum rate at each power over `trials` channel draws (the same draws
/// at every power), with power scaled by the block's peak per-slot transmit
/// power so every `E|x_j(t)|²` stays within `P`.
pub fn rate_sweep(pattern: &CsitPattern, powers: &[f64], trials: u64, seed: u64) -> Result<RateSweep, MetricsError> {
    let case = classify_case(pattern)?;
    if trials == 0 {
        return Err(MetricsError::NoTrials);
    }
    if powers.len() < 2 {
        return Err(MetricsError::TooFewPowers(powers.len()));
    }
    if powers.iter().any(|&p| !(p > 0.0 && p.is_finite())) || powers.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MetricsError::BadPowers);
    }
    let zero = [[C64::new(0.0, 0.0); BLOCK_SLOTS]; 2];
    let per_trial: Vec<(Vec<f64>, u32)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let r = draw_realization(pattern, &case, &mut rng)?;
            let system = combine(&case, &r.channels, &ReceivedSignals::new(zero, 1.0));
            let scale = r.block.peak_slot_power();
            let rates = powers.iter().map(|&p| sum_rate(&system, p / scale)).collect();
            Ok((rates, r.resamples))
        })
        .collect::<Result<_, SchemeError>>()?;

    let n = trials as f64;
    let mut mean_rate = vec![0.0; powers.len()];
    let mut resamples = 0u64;
    for (rates, rs) in &per_trial {
        for (m, r) in mean_rate.iter_mut().zip(rates) {
            *m += r;
        }
        resamples += *rs as u64;
    }
    mean_rate.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; powers.len()];
    for (rates, _) in &per_trial {
        for ((v, r), m) in var.iter_mut().zip(rates).zip(&mean_rate) {
            *v += (r - m) * (r - m);
        }
    }
    let std_rate = var.iter().map(|v| (v / n).sqrt()).collect();
    let log_p: Vec<f64> = powers.iter().map(|p| p.log2()).collect();
    let slope = fit_slope(&log_p, &mean_rate);
    Ok(RateSweep {
        pattern: pattern.clone(),
        seed,
        trials,
        powers: powers.to_vec(),
        mean_rate,
        std_rate,
        slope,
        resamples,
    })
}
