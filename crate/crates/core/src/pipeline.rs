//! One seeded encode → transmit → combine → solve run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelRealization;
use crate::config::{Tolerances, MAX_PRECODER_MAGNITUDE};
use crate::csit::CsitPattern;
use crate::decoder::{combine, solve_with, DecodeError, DecodeReport, EffectiveSystem};
use crate::scheme::{encode, transmit, SchemeCase, SchemeError, SymbolSet, TransmitBlock};
use crate::view::AuditSummary;
use crate::BLOCK_SLOTS;

/// Independent stream for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Channels, symbols and the encoded block for one trial.
#[derive(Debug, Clone)]
pub struct Realization {
    pub channels: ChannelRealization,
    pub symbols: SymbolSet,
    pub block: TransmitBlock,
    /// Channel redraws caused by precoder magnitudes above the limit.
    pub resamples: u32,
}

/// Draw channels and symbols, redrawing the channels while any precoder
/// coefficient exceeds [`MAX_PRECODER_MAGNITUDE`].
pub fn draw_realization(
    pattern: &CsitPattern,
    case: &SchemeCase,
    rng: &mut ChaCha8Rng,
) -> Result<Realization, SchemeError> {
    let symbols = SymbolSet::random(rng);
    let mut resamples = 0;
    loop {
        let channels = ChannelRealization::draw_with(rng, BLOCK_SLOTS);
        let block = encode(pattern, case, &symbols, &channels)?;
        if block.max_precoder_magnitude() <= MAX_PRECODER_MAGNITUDE {
            return Ok(Realization {
                channels,
                symbols,
                block,
                resamples,
            });
        }
        resamples += 1;
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: u64,
    pub realization: Realization,
    pub system: EffectiveSystem,
    pub decode: Result<DecodeReport, DecodeError>,
    pub audit: AuditSummary,
}

impl TrialOutcome {
    /// Both receivers solved with residuals below the decode tolerance.
    pub fn success(&self, tol: &Tolerances) -> bool {
        self.decode
            .as_ref()
            .is_ok_and(|r| r.residual_u < tol.decode && r.residual_v < tol.decode)
    }

    /// Relative estimate errors against the transmitted symbols.
    pub fn estimate_errors(&self) -> Option<(f64, f64)> {
        self.decode
            .as_ref()
            .ok()
            .map(|r| r.estimate_errors(&self.realization.symbols))
    }

    pub fn leakage(&self) -> f64 {
        self.system.leakage()
    }
}

pub fn run_trial(
    pattern: &CsitPattern,
    case: &SchemeCase,
    seed: u64,
    trial: u64,
    noise_power: f64,
    tol: &Tolerances,
) -> Result<TrialOutcome, SchemeError> {
    let mut rng = trial_rng(seed, trial);
    let realization = draw_realization(pattern, case, &mut rng)?;
    let received = transmit(&realization.block, &realization.channels, noise_power, &mut rng);
    let system = combine(case, &realization.channels, &received);
    let audit = realization.block.audit();
    let decode = solve_with(&system, tol).map(|mut r| {
        r.audit = audit;
        r.resamples = realization.resamples;
        r
    });
    Ok(TrialOutcome {
        trial,
        realization,
        system,
        decode,
        audit,
    })
}
