//! Rank oracle over raw observations.
//!
//! Independent of the case-specific combining: it stacks a receiver's raw
//! noise-free observations as linear forms in all five symbols (rows of `M`,
//! taken from the transmitted precoders) and asks how many dimensions of the
//! desired symbols survive once the interference span is projected out,
//! i.e. `rank(M) − rank(M_interference)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, Rx, Tx};
use crate::csit::{CsitPattern, CsitState};
use crate::scheme::{TransmitBlock, SYMBOLS, U_SYMBOLS, V_SYMBOLS};
use crate::{BLOCK_SLOTS, C64};

/// Singular values below this fraction of the largest count as zero
/// (rows are normalized first).
const RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Identifiability {
    /// Desired-symbol dimensions at the receiver of `u1_1, u1_2, u2`.
    pub rank_u: usize,
    /// Desired-symbol dimensions at the receiver of `v1, v2`.
    pub rank_v: usize,
}

impl Identifiability {
    pub fn full(&self) -> bool {
        self.rank_u == U_SYMBOLS.len() && self.rank_v == V_SYMBOLS.len()
    }
}

/// The receiver that wants the three u-symbols: the one whose channels are
/// ever known perfectly (R2 only when R1's never are).
pub fn u_receiver_of(pattern: &CsitPattern) -> Rx {
    let has_p = |rx| pattern.receiver(rx).contains(&CsitState::Perfect);
    if has_p(Rx::R2) && !has_p(Rx::R1) {
        Rx::R2
    } else {
        Rx::R1
    }
}

pub fn numeric_rank(m: &DMatrix<C64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let mut scaled = m.clone();
    for mut row in scaled.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= C64::new(n, 0.0);
        }
    }
    let sv = scaled.svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

fn raw_model(channels: &ChannelRealization, block: &TransmitBlock, rx: Rx, slots: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(slots.len(), SYMBOLS, |r, k| {
        let t = slots[r];
        Tx::ALL
            .iter()
            .map(|&tx| channels.h(rx, tx, t) * block.precoder(tx, t)[k])
            .sum()
    })
}

fn desired_rank(m: &DMatrix<C64>, interference: &[usize]) -> usize {
    let cols: Vec<_> = interference.iter().map(|&k| m.column(k).into_owned()).collect();
    let mi = DMatrix::from_columns(&cols);
    numeric_rank(m) - numeric_rank(&mi)
}

/// Identifiability ranks over the full block.
pub fn oracle_identifiability(
    pattern: &CsitPattern,
    channels: &ChannelRealization,
    block: &TransmitBlock,
) -> Identifiability {
    let all: Vec<usize> = (1..=BLOCK_SLOTS).collect();
    oracle_identifiability_on(pattern, channels, block, &all)
}

/// Identifiability ranks using only the observations of `slots`.
pub fn oracle_identifiability_on(
    pattern: &CsitPattern,
    channels: &ChannelRealization,
    block: &TransmitBlock,
    slots: &[usize],
) -> Identifiability {
    let u_rx = u_receiver_of(pattern);
    let mu = raw_model(channels, block, u_rx, slots);
    let mv = raw_model(channels, block, u_rx.other(), slots);
    Identifiability {
        rank_u: desired_rank(&mu, &V_SYMBOLS),
        rank_v: desired_rank(&mv, &U_SYMBOLS),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{classify_case, encode, table1_patterns, SymbolSet};

    #[test]
    fn table_patterns_are_fully_identifiable() {
        for (pat, _) in table1_patterns() {
            for q in [pat.clone(), pat.mirror()] {
                let case = classify_case(&q).unwrap();
                for seed in 0..50 {
                    let h = ChannelRealization::draw(seed, 4);
                    let b = encode(&q, &case, &SymbolSet::zero(), &h).unwrap();
                    let id = oracle_identifiability(&q, &h, &b);
                    assert_eq!((id.rank_u, id.rank_v), (3, 2), "{q} seed {seed}");
                }
            }
        }
    }

    #[test]
    fn zero_precoders_identify_nothing() {
        let h = ChannelRealization::draw(1, 4);
        let zero = [C64::new(0.0, 0.0); SYMBOLS];
        let b = TransmitBlock::from_precoders([[zero; 4]; 2], &SymbolSet::zero());
        let id = oracle_identifiability(&"DD,ND,PN,NN".parse().unwrap(), &h, &b);
        assert_eq!((id.rank_u, id.rank_v), (0, 0));
    }

    #[test]
    fn dropping_slot_four_loses_rank() {
        let pat: CsitPattern = "DD,ND,PN,NN".parse().unwrap();
        let case = classify_case(&pat).unwrap();
        for seed in 0..50 {
            let h = ChannelRealization::draw(seed, 4);
            let b = encode(&pat, &case, &SymbolSet::zero(), &h).unwrap();
            let id = oracle_identifiability_on(&pat, &h, &b, &[1, 2, 3]);
            assert!(id.rank_u <= 2, "{id:?}");
            assert_eq!((id.rank_u, id.rank_v), (2, 1));
        }
    }

    #[test]
    fn u_receiver_follows_perfect_state() {
        assert_eq!(u_receiver_of(&"DD,ND,PN,NN".parse().unwrap()), Rx::R1);
        assert_eq!(u_receiver_of(&"DD,DN,NP,NN".parse().unwrap()), Rx::R2);
        assert_eq!(u_receiver_of(&"NN,NN,NN,NN".parse().unwrap()), Rx::R1);
    }

    #[test]
    fn rank_basics() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(4.0, 0.0),
            ],
        );
        assert_eq!(numeric_rank(&m), 1);
        assert_eq!(numeric_rank(&DMatrix::<C64>::identity(3, 3)), 3);
        assert_eq!(numeric_rank(&DMatrix::<C64>::zeros(0, 3)), 0);
    }
}
