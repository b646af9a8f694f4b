use rand::Rng;
use serde::{Deserialize, Serialize};

use super::case::{classify_case, SchemeCase};
use super::roles::{RoleMap, SlotRole, USymbol};
use super::SchemeError;
use crate::channel::{complex_normal, ChannelRealization, Rx, Tx};
use crate::csit::CsitPattern;
use crate::view::{AccessRecord, AuditSummary, ChannelKnowledge, CsitError, CsitView, GlobalCsi};
use crate::{BLOCK_SLOTS, C64};

/// Position of each symbol in a [`Precoder`] row.
pub const U1_1: usize = 0;
pub const U1_2: usize = 1;
pub const U2: usize = 2;
pub const V1: usize = 3;
pub const V2: usize = 4;
pub const SYMBOLS: usize = 5;

/// Indices of the symbols meant for the u-receiver and the v-receiver.
pub const U_SYMBOLS: [usize; 3] = [U1_1, U1_2, U2];
pub const V_SYMBOLS: [usize; 2] = [V1, V2];

/// Linear weights of `x_j(t)` on `(u1_1, u1_2, u2, v1, v2)`.
pub type Precoder = [C64; SYMBOLS];

/// The five data symbols of one block.
///
/// `u1_1`, `u1_2` leave T1 and `u2` leaves T2, all for the u-receiver;
/// `v1` (T1) and `v2` (T2) are for the v-receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolSet {
    pub u1_1: C64,
    pub u1_2: C64,
    pub u2: C64,
    pub v1: C64,
    pub v2: C64,
}

impl SymbolSet {
    pub fn from_array(s: [C64; SYMBOLS]) -> Self {
        Self {
            u1_1: s[U1_1],
            u1_2: s[U1_2],
            u2: s[U2],
            v1: s[V1],
            v2: s[V2],
        }
    }

    pub fn to_array(&self) -> [C64; SYMBOLS] {
        [self.u1_1, self.u1_2, self.u2, self.v1, self.v2]
    }

    pub fn zero() -> Self {
        Self::from_array([C64::new(0.0, 0.0); SYMBOLS])
    }

    /// Unit-power CN(0,1) symbols.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::from_array(std::array::from_fn(|_| complex_normal(rng, 1.0)))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Transmit signals `x_j(t)` of one block with the precoders that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmitBlock {
    precoders: [[Precoder; BLOCK_SLOTS]; 2],
    signals: [[C64; BLOCK_SLOTS]; 2],
    access_log: Vec<AccessRecord>,
}

impl TransmitBlock {
    /// Apply explicit precoders to `symbols` (no access log).
    pub fn from_precoders(precoders: [[Precoder; BLOCK_SLOTS]; 2], symbols: &SymbolSet) -> Self {
        let s = symbols.to_array();
        let signals =
            std::array::from_fn(|j| std::array::from_fn(|t| precoders[j][t].iter().zip(&s).map(|(w, x)| w * x).sum()));
        Self {
            precoders,
            signals,
            access_log: Vec::new(),
        }
    }

    /// `x_j(t)`, 1-based slot.
    pub fn x(&self, tx: Tx, slot: usize) -> C64 {
        self.signals[tx.index()][slot - 1]
    }

    pub fn precoder(&self, tx: Tx, slot: usize) -> &Precoder {
        &self.precoders[tx.index()][slot - 1]
    }

    pub fn precoders(&self) -> &[[Precoder; BLOCK_SLOTS]; 2] {
        &self.precoders
    }

    pub fn access_log(&self) -> &[AccessRecord] {
        &self.access_log
    }

    pub fn audit(&self) -> AuditSummary {
        AuditSummary::from_log(&self.access_log)
    }

    /// Largest precoder coefficient magnitude.
    pub fn max_precoder_magnitude(&self) -> f64 {
        self.precoders
            .iter()
            .flatten()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Largest `‖w_j(t)‖²`, i.e. the peak `E|x_j(t)|²` for unit-power symbols.
    pub fn peak_slot_power(&self) -> f64 {
        self.precoders
            .iter()
            .flatten()
            .map(|w| w.iter().map(|c| c.norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn u_index(s: USymbol) -> usize {
    match s {
        USymbol::First => U1_1,
        USymbol::Second => U1_2,
    }
}

/// Precoder of `tx` in `slot`, reading every coefficient through `know`.
pub(crate) fn precoder<K: ChannelKnowledge>(
    roles: &RoleMap,
    tx: Tx,
    slot: usize,
    know: &mut K,
) -> Result<Precoder, CsitError> {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let u_rx = roles.u_receiver();
    let v_rx = roles.v_receiver();
    let own_v = match tx {
        Tx::T1 => V1,
        Tx::T2 => V2,
    };
    let mut row = [zero; SYMBOLS];

    // Re-send own v-symbol so it lands at the u-receiver exactly as in `source`.
    let echo_v = |row: &mut Precoder, know: &mut K, source: usize| -> Result<(), CsitError> {
        let past = know.coefficient(u_rx, tx, source)?;
        let now = know.coefficient(u_rx, tx, slot)?;
        row[own_v] += past / now;
        Ok(())
    };
    // T1 only: h_v2(lag) h_v1(lead) u(lead) - h_v2(lead) h_v1(lag) u(lag).
    let echo_u = |row: &mut Precoder, know: &mut K, lead: usize, lag: usize| -> Result<(), CsitError> {
        let lead_sym = roles
            .role(lead)
            .t1_u_symbol()
            .map(u_index)
            .expect("lead slot carries a u-symbol");
        let lag_sym = roles
            .role(lag)
            .t1_u_symbol()
            .map(u_index)
            .expect("lag slot carries a u-symbol");
        let c_lead = know.coefficient(v_rx, Tx::T2, lag)? * know.coefficient(v_rx, Tx::T1, lead)?;
        let c_lag = know.coefficient(v_rx, Tx::T2, lead)? * know.coefficient(v_rx, Tx::T1, lag)?;
        row[lead_sym] += c_lead;
        row[lag_sym] -= c_lag;
        Ok(())
    };

    match (roles.role(slot), tx) {
        (SlotRole::Combined, Tx::T1) => {
            row[U1_1] = one;
            row[V1] = one;
        }
        (SlotRole::Combined, Tx::T2) => {
            row[U2] = one;
            row[V2] = one;
        }
        (SlotRole::UOnly(s), Tx::T1) => row[u_index(s)] = one,
        (SlotRole::UOnly(_), Tx::T2) => row[U2] = one,
        (SlotRole::VOnly, _) => row[own_v] = one,
        (SlotRole::Overlap { source }, _) => {
            row[if tx == Tx::T1 { U1_2 } else { U2 }] = one;
            echo_v(&mut row, know, source)?;
        }
        (SlotRole::EchoV { source }, _) => echo_v(&mut row, know, source)?,
        (SlotRole::EchoU { lead, lag }, Tx::T1) => echo_u(&mut row, know, lead, lag)?,
        (SlotRole::EchoU { .. }, Tx::T2) => {}
        (SlotRole::EchoBoth { lead, lag, source }, _) => {
            if tx == Tx::T1 {
                echo_u(&mut row, know, lead, lag)?;
            }
            echo_v(&mut row, know, source)?;
        }
    }
    Ok(row)
}

/// Precoders as the receivers reconstruct them from global channel knowledge.
pub fn receiver_precoders(case: &SchemeCase, channels: &ChannelRealization) -> [[Precoder; BLOCK_SLOTS]; 2] {
    let mut global = GlobalCsi(channels);
    std::array::from_fn(|j| {
        std::array::from_fn(|t| {
            precoder(case.roles(), Tx::ALL[j], t + 1, &mut global).expect("global knowledge covers the block")
        })
    })
}

/// Build `x_j(t)` for the block. Each transmitter reads channel coefficients
/// only through its own [`CsitView`] for the slot being built.
pub fn encode(
    pattern: &CsitPattern,
    case: &SchemeCase,
    symbols: &SymbolSet,
    channels: &ChannelRealization,
) -> Result<TransmitBlock, SchemeError> {
    if channels.slots() != BLOCK_SLOTS {
        return Err(SchemeError::WrongLength(channels.slots()));
    }
    let expected = classify_case(pattern)?;
    if expected.kind != case.kind || expected.mirrored != case.mirrored {
        return Err(SchemeError::CaseMismatch {
            pattern: pattern.clone(),
            expected: expected.to_string(),
            got: case.to_string(),
        });
    }
    encode_with_roles(pattern, case.roles(), symbols, channels)
}

/// Encode with an explicit role map, skipping the reference-table check. The CSIT
/// view still guards every read.
pub fn encode_with_roles(
    pattern: &CsitPattern,
    roles: &RoleMap,
    symbols: &SymbolSet,
    channels: &ChannelRealization,
) -> Result<TransmitBlock, SchemeError> {
    let zero = [C64::new(0.0, 0.0); SYMBOLS];
    let mut precoders = [[zero; BLOCK_SLOTS]; 2];
    let mut log = Vec::new();
    for slot in 1..=BLOCK_SLOTS {
        for tx in Tx::ALL {
            let mut view = CsitView::new(channels, pattern, slot, tx);
            let row = precoder(roles, tx, slot, &mut view);
            log.extend(view.into_log());
            precoders[tx.index()][slot - 1] = row.map_err(SchemeError::Causality)?;
        }
    }
    let mut block = TransmitBlock::from_precoders(precoders, symbols);
    block.access_log = log;
    Ok(block)
}

/// `y_i(t)` for the whole block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceivedSignals {
    y: [[C64; BLOCK_SLOTS]; 2],
    pub noise_power: f64,
}

impl ReceivedSignals {
    pub fn new(y: [[C64; BLOCK_SLOTS]; 2], noise_power: f64) -> Self {
        Self { y, noise_power }
    }

    /// `y_i(t)`, 1-based slot.
    pub fn y(&self, rx: Rx, slot: usize) -> C64 {
        self.y[rx.index()][slot - 1]
    }

    pub fn receiver(&self, rx: Rx) -> &[C64; BLOCK_SLOTS] {
        &self.y[rx.index()]
    }

    pub fn is_finite(&self) -> bool {
        self.y.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Pass the block through the channel and add CN(0, `noise_power`) noise.
pub fn transmit<R: Rng + ?Sized>(
    block: &TransmitBlock,
    channels: &ChannelRealization,
    noise_power: f64,
    rng: &mut R,
) -> ReceivedSignals {
    assert!(noise_power >= 0.0, "noise power must be nonnegative");
    let y = std::array::from_fn(|i| {
        let rx = Rx::ALL[i];
        std::array::from_fn(|t| {
            let slot = t + 1;
            let clean: C64 = Tx::ALL
                .iter()
                .map(|&tx| channels.h(rx, tx, slot) * block.x(tx, slot))
                .sum();
            if noise_power > 0.0 {
                clean + complex_normal(rng, noise_power)
            } else {
                clean
            }
        })
    });
    ReceivedSignals::new(y, noise_power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::roles::{CaseKind, RoleMap};
    use crate::scheme::table1_patterns;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> CsitPattern {
        s.parse().unwrap()
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm()))
    }

    fn setup(pat: &str, seed: u64) -> (CsitPattern, SchemeCase, ChannelRealization, SymbolSet) {
        let pattern = p(pat);
        let case = classify_case(&pattern).unwrap();
        let h = ChannelRealization::draw(seed, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        (pattern, case, h, SymbolSet::random(&mut rng))
    }

    #[test]
    fn case1_signals_match_closed_form() {
        let (pattern, case, h, s) = setup("DD,ND,PN,NN", 5);
        let b = encode(&pattern, &case, &s, &h).unwrap();
        let g = |rx, tx, t| h.h(rx, tx, t);
        use Rx::*;
        use Tx::*;
        assert!(close(b.x(T1, 1), s.u1_1 + s.v1));
        assert!(close(b.x(T2, 1), s.u2 + s.v2));
        assert!(close(b.x(T1, 2), s.u1_2));
        assert!(close(b.x(T2, 2), s.u2));
        assert!(close(b.x(T1, 3), g(R1, T1, 3).inv() * g(R1, T1, 1) * s.v1));
        assert!(close(b.x(T2, 3), g(R1, T2, 3).inv() * g(R1, T2, 1) * s.v2));
        let x14 = g(R2, T2, 2) * g(R2, T1, 1) * s.u1_1 - g(R2, T2, 1) * g(R2, T1, 2) * s.u1_2;
        assert!(close(b.x(T1, 4), x14));
        assert_eq!(b.x(T2, 4), C64::new(0.0, 0.0));
        assert!(b.audit().clean());
    }

    #[test]
    fn case2_signals_match_closed_form() {
        let (pattern, case, h, s) = setup("ND,ND,DN,PN", 6);
        let b = encode(&pattern, &case, &s, &h).unwrap();
        let g = |rx, tx, t| h.h(rx, tx, t);
        use Rx::*;
        use Tx::*;
        assert!(close(b.x(T1, 3), s.v1));
        assert!(close(b.x(T2, 3), s.v2));
        let x14 = g(R2, T2, 2) * g(R2, T1, 1) * s.u1_1 - g(R2, T2, 1) * g(R2, T1, 2) * s.u1_2
            + g(R1, T1, 4).inv() * g(R1, T1, 3) * s.v1;
        assert!(close(b.x(T1, 4), x14));
        assert!(close(b.x(T2, 4), g(R1, T2, 4).inv() * g(R1, T2, 3) * s.v2));
    }

    #[test]
    fn case3_signals_match_closed_form() {
        let (pattern, case, h, s) = setup("ND,DN,PD,NN", 7);
        let b = encode(&pattern, &case, &s, &h).unwrap();
        let g = |rx, tx, t| h.h(rx, tx, t);
        use Rx::*;
        use Tx::*;
        assert!(close(b.x(T1, 1), s.u1_1));
        assert!(close(b.x(T2, 2), s.v2));
        assert!(close(b.x(T1, 3), s.u1_2 + g(R1, T1, 3).inv() * g(R1, T1, 2) * s.v1));
        assert!(close(b.x(T2, 3), s.u2 + g(R1, T2, 3).inv() * g(R1, T2, 2) * s.v2));
        let x14 = g(R2, T2, 1) * g(R2, T1, 3) * s.u1_2 - g(R2, T2, 3) * g(R2, T1, 1) * s.u1_1;
        assert!(close(b.x(T1, 4), x14));
        assert_eq!(b.x(T2, 4), C64::new(0.0, 0.0));
    }

    #[test]
    fn mirrored_case1_transposes_receivers() {
        let (pattern, case, h, s) = setup("DD,DN,NP,NN", 8);
        assert!(case.mirrored);
        let b = encode(&pattern, &case, &s, &h).unwrap();
        use Rx::*;
        use Tx::*;
        assert!(close(b.x(T1, 3), h.h(R2, T1, 3).inv() * h.h(R2, T1, 1) * s.v1));
        let x14 = h.h(R1, T2, 2) * h.h(R1, T1, 1) * s.u1_1 - h.h(R1, T2, 1) * h.h(R1, T1, 2) * s.u1_2;
        assert!(close(b.x(T1, 4), x14));
    }

    #[test]
    fn zero_symbols_zero_signals() {
        let (pattern, case, h, _) = setup("DD,ND,PN,NN", 9);
        let b = encode(&pattern, &case, &SymbolSet::zero(), &h).unwrap();
        for tx in Tx::ALL {
            for t in 1..=4 {
                assert_eq!(b.x(tx, t), C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn transmit_noise_free_slots() {
        let (pattern, case, h, s) = setup("DD,ND,PN,NN", 10);
        let b = encode(&pattern, &case, &s, &h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = transmit(&b, &h, 0.0, &mut rng);
        use Rx::*;
        use Tx::*;
        assert!(close(y.y(R1, 2), h.h(R1, T1, 2) * s.u1_2 + h.h(R1, T2, 2) * s.u2));
        assert!(close(y.y(R1, 3), h.h(R1, T1, 1) * s.v1 + h.h(R1, T2, 1) * s.v2));
        // Resurrection identity.
        let desired = h.h(R1, T1, 1) * s.u1_1 + h.h(R1, T2, 1) * s.u2;
        assert!(close(y.y(R1, 1) - y.y(R1, 3), desired));
    }

    #[test]
    fn transmit_all_zero_block() {
        let h = ChannelRealization::draw(1, 4);
        let zero = [C64::new(0.0, 0.0); SYMBOLS];
        let b = TransmitBlock::from_precoders([[zero; 4]; 2], &SymbolSet::zero());
        let y = transmit(&b, &h, 0.0, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(Rx::ALL.iter().all(|&rx| y.receiver(rx).iter().all(|c| c.norm() == 0.0)));
    }

    #[test]
    fn causality_violation_is_caught() {
        // The case-2 map on a pattern without the delayed slots it relies on.
        let good = p("ND,ND,DN,PN");
        let roles = RoleMap::derive(&good, CaseKind::Case2, Rx::R1).unwrap();
        let bad = p("NN,ND,DN,PN");
        let h = ChannelRealization::draw(3, 4);
        let err = encode_with_roles(&bad, &roles, &SymbolSet::zero(), &h).unwrap_err();
        assert!(matches!(err, SchemeError::Causality(CsitError::ForbiddenAccess { .. })));
    }

    #[test]
    fn encode_rejects_mismatched_case() {
        let c1 = classify_case(&p("DD,ND,PN,NN")).unwrap();
        let h = ChannelRealization::draw(3, 4);
        let err = encode(&p("ND,ND,DN,PN"), &c1, &SymbolSet::zero(), &h).unwrap_err();
        assert!(matches!(err, SchemeError::CaseMismatch { .. }));
    }

    #[test]
    fn causality_audit_all_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for (pat, _) in table1_patterns() {
            for q in [pat.clone(), pat.mirror()] {
                let case = classify_case(&q).unwrap();
                for _ in 0..1000 {
                    let h = ChannelRealization::draw_with(&mut rng, 4);
                    let b = encode(&q, &case, &SymbolSet::random(&mut rng), &h).unwrap();
                    let audit = b.audit();
                    assert!(audit.clean() && audit.reads > 0, "{q}");
                }
            }
        }
    }

    fn arb_c64() -> impl Strategy<Value = C64> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| C64::new(a, b))
    }

    proptest! {
        #[test]
        fn encode_is_linear(
            row in 0usize..11,
            seed in any::<u64>(),
            a in arb_c64(),
            b in arb_c64(),
            s1 in prop::array::uniform5(arb_c64()),
            s2 in prop::array::uniform5(arb_c64()),
        ) {
            let pattern = table1_patterns()[row].0.clone();
            let case = classify_case(&pattern).unwrap();
            let h = ChannelRealization::draw(seed, 4);
            let mix = SymbolSet::from_array(std::array::from_fn(|k| a * s1[k] + b * s2[k]));
            let x = encode(&pattern, &case, &mix, &h).unwrap();
            let x1 = encode(&pattern, &case, &SymbolSet::from_array(s1), &h).unwrap();
            let x2 = encode(&pattern, &case, &SymbolSet::from_array(s2), &h).unwrap();
            for tx in Tx::ALL {
                for t in 1..=4 {
                    let lhs = x.x(tx, t);
                    let rhs = a * x1.x(tx, t) + b * x2.x(tx, t);
                    let scale = 1.0 + x.max_precoder_magnitude() * 40.0;
                    prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
                }
            }
        }
    }
}
