//! Candidate enumeration and synergy classification for `Λ(1/8, 3/8, 1/2)`.
//!
//! [`classify`] works from the CSIT states and the slot-role search alone; it
//! never consults the reference list [`crate::scheme::TABLE_1`], so the two
//! can be checked against each other.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::channel::Rx;
use crate::csit::{CsitPattern, CsitState, LambdaDistribution};
use crate::scheme::{RoleMap, SchemeCase};
use crate::BLOCK_SLOTS;

use CsitState::{Absent as N, Delayed as D, Perfect as P};

/// One receiver's four-slot state sequence.
pub type PerReceiverState = [CsitState; BLOCK_SLOTS];

/// Sequences for the three-symbol receiver: one `P`, one earlier `D`, rest `N`.
pub fn minimum_states_r1() -> Vec<PerReceiverState> {
    let mut out = Vec::with_capacity(6);
    for p in (1..=BLOCK_SLOTS).rev() {
        for d in (1..p).rev() {
            let mut s = [N; BLOCK_SLOTS];
            s[p - 1] = P;
            s[d - 1] = D;
            out.push(s);
        }
    }
    out
}

/// Sequences for the two-symbol receiver: two `D`s, never in the last slot.
pub fn minimum_states_r2() -> Vec<PerReceiverState> {
    let mut out = Vec::with_capacity(3);
    for a in 1..BLOCK_SLOTS {
        for b in (a + 1)..BLOCK_SLOTS {
            let mut s = [N; BLOCK_SLOTS];
            s[a - 1] = D;
            s[b - 1] = D;
            out.push(s);
        }
    }
    // (D,D,N,N), (D,N,D,N), (N,D,D,N)
    out
}

/// All pairings of the minimum-state sequences (18 patterns).
pub fn enumerate_candidates() -> Vec<CsitPattern> {
    let r2s = minimum_states_r2();
    minimum_states_r1()
        .iter()
        .flat_map(|r1| {
            r2s.iter()
                .map(move |r2| CsitPattern::from_receivers(r1, r2).expect("equal lengths"))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DissociationReason {
    /// Condition 1: delayed CSIT in the last slot (slot given).
    DelayedInLastSlot { slot: usize },
    /// Condition 2: no receiver has a delayed state followed by a perfect one.
    NoPerfectAfterDelayed,
    /// Condition 3: the transmitters would have to create interference
    /// in a slot with no CSIT on either receiver.
    BlindCreation { slot: usize },
    /// A scheme exists, but the state fractions differ from the target.
    OffDistribution { lambda: LambdaDistribution },
    /// No four-slot scheme fits the pattern even when blind slots are allowed.
    NoScheme,
}

impl DissociationReason {
    /// Index of the failed synergy condition, when one of the three applies.
    pub fn condition(&self) -> Option<u8> {
        match self {
            DissociationReason::DelayedInLastSlot { .. } => Some(1),
            DissociationReason::NoPerfectAfterDelayed => Some(2),
            DissociationReason::BlindCreation { .. } => Some(3),
            DissociationReason::OffDistribution { .. } | DissociationReason::NoScheme => None,
        }
    }
}

impl fmt::Display for DissociationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DissociationReason::DelayedInLastSlot { slot } => write!(f, "delayed CSIT in last slot {slot}"),
            DissociationReason::NoPerfectAfterDelayed => f.write_str("no perfect CSIT after delayed CSIT"),
            DissociationReason::BlindCreation { slot } => write!(f, "blind interference creation in slot {slot}"),
            DissociationReason::OffDistribution { lambda } => write!(f, "state fractions {lambda} off target"),
            DissociationReason::NoScheme => f.write_str("no slot-role map"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Synergistic(SchemeCase),
    Dissociative(DissociationReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub pattern: CsitPattern,
    pub verdict: Verdict,
}

impl ClassificationResult {
    pub fn is_synergistic(&self) -> bool {
        matches!(self.verdict, Verdict::Synergistic(_))
    }

    pub fn case(&self) -> Option<SchemeCase> {
        match &self.verdict {
            Verdict::Synergistic(c) => Some(*c),
            Verdict::Dissociative(_) => None,
        }
    }

    /// Failed condition (1, 2 or 3), if any.
    pub fn failed_condition(&self) -> Option<u8> {
        match &self.verdict {
            Verdict::Synergistic(_) => None,
            Verdict::Dissociative(r) => r.condition(),
        }
    }
}

fn has_perfect_after_delayed(pattern: &CsitPattern, rx: Rx) -> bool {
    let seq = pattern.receiver(rx);
    seq.iter()
        .position(|&s| s == D)
        .is_some_and(|first_d| seq[first_d + 1..].contains(&P))
}

/// Apply the three synergy conditions, in order, and report the first failure.
pub fn classify(pattern: &CsitPattern) -> ClassificationResult {
    let verdict = verdict(pattern);
    ClassificationResult {
        pattern: pattern.clone(),
        verdict,
    }
}

fn verdict(pattern: &CsitPattern) -> Verdict {
    let n = pattern.len();
    if n > 0 && Rx::ALL.iter().any(|&rx| pattern.state(rx, n) == D) {
        return Verdict::Dissociative(DissociationReason::DelayedInLastSlot { slot: n });
    }
    let any_delayed = pattern.slots().iter().any(|s| s.r1 == D || s.r2 == D);
    if any_delayed && !Rx::ALL.iter().any(|&rx| has_perfect_after_delayed(pattern, rx)) {
        return Verdict::Dissociative(DissociationReason::NoPerfectAfterDelayed);
    }
    if let Some(roles) = RoleMap::search(pattern) {
        let lambda = pattern.lambda();
        return if lambda == LambdaDistribution::synergy_target() {
            Verdict::Synergistic(SchemeCase::from_roles(roles))
        } else {
            Verdict::Dissociative(DissociationReason::OffDistribution { lambda })
        };
    }
    if let Some((_, blind)) = RoleMap::search_blind(pattern) {
        if let Some(&slot) = blind.first() {
            return Verdict::Dissociative(DissociationReason::BlindCreation { slot });
        }
    }
    if let Some(slot) = pattern.slots().iter().position(|s| s.is_blind()) {
        return Verdict::Dissociative(DissociationReason::BlindCreation { slot: slot + 1 });
    }
    Verdict::Dissociative(DissociationReason::NoScheme)
}

/// The synergistic candidates with their cases.
pub fn table1() -> Vec<(CsitPattern, SchemeCase)> {
    enumerate_candidates()
        .iter()
        .filter_map(|p| classify(p).case().map(|c| (p.clone(), c)))
        .collect()
}

/// The candidates that fail a synergy condition.
pub fn dissociative() -> Vec<ClassificationResult> {
    enumerate_candidates()
        .iter()
        .map(classify)
        .filter(|r| !r.is_synergistic())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{classify_case, table1_patterns, CaseKind};
    use std::collections::BTreeSet;

    fn p(s: &str) -> CsitPattern {
        s.parse().unwrap()
    }

    fn seq(s: &str) -> PerReceiverState {
        let v: Vec<_> = s.chars().map(|c| CsitState::from_letter(c).unwrap()).collect();
        v.try_into().unwrap()
    }

    #[test]
    fn r1_states_in_listed_order() {
        let expected: Vec<_> = ["NNDP", "NDNP", "DNNP", "NDPN", "DNPN", "DPNN"]
            .iter()
            .map(|s| seq(s))
            .collect();
        assert_eq!(minimum_states_r1(), expected);
        assert!(minimum_states_r1().iter().all(|s| s[3] != D));
    }

    #[test]
    fn r2_states() {
        let expected: Vec<_> = ["DDNN", "DNDN", "NDDN"].iter().map(|s| seq(s)).collect();
        assert_eq!(minimum_states_r2(), expected);
        for s in minimum_states_r2() {
            assert_eq!(s.iter().filter(|&&x| x == D).count(), 2);
            assert!(!s.contains(&P));
        }
    }

    #[test]
    fn candidates() {
        let c = enumerate_candidates();
        assert_eq!(c.len(), 18);
        assert!(c.contains(&p("DD,ND,PN,NN")));
        assert!(c.contains(&p("NN,ND,DD,PN")));
        let unique: BTreeSet<String> = c.iter().map(|x| x.to_string()).collect();
        assert_eq!(unique.len(), 18);
    }

    #[test]
    fn classify_examples() {
        let r = classify(&p("NN,ND,DD,PN"));
        assert_eq!(r.failed_condition(), Some(3));
        assert_eq!(
            r.verdict,
            Verdict::Dissociative(DissociationReason::BlindCreation { slot: 1 })
        );
        assert_eq!(classify(&p("DD,ND,PN,NN")).case().unwrap().kind, CaseKind::Case1);
        assert_eq!(classify(&p("DN,PD,ND,NN")).case().unwrap().kind, CaseKind::Case3);
    }

    #[test]
    fn table1_matches_literal() {
        let derived: BTreeSet<(String, u8)> = table1()
            .iter()
            .map(|(p, c)| {
                assert!(!c.mirrored);
                (p.to_string(), c.kind.number())
            })
            .collect();
        let literal: BTreeSet<(String, u8)> = table1_patterns()
            .iter()
            .map(|(p, k)| (p.to_string(), k.number()))
            .collect();
        assert_eq!(derived.len(), 11);
        assert_eq!(derived, literal);
        assert!(table1().contains(&(p("ND,DD,NN,PN"), classify_case(&p("ND,DD,NN,PN")).unwrap())));
    }

    #[test]
    fn seven_dissociative_fail_condition_three() {
        let d = dissociative();
        assert_eq!(d.len(), 7);
        assert!(d.iter().all(|r| r.failed_condition() == Some(3)));
    }

    #[test]
    fn earlier_conditions_reported_first() {
        assert_eq!(classify(&p("DD,ND,PN,ND")).failed_condition(), Some(1));
        assert_eq!(classify(&p("PD,DN,NN,NN")).failed_condition(), Some(2));
        assert_eq!(classify(&p("NN,NN,NN,NN")).failed_condition(), Some(3));
    }

    #[test]
    fn off_target_fractions_are_not_synergistic() {
        let r = classify(&p("PP,PP,PP,PP"));
        assert!(matches!(
            r.verdict,
            Verdict::Dissociative(DissociationReason::OffDistribution { .. })
        ));
        assert_eq!(r.failed_condition(), None);
    }

    #[test]
    fn exhaustive_universe() {
        let mut synergistic = BTreeSet::new();
        for q in CsitPattern::all(BLOCK_SLOTS) {
            let r = classify(&q);
            let m = classify(&q.mirror());
            assert_eq!(r.is_synergistic(), m.is_synergistic(), "{q}");
            assert_eq!(r.failed_condition(), m.failed_condition(), "{q}");
            if let Some(c) = r.case() {
                assert_eq!(q.lambda(), LambdaDistribution::synergy_target());
                let looked_up = classify_case(&q).unwrap();
                assert_eq!((c.kind, c.mirrored), (looked_up.kind, looked_up.mirrored), "{q}");
                synergistic.insert(q.to_string());
            }
        }
        let mut expected = BTreeSet::new();
        for (q, _) in table1_patterns() {
            expected.insert(q.to_string());
            expected.insert(q.mirror().to_string());
        }
        assert_eq!(synergistic, expected);
    }
}
