//! Slot-role maps.
//!
//! Each scheme case is a template of four roles with CSIT requirements and
//! ordering constraints. A role map places the template on the four slots of
//! a concrete pattern. Receiver names are relative: the *u-receiver* wants
//! `u1_1, u1_2, u2` and the *v-receiver* wants `v1, v2`. In an unmirrored
//! pattern the u-receiver is R1.
//!
//! Templates (slot letters name the roles):
//!
//! | case | creation                                     | resurrection                         |
//! |------|----------------------------------------------|--------------------------------------|
//! | 1    | `a` u1_1+v1 / u2+v2, `b` u1_2 / u2           | `p` echo v from `a`, `r` echo u(a,b) |
//! | 2    | `a` u1_1 / u2, `b` u1_2 / u2, `c` v1 / v2    | `p` echo u(a,b) and v from `c`       |
//! | 3    | `c` v1 / v2, `q` u1_1 / u2, `o` u1_2+echo v  | `o` (overlap), `r` echo u(o,q)       |
//!
//! Slots feeding a later v-echo need the u-receiver's channels known after
//! the fact (`D` or `P`); slots feeding a later u-echo need the same of the
//! v-receiver's channels; a v-echo slot needs `P` on the u-receiver.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::channel::Rx;
use crate::csit::{CsitPattern, CsitState};
use crate::BLOCK_SLOTS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseKind {
    /// Combined creation, distributed resurrection.
    Case1,
    /// Distributed creation, combined resurrection.
    Case2,
    /// Distributed creation, distributed resurrection, overlapping phases.
    Case3,
}

impl CaseKind {
    pub const ALL: [CaseKind; 3] = [CaseKind::Case1, CaseKind::Case2, CaseKind::Case3];

    pub fn number(self) -> u8 {
        match self {
            CaseKind::Case1 => 1,
            CaseKind::Case2 => 2,
            CaseKind::Case3 => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.number() == n)
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Which of T1's two u-symbols a slot carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum USymbol {
    First,
    Second,
}

/// What the two transmitters send in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlotRole {
    /// T1: `u1_1 + v1`, T2: `u2 + v2`.
    Combined,
    /// T1: `u1_1` or `u1_2`, T2: `u2`.
    UOnly(USymbol),
    /// T1: `v1`, T2: `v2`.
    VOnly,
    /// T1: `u1_2` plus the v1 echo of `source`, T2: `u2` plus the v2 echo.
    Overlap { source: usize },
    /// Re-create at the u-receiver the v-interference it saw in `source`.
    EchoV { source: usize },
    /// T1 alone sends the u-combination that the v-receiver can rebuild from
    /// its observations in `lead` and `lag`; T2 is silent.
    EchoU { lead: usize, lag: usize },
    /// `EchoU` and `EchoV` superposed in one slot.
    EchoBoth { lead: usize, lag: usize, source: usize },
}

impl SlotRole {
    pub fn is_creation(self) -> bool {
        matches!(
            self,
            SlotRole::Combined | SlotRole::UOnly(_) | SlotRole::VOnly | SlotRole::Overlap { .. }
        )
    }

    pub fn is_resurrection(self) -> bool {
        matches!(
            self,
            SlotRole::Overlap { .. } | SlotRole::EchoV { .. } | SlotRole::EchoU { .. } | SlotRole::EchoBoth { .. }
        )
    }

    /// The u-symbol T1 puts into this slot, if any.
    pub fn t1_u_symbol(self) -> Option<USymbol> {
        match self {
            SlotRole::Combined => Some(USymbol::First),
            SlotRole::UOnly(s) => Some(s),
            SlotRole::Overlap { .. } => Some(USymbol::Second),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SlotRole::Combined => "combined",
            SlotRole::UOnly(USymbol::First) => "u-first",
            SlotRole::UOnly(USymbol::Second) => "u-second",
            SlotRole::VOnly => "v-only",
            SlotRole::Overlap { .. } => "overlap",
            SlotRole::EchoV { .. } => "echo-v",
            SlotRole::EchoU { .. } => "echo-u",
            SlotRole::EchoBoth { .. } => "echo-both",
        }
    }
}

/// Slot positions (1-based) of a case template's roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Assignment {
    Case1 {
        combined: usize,
        second: usize,
        echo_v: usize,
        echo_u: usize,
    },
    Case2 {
        first: usize,
        second: usize,
        v_only: usize,
        echo: usize,
    },
    Case3 {
        v_only: usize,
        first: usize,
        overlap: usize,
        echo_u: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Need {
    Any,
    /// `D` or `P`: known at every later slot.
    Known,
    Perfect,
}

impl Need {
    fn met_by(self, state: CsitState) -> bool {
        match self {
            Need::Any => true,
            Need::Known => state != CsitState::Absent,
            Need::Perfect => state == CsitState::Perfect,
        }
    }
}

struct Requirement {
    slot: usize,
    u: Need,
    v: Need,
    creation: bool,
}

impl Assignment {
    fn from_slots(kind: CaseKind, s: [usize; 4]) -> Self {
        match kind {
            CaseKind::Case1 => Assignment::Case1 {
                combined: s[0],
                second: s[1],
                echo_v: s[2],
                echo_u: s[3],
            },
            CaseKind::Case2 => Assignment::Case2 {
                first: s[0],
                second: s[1],
                v_only: s[2],
                echo: s[3],
            },
            CaseKind::Case3 => Assignment::Case3 {
                v_only: s[0],
                first: s[1],
                overlap: s[2],
                echo_u: s[3],
            },
        }
    }

    pub fn kind(&self) -> CaseKind {
        match self {
            Assignment::Case1 { .. } => CaseKind::Case1,
            Assignment::Case2 { .. } => CaseKind::Case2,
            Assignment::Case3 { .. } => CaseKind::Case3,
        }
    }

    fn requirements(&self) -> [Requirement; 4] {
        use Need::*;
        let req = |slot, u, v, creation| Requirement { slot, u, v, creation };
        match *self {
            Assignment::Case1 {
                combined,
                second,
                echo_v,
                echo_u,
            } => [
                req(combined, Known, Known, true),
                req(second, Any, Known, true),
                req(echo_v, Perfect, Any, false),
                req(echo_u, Any, Any, false),
            ],
            Assignment::Case2 {
                first,
                second,
                v_only,
                echo,
            } => [
                req(first, Any, Known, true),
                req(second, Any, Known, true),
                req(v_only, Known, Any, true),
                req(echo, Perfect, Any, false),
            ],
            Assignment::Case3 {
                v_only,
                first,
                overlap,
                echo_u,
            } => [
                req(v_only, Known, Any, true),
                req(first, Any, Known, true),
                req(overlap, Perfect, Known, true),
                req(echo_u, Any, Any, false),
            ],
        }
    }

    /// `(earlier, later)` pairs that must hold for the echoes to be causal.
    fn ordering(&self) -> Vec<(usize, usize)> {
        match *self {
            Assignment::Case1 {
                combined,
                second,
                echo_v,
                echo_u,
            } => vec![(combined, echo_v), (combined, echo_u), (second, echo_u)],
            Assignment::Case2 {
                first,
                second,
                v_only,
                echo,
            } => vec![(first, second), (first, echo), (second, echo), (v_only, echo)],
            Assignment::Case3 {
                v_only,
                first,
                overlap,
                echo_u,
            } => vec![(v_only, overlap), (first, echo_u), (overlap, echo_u)],
        }
    }

    fn roles(&self) -> [SlotRole; BLOCK_SLOTS] {
        let mut roles = [SlotRole::VOnly; BLOCK_SLOTS];
        let mut put = |slot: usize, role| roles[slot - 1] = role;
        match *self {
            Assignment::Case1 {
                combined,
                second,
                echo_v,
                echo_u,
            } => {
                put(combined, SlotRole::Combined);
                put(second, SlotRole::UOnly(USymbol::Second));
                put(echo_v, SlotRole::EchoV { source: combined });
                put(
                    echo_u,
                    SlotRole::EchoU {
                        lead: combined,
                        lag: second,
                    },
                );
            }
            Assignment::Case2 {
                first,
                second,
                v_only,
                echo,
            } => {
                put(first, SlotRole::UOnly(USymbol::First));
                put(second, SlotRole::UOnly(USymbol::Second));
                put(v_only, SlotRole::VOnly);
                put(
                    echo,
                    SlotRole::EchoBoth {
                        lead: first,
                        lag: second,
                        source: v_only,
                    },
                );
            }
            Assignment::Case3 {
                v_only,
                first,
                overlap,
                echo_u,
            } => {
                put(v_only, SlotRole::VOnly);
                put(first, SlotRole::UOnly(USymbol::First));
                put(overlap, SlotRole::Overlap { source: v_only });
                put(
                    echo_u,
                    SlotRole::EchoU {
                        lead: overlap,
                        lag: first,
                    },
                );
            }
        }
        roles
    }

    /// Check the assignment against a pattern. With `allow_blind`, creation
    /// requirements may also be met by an `NN` slot; the returned list holds
    /// the creation slots that relied on that.
    fn check(&self, pattern: &CsitPattern, u_rx: Rx, allow_blind: bool) -> Option<Vec<usize>> {
        if self.ordering().iter().any(|&(a, b)| a >= b) {
            return None;
        }
        let mut blind = Vec::new();
        for req in self.requirements() {
            let s = pattern.slot(req.slot);
            let ok = req.u.met_by(s.get(u_rx)) && req.v.met_by(s.get(u_rx.other()));
            if ok {
                continue;
            }
            let waivable = req.creation && req.u != Need::Perfect && req.v != Need::Perfect;
            if allow_blind && waivable && s.is_blind() {
                blind.push(req.slot);
            } else {
                return None;
            }
        }
        blind.sort_unstable();
        Some(blind)
    }
}

/// A case template placed on the slots of one pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoleMap {
    u_receiver: Rx,
    assignment: Assignment,
    roles: [SlotRole; BLOCK_SLOTS],
}

fn permutations() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 1..=4 {
        for b in 1..=4 {
            for c in 1..=4 {
                for d in 1..=4 {
                    if a != b && a != c && a != d && b != c && b != d && c != d {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

impl RoleMap {
    /// First placement (in lexicographic slot order) of `kind` on `pattern`
    /// with `u_receiver` as the three-symbol receiver, honoring every CSIT
    /// requirement.
    pub fn derive(pattern: &CsitPattern, kind: CaseKind, u_receiver: Rx) -> Option<RoleMap> {
        if pattern.len() != BLOCK_SLOTS {
            return None;
        }
        permutations().into_iter().find_map(|slots| {
            let assignment = Assignment::from_slots(kind, slots);
            assignment
                .check(pattern, u_receiver, false)
                .map(|_| RoleMap::new(u_receiver, assignment))
        })
    }

    /// Try every orientation (R1 first) and case (1, 2, 3).
    pub fn search(pattern: &CsitPattern) -> Option<RoleMap> {
        Rx::ALL
            .into_iter()
            .flat_map(|rx| CaseKind::ALL.into_iter().map(move |k| (rx, k)))
            .find_map(|(rx, kind)| Self::derive(pattern, kind, rx))
    }

    /// Like [`RoleMap::search`], but creation roles may sit on `NN` slots.
    /// Returns the placement with the fewest such blind slots, and those slots.
    pub fn search_blind(pattern: &CsitPattern) -> Option<(RoleMap, Vec<usize>)> {
        if pattern.len() != BLOCK_SLOTS {
            return None;
        }
        let mut best: Option<(RoleMap, Vec<usize>)> = None;
        for rx in Rx::ALL {
            for kind in CaseKind::ALL {
                for slots in permutations() {
                    let assignment = Assignment::from_slots(kind, slots);
                    if let Some(blind) = assignment.check(pattern, rx, true) {
                        if best.as_ref().is_none_or(|(_, b)| blind.len() < b.len()) {
                            best = Some((RoleMap::new(rx, assignment), blind));
                        }
                    }
                }
            }
        }
        best
    }

    fn new(u_receiver: Rx, assignment: Assignment) -> Self {
        Self {
            u_receiver,
            assignment,
            roles: assignment.roles(),
        }
    }

    pub fn kind(&self) -> CaseKind {
        self.assignment.kind()
    }

    pub fn u_receiver(&self) -> Rx {
        self.u_receiver
    }

    pub fn v_receiver(&self) -> Rx {
        self.u_receiver.other()
    }

    pub fn mirrored(&self) -> bool {
        self.u_receiver == Rx::R2
    }

    pub fn assignment(&self) -> Assignment {
        self.assignment
    }

    pub fn roles(&self) -> &[SlotRole; BLOCK_SLOTS] {
        &self.roles
    }

    /// Role of 1-based `slot`.
    pub fn role(&self, slot: usize) -> SlotRole {
        self.roles[slot - 1]
    }

    pub fn creation_slots(&self) -> Vec<usize> {
        (1..=BLOCK_SLOTS).filter(|&t| self.role(t).is_creation()).collect()
    }

    pub fn resurrection_slots(&self) -> Vec<usize> {
        (1..=BLOCK_SLOTS).filter(|&t| self.role(t).is_resurrection()).collect()
    }
}

impl fmt::Display for RoleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.roles.iter().map(|r| r.name()).collect();
        write!(f, "u@{} [{}]", self.u_receiver, names.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> CsitPattern {
        s.parse().unwrap()
    }

    #[test]
    fn exemplar_case1_layout() {
        let map = RoleMap::search(&p("DD,ND,PN,NN")).unwrap();
        assert_eq!(map.kind(), CaseKind::Case1);
        assert!(!map.mirrored());
        assert_eq!(
            map.roles(),
            &[
                SlotRole::Combined,
                SlotRole::UOnly(USymbol::Second),
                SlotRole::EchoV { source: 1 },
                SlotRole::EchoU { lead: 1, lag: 2 },
            ]
        );
    }

    #[test]
    fn exemplar_case2_layout() {
        let map = RoleMap::search(&p("ND,ND,DN,PN")).unwrap();
        assert_eq!(map.kind(), CaseKind::Case2);
        assert_eq!(
            map.roles(),
            &[
                SlotRole::UOnly(USymbol::First),
                SlotRole::UOnly(USymbol::Second),
                SlotRole::VOnly,
                SlotRole::EchoBoth {
                    lead: 1,
                    lag: 2,
                    source: 3
                },
            ]
        );
    }

    #[test]
    fn exemplar_case3_layout() {
        let map = RoleMap::search(&p("ND,DN,PD,NN")).unwrap();
        assert_eq!(map.kind(), CaseKind::Case3);
        assert_eq!(
            map.roles(),
            &[
                SlotRole::UOnly(USymbol::First),
                SlotRole::VOnly,
                SlotRole::Overlap { source: 2 },
                SlotRole::EchoU { lead: 3, lag: 1 },
            ]
        );
        assert_eq!(map.creation_slots(), vec![1, 2, 3]);
        assert_eq!(map.resurrection_slots(), vec![3, 4]);
    }

    #[test]
    fn mirrored_pattern_puts_u_symbols_at_r2() {
        let map = RoleMap::search(&p("DD,DN,NP,NN")).unwrap();
        assert!(map.mirrored());
        assert_eq!(map.kind(), CaseKind::Case1);
        assert_eq!(map.u_receiver(), Rx::R2);
    }

    #[test]
    fn blind_creation_found_for_remark_pattern() {
        let pat = p("NN,ND,DD,PN");
        assert!(RoleMap::search(&pat).is_none());
        let (_, blind) = RoleMap::search_blind(&pat).unwrap();
        assert_eq!(blind, vec![1]);
    }

    #[test]
    fn wrong_length_has_no_map() {
        assert!(RoleMap::search(&p("DD,ND,PN")).is_none());
        assert!(RoleMap::search_blind(&p("DD,ND,PN,NN,NN")).is_none());
    }

    #[test]
    fn twenty_four_permutations() {
        let perms = permutations();
        assert_eq!(perms.len(), 24);
        assert_eq!(perms[0], [1, 2, 3, 4]);
    }
}
