//! CSIT availability states, patterns and time-fraction accounting.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

use crate::channel::Rx;

/// Availability of the channels to one receiver in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CsitState {
    /// Known instantaneously and without error.
    Perfect,
    /// Known without error, but only from the next slot on.
    Delayed,
    /// Never known.
    Absent,
}

impl CsitState {
    pub const ALL: [CsitState; 3] = [CsitState::Perfect, CsitState::Delayed, CsitState::Absent];

    pub fn letter(self) -> char {
        match self {
            CsitState::Perfect => 'P',
            CsitState::Delayed => 'D',
            CsitState::Absent => 'N',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'P' => Some(CsitState::Perfect),
            'D' => Some(CsitState::Delayed),
            'N' => Some(CsitState::Absent),
            _ => None,
        }
    }
}

/// CSIT of both receivers' channels in one slot, written `S_1 S_2` (e.g. `PN`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SlotCsit {
    pub r1: CsitState,
    pub r2: CsitState,
}

impl SlotCsit {
    pub fn new(r1: CsitState, r2: CsitState) -> Self {
        Self { r1, r2 }
    }

    pub fn get(self, rx: Rx) -> CsitState {
        match rx {
            Rx::R1 => self.r1,
            Rx::R2 => self.r2,
        }
    }

    pub fn swapped(self) -> Self {
        Self {
            r1: self.r2,
            r2: self.r1,
        }
    }

    pub fn is_blind(self) -> bool {
        self.r1 == CsitState::Absent && self.r2 == CsitState::Absent
    }
}

impl fmt::Display for SlotCsit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.r1.letter(), self.r2.letter())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("empty CSIT pattern")]
    Empty,
    #[error("bad slot token {0:?}: expected two letters from P, D, N")]
    BadToken(String),
    #[error("expected {expected} slots, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("time fractions must lie in [0,1] and sum to 1")]
    BadDistribution,
}

/// Sequence of per-slot CSIT states over the block.
///
/// Wire format is a comma separated list of two-letter tokens, first letter
/// for receiver 1: `DD,ND,PN,NN`. Surrounding parentheses and whitespace are
/// accepted when parsing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CsitPattern {
    slots: Vec<SlotCsit>,
}

impl CsitPattern {
    pub fn new(slots: Vec<SlotCsit>) -> Result<Self, PatternError> {
        if slots.is_empty() {
            return Err(PatternError::Empty);
        }
        Ok(Self { slots })
    }

    /// Zip two per-receiver sequences into a pattern.
    pub fn from_receivers(r1: &[CsitState], r2: &[CsitState]) -> Result<Self, PatternError> {
        if r1.len() != r2.len() {
            return Err(PatternError::WrongLength {
                expected: r1.len(),
                got: r2.len(),
            });
        }
        Self::new(r1.iter().zip(r2).map(|(&a, &b)| SlotCsit::new(a, b)).collect())
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[SlotCsit] {
        &self.slots
    }

    /// Slot CSIT at 1-based `slot`.
    pub fn slot(&self, slot: usize) -> SlotCsit {
        self.slots[slot - 1]
    }

    pub fn state(&self, rx: Rx, slot: usize) -> CsitState {
        self.slot(slot).get(rx)
    }

    pub fn receiver(&self, rx: Rx) -> Vec<CsitState> {
        self.slots.iter().map(|s| s.get(rx)).collect()
    }

    /// Swap the two receivers' states in every slot.
    pub fn mirror(&self) -> Self {
        Self {
            slots: self.slots.iter().map(|s| s.swapped()).collect(),
        }
    }

    pub fn lambda(&self) -> LambdaDistribution {
        lambda_of(self)
    }

    /// Every pattern of `slots` slots, in lexicographic order over `P < D < N`.
    pub fn all(slots: usize) -> Vec<CsitPattern> {
        let per_slot: Vec<SlotCsit> = CsitState::ALL
            .iter()
            .flat_map(|&a| CsitState::ALL.iter().map(move |&b| SlotCsit::new(a, b)))
            .collect();
        let mut out = vec![Vec::new()];
        for _ in 0..slots {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<SlotCsit>| {
                    per_slot.iter().map(move |&s| {
                        let mut p = prefix.clone();
                        p.push(s);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(|slots| CsitPattern { slots }).collect()
    }
}

impl FromStr for CsitPattern {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let slots = trimmed
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                let mut chars = tok.chars();
                match (chars.next(), chars.next(), chars.next()) {
                    (Some(a), Some(b), None) => CsitState::from_letter(a)
                        .zip(CsitState::from_letter(b))
                        .map(|(a, b)| SlotCsit::new(a, b))
                        .ok_or_else(|| PatternError::BadToken(tok.to_string())),
                    _ => Err(PatternError::BadToken(tok.to_string())),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(slots)
    }
}

impl TryFrom<String> for CsitPattern {
    type Error = PatternError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<CsitPattern> for String {
    fn from(p: CsitPattern) -> Self {
        p.to_string()
    }
}

impl fmt::Display for CsitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.slots.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

pub type Fraction = Ratio<i64>;

/// Fractions of time spent in each CSIT state, `Λ(λ_P, λ_D, λ_N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LambdaDistribution {
    perfect: Fraction,
    delayed: Fraction,
    absent: Fraction,
}

impl LambdaDistribution {
    pub fn new(perfect: Fraction, delayed: Fraction, absent: Fraction) -> Result<Self, PatternError> {
        let unit = |x: Fraction| x >= Fraction::from_integer(0) && x <= Fraction::from_integer(1);
        if !(unit(perfect) && unit(delayed) && unit(absent)) || perfect + delayed + absent != Fraction::from_integer(1)
        {
            return Err(PatternError::BadDistribution);
        }
        Ok(Self {
            perfect,
            delayed,
            absent,
        })
    }

    /// The distribution all synergistic patterns share: `Λ(1/8, 3/8, 1/2)`.
    pub fn synergy_target() -> Self {
        Self {
            perfect: Fraction::new(1, 8),
            delayed: Fraction::new(3, 8),
            absent: Fraction::new(1, 2),
        }
    }

    pub fn perfect(&self) -> Fraction {
        self.perfect
    }

    pub fn delayed(&self) -> Fraction {
        self.delayed
    }

    pub fn absent(&self) -> Fraction {
        self.absent
    }
}

impl fmt::Display for LambdaDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.perfect, self.delayed, self.absent)
    }
}

/// Count each state over all slots and both receivers, divided by `2n`.
pub fn lambda_of(pattern: &CsitPattern) -> LambdaDistribution {
    let total = 2 * pattern.len() as i64;
    let count = |state: CsitState| {
        pattern
            .slots()
            .iter()
            .map(|s| (s.r1 == state) as i64 + (s.r2 == state) as i64)
            .sum::<i64>()
    };
    LambdaDistribution {
        perfect: Fraction::new(count(CsitState::Perfect), total),
        delayed: Fraction::new(count(CsitState::Delayed), total),
        absent: Fraction::new(count(CsitState::Absent), total),
    }
}
