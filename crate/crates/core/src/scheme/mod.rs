//! Transmit-side construction of the four-slot creation/resurrection schemes.

mod case;
mod encode;
pub mod roles;

use thiserror::Error;

use crate::csit::CsitPattern;
use crate::view::CsitError;

pub use case::{classify_case, mirror_pattern, table1_patterns, SchemeCase, TABLE_1};
pub use encode::{
    encode, encode_with_roles, receiver_precoders, transmit, Precoder, ReceivedSignals, SymbolSet, TransmitBlock,
    SYMBOLS, U1_1, U1_2, U2, U_SYMBOLS, V1, V2, V_SYMBOLS,
};
pub use roles::{Assignment, CaseKind, RoleMap, SlotRole, USymbol};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error("pattern {0} is not synergistic (neither it nor its mirror is in the reference table)")]
    NotSynergistic(CsitPattern),
    #[error("schemes run over 4 slots, got {0}")]
    WrongLength(usize),
    #[error("no slot-role map of case {kind} fits {pattern}; needs manual review")]
    NoRoleMap { pattern: CsitPattern, kind: CaseKind },
    #[error("pattern {pattern} is {expected}, encoder was given {got}")]
    CaseMismatch {
        pattern: CsitPattern,
        expected: String,
        got: String,
    },
    #[error("causality violation: {0}")]
    Causality(#[from] CsitError),
}
