use serde::{Deserialize, Serialize};
use std::fmt;

use super::roles::{CaseKind, RoleMap};
use super::SchemeError;
use crate::csit::CsitPattern;
use crate::BLOCK_SLOTS;

/// The eleven synergistic patterns for `Λ(1/8, 3/8, 1/2)` with their case labels.
pub const TABLE_1: [(&str, CaseKind); 11] = [
    ("DD,ND,PN,NN", CaseKind::Case1),
    ("ND,DD,PN,NN", CaseKind::Case1),
    ("ND,DD,NN,PN", CaseKind::Case1),
    ("DD,ND,NN,PN", CaseKind::Case1),
    ("DD,PN,ND,NN", CaseKind::Case1),
    ("ND,ND,DN,PN", CaseKind::Case2),
    ("ND,DN,ND,PN", CaseKind::Case2),
    ("DN,ND,ND,PN", CaseKind::Case2),
    ("ND,DN,PD,NN", CaseKind::Case3),
    ("DN,ND,PD,NN", CaseKind::Case3),
    ("DN,PD,ND,NN", CaseKind::Case3),
];

/// Parsed copy of [`TABLE_1`].
pub fn table1_patterns() -> Vec<(CsitPattern, CaseKind)> {
    TABLE_1
        .iter()
        .map(|(s, k)| (s.parse().expect("table literal"), *k))
        .collect()
}

/// Case label of a pattern plus the slot-role map that realizes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeCase {
    pub kind: CaseKind,
    pub mirrored: bool,
    roles: RoleMap,
}

impl SchemeCase {
    /// Build from a role map (the map carries kind and orientation).
    pub fn from_roles(roles: RoleMap) -> Self {
        Self {
            kind: roles.kind(),
            mirrored: roles.mirrored(),
            roles,
        }
    }

    pub fn roles(&self) -> &RoleMap {
        &self.roles
    }
}

impl fmt::Display for SchemeCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case {}", self.kind)?;
        if self.mirrored {
            f.write_str(" (mirrored)")?;
        }
        Ok(())
    }
}

/// Look the pattern (or its receiver-swapped mirror) up in the reference table.
pub fn classify_case(pattern: &CsitPattern) -> Result<SchemeCase, SchemeError> {
    if pattern.len() != BLOCK_SLOTS {
        return Err(SchemeError::WrongLength(pattern.len()));
    }
    let table = table1_patterns();
    let lookup = |p: &CsitPattern| table.iter().find(|(q, _)| q == p).map(|(_, k)| *k);
    let (kind, u_rx) = match (lookup(pattern), lookup(&pattern.mirror())) {
        (Some(k), _) => (k, crate::Rx::R1),
        (None, Some(k)) => (k, crate::Rx::R2),
        (None, None) => return Err(SchemeError::NotSynergistic(pattern.clone())),
    };
    let roles = RoleMap::derive(pattern, kind, u_rx).ok_or_else(|| SchemeError::NoRoleMap {
        pattern: pattern.clone(),
        kind,
    })?;
    Ok(SchemeCase::from_roles(roles))
}

/// Swap the receivers' states in every slot.
pub fn mirror_pattern(pattern: &CsitPattern) -> CsitPattern {
    pattern.mirror()
}
