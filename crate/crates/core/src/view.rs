//! Causality-checked channel knowledge.
//!
//! Transmitters never touch a [`ChannelRealization`] directly. They go through
//! a [`CsitView`] bound to one transmitter and the current slot, which grants
//! `h_ij(τ)` only when the CSIT pattern says the coefficient is known by then:
//!
//! - `P` at slot `τ`: known from slot `τ` on (`τ ≤ t`);
//! - `D` at slot `τ`: known from slot `τ + 1` on (`τ < t`);
//! - `N`: never.
//!
//! The state of receiver `i` covers both `h_i1` and `h_i2`, and either
//! transmitter may read either coefficient once it is known. Every read,
//! granted or not, is appended to the view's access log.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelRealization, Rx, Tx};
use crate::csit::{CsitPattern, CsitState};
use crate::C64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsitError {
    #[error("{reader} at slot {now} read h[{rx},{link}]({slot}) but that channel is {state:?} there")]
    ForbiddenAccess {
        reader: Tx,
        now: usize,
        rx: Rx,
        link: Tx,
        slot: usize,
        state: CsitState,
    },
    #[error("slot {slot} outside the {slots}-slot block")]
    SlotOutOfRange { slot: usize, slots: usize },
}

/// Whether a coefficient whose CSIT state at `slot` is `state` may be used at slot `now`.
pub fn permits(state: CsitState, slot: usize, now: usize) -> bool {
    match state {
        CsitState::Perfect => slot <= now,
        CsitState::Delayed => slot < now,
        CsitState::Absent => false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessRecord {
    pub reader: Tx,
    pub now: usize,
    pub rx: Rx,
    pub link: Tx,
    pub slot: usize,
    pub allowed: bool,
}

/// Anything that can hand out channel coefficients.
pub trait ChannelKnowledge {
    fn coefficient(&mut self, rx: Rx, link: Tx, slot: usize) -> Result<C64, CsitError>;
}

/// A transmitter's view of the channel at one slot.
#[derive(Debug)]
pub struct CsitView<'a> {
    channels: &'a ChannelRealization,
    pattern: &'a CsitPattern,
    now: usize,
    reader: Tx,
    log: Vec<AccessRecord>,
}

impl<'a> CsitView<'a> {
    pub fn new(channels: &'a ChannelRealization, pattern: &'a CsitPattern, now: usize, reader: Tx) -> Self {
        Self {
            channels,
            pattern,
            now,
            reader,
            log: Vec::new(),
        }
    }

    pub fn now(&self) -> usize {
        self.now
    }

    pub fn reader(&self) -> Tx {
        self.reader
    }

    /// Read the reader's own link `h_{i,j}(slot)`.
    pub fn read(&mut self, rx: Rx, slot: usize) -> Result<C64, CsitError> {
        self.read_link(rx, self.reader, slot)
    }

    /// Read `h_{rx,link}(slot)`; `link` may be the other transmitter.
    pub fn read_link(&mut self, rx: Rx, link: Tx, slot: usize) -> Result<C64, CsitError> {
        let slots = self.pattern.len().min(self.channels.slots());
        if slot == 0 || slot > slots {
            return Err(CsitError::SlotOutOfRange { slot, slots });
        }
        let state = self.pattern.state(rx, slot);
        let allowed = permits(state, slot, self.now);
        self.log.push(AccessRecord {
            reader: self.reader,
            now: self.now,
            rx,
            link,
            slot,
            allowed,
        });
        if allowed {
            Ok(self.channels.h(rx, link, slot))
        } else {
            Err(CsitError::ForbiddenAccess {
                reader: self.reader,
                now: self.now,
                rx,
                link,
                slot,
                state,
            })
        }
    }

    pub fn log(&self) -> &[AccessRecord] {
        &self.log
    }

    pub fn into_log(self) -> Vec<AccessRecord> {
        self.log
    }
}

impl ChannelKnowledge for CsitView<'_> {
    fn coefficient(&mut self, rx: Rx, link: Tx, slot: usize) -> Result<C64, CsitError> {
        self.read_link(rx, link, slot)
    }
}

/// Receivers' knowledge: every coefficient, always.
#[derive(Debug, Clone, Copy)]
pub struct GlobalCsi<'a>(pub &'a ChannelRealization);

impl ChannelKnowledge for GlobalCsi<'_> {
    fn coefficient(&mut self, rx: Rx, link: Tx, slot: usize) -> Result<C64, CsitError> {
        if slot == 0 || slot > self.0.slots() {
            return Err(CsitError::SlotOutOfRange {
                slot,
                slots: self.0.slots(),
            });
        }
        Ok(self.0.h(rx, link, slot))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub reads: usize,
    pub forbidden: usize,
}

impl AuditSummary {
    pub fn from_log(log: &[AccessRecord]) -> Self {
        Self {
            reads: log.len(),
            forbidden: log.iter().filter(|r| !r.allowed).count(),
        }
    }

    pub fn clean(&self) -> bool {
        self.forbidden == 0
    }

    pub fn merge(self, other: AuditSummary) -> AuditSummary {
        AuditSummary {
            reads: self.reads + other.reads,
            forbidden: self.forbidden + other.forbidden,
        }
    }
}
