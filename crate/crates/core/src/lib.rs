//! Two-user SISO X-channel under alternating CSIT.
//!
//! The crate simulates the four-slot interference creation / interference
//! resurrection schemes that deliver five symbols (three to one receiver,
//! two to the other) in four channel uses, and checks them from several
//! independent directions:
//!
//! - [`channel`] and [`csit`] model the fading coefficients and the per-slot,
//!   per-receiver CSIT availability states.
//! - [`view`] is the only path through which transmitters read channel
//!   coefficients; every read is checked against the CSIT pattern and logged.
//! - [`scheme`] builds the transmit signals for each synergistic pattern.
//! - [`decoder`] performs the receiver-side combining and solves the
//!   resulting interference-free systems, with a rank-based oracle that
//!   works from raw observations only.
//! - [`pattern_lab`] enumerates and classifies candidate CSIT patterns.
//! - [`metrics`] turns decoded blocks into DoF accounts and finite-SNR
//!   sum-rate slopes.

pub mod channel;
pub mod config;
pub mod csit;
pub mod decoder;
pub mod metrics;
pub mod pattern_lab;
pub mod pipeline;
pub mod scheme;
pub mod view;

pub use num_complex::Complex64 as C64;

pub use channel::{ChannelRealization, Rx, Tx};
pub use config::Tolerances;
pub use csit::{CsitPattern, CsitState, LambdaDistribution, SlotCsit};
pub use decoder::{DecodeReport, EffectiveSystem, Identifiability, ReceivedSignals};
pub use scheme::{CaseKind, SchemeCase, SymbolSet, TransmitBlock};
pub use view::{AuditSummary, CsitView};

/// Number of slots in every implemented scheme.
pub const BLOCK_SLOTS: usize = 4;
