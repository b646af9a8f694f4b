//! Receiver-side combining, solving, and the rank oracle.

mod combine;
mod oracle;
mod solve;

pub use crate::scheme::ReceivedSignals;
pub use combine::{combine, observation_model, EffectiveSystem, ReceiverSystem};
pub use oracle::{numeric_rank, oracle_identifiability, oracle_identifiability_on, u_receiver_of, Identifiability};
pub use solve::{condition_number, solve, solve_with, DecodeError, DecodeReport};
