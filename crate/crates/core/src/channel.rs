//! Fading coefficients of the 2x2 X-channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::C64;

/// Draws with magnitude below this are thrown away and redrawn.
pub const MIN_MAGNITUDE: f64 = 1e-12;

/// Receiver index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rx {
    R1,
    R2,
}

impl Rx {
    pub const ALL: [Rx; 2] = [Rx::R1, Rx::R2];

    pub fn other(self) -> Rx {
        match self {
            Rx::R1 => Rx::R2,
            Rx::R2 => Rx::R1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Rx::R1 => 0,
            Rx::R2 => 1,
        }
    }
}

impl fmt::Display for Rx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.index() + 1)
    }
}

/// Transmitter index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tx {
    T1,
    T2,
}

impl Tx {
    pub const ALL: [Tx; 2] = [Tx::T1, Tx::T2];

    pub fn index(self) -> usize {
        match self {
            Tx::T1 => 0,
            Tx::T2 => 1,
        }
    }
}

impl fmt::Display for Tx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.index() + 1)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("coefficient h[{rx},{tx}]({slot}) = {value} is zero or not finite")]
    InvalidCoefficient { rx: Rx, tx: Tx, slot: usize, value: C64 },
    #[error("a realization needs at least one slot")]
    NoSlots,
}

/// Sample a circularly symmetric complex normal value with the given variance.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * scale, im * scale)
}

/// All coefficients `h_ij(t)` of an `n`-slot block.
///
/// Slots are numbered from 1, matching the usual `h_ij(t)` notation. Every
/// coefficient is finite and has magnitude at least [`MIN_MAGNITUDE`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    slots: usize,
    coeffs: Vec<C64>,
}

impl ChannelRealization {
    /// Draw i.i.d. CN(0,1) coefficients from a seeded stream.
    pub fn draw(seed: u64, slots: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::draw_with(&mut rng, slots)
    }

    /// Draw from a caller-owned generator. Panics if `slots == 0`.
    pub fn draw_with<R: Rng + ?Sized>(rng: &mut R, slots: usize) -> Self {
        assert!(slots >= 1, "a realization needs at least one slot");
        let coeffs = (0..4 * slots)
            .map(|_| loop {
                let h = complex_normal(rng, 1.0);
                if h.norm() >= MIN_MAGNITUDE {
                    break h;
                }
            })
            .collect();
        Self { slots, coeffs }
    }

    /// Build a realization from explicit values, e.g. for hand-made test channels.
    pub fn from_fn(slots: usize, mut f: impl FnMut(Rx, Tx, usize) -> C64) -> Result<Self, ChannelError> {
        if slots == 0 {
            return Err(ChannelError::NoSlots);
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); 4 * slots];
        for slot in 1..=slots {
            for rx in Rx::ALL {
                for tx in Tx::ALL {
                    let value = f(rx, tx, slot);
                    if !(value.re.is_finite() && value.im.is_finite()) || value.norm() < MIN_MAGNITUDE {
                        return Err(ChannelError::InvalidCoefficient { rx, tx, slot, value });
                    }
                    coeffs[Self::offset(rx, tx, slot)] = value;
                }
            }
        }
        Ok(Self { slots, coeffs })
    }

    fn offset(rx: Rx, tx: Tx, slot: usize) -> usize {
        (slot - 1) * 4 + rx.index() * 2 + tx.index()
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Coefficient from `tx` to `rx` in `slot` (1-based).
    pub fn h(&self, rx: Rx, tx: Tx, slot: usize) -> C64 {
        assert!(
            (1..=self.slots).contains(&slot),
            "slot {slot} outside 1..={}",
            self.slots
        );
        self.coeffs[Self::offset(rx, tx, slot)]
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coeffs
    }
}
