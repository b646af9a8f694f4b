use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelRealization, Rx, Tx};
use crate::scheme::{receiver_precoders, Assignment, ReceivedSignals, SchemeCase, SYMBOLS, U_SYMBOLS, V_SYMBOLS};
use crate::{BLOCK_SLOTS, C64};

type Row = [C64; BLOCK_SLOTS];

/// One receiver's interference-free equations in its own symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceiverSystem {
    pub receiver: Rx,
    /// Symbol indices (into `u1_1, u1_2, u2, v1, v2`) this receiver decodes.
    pub desired: Vec<usize>,
    /// Weights applied to `y(1..=4)`, one row per combined equation.
    pub combining: DMatrix<C64>,
    /// Combined equations as linear forms in all five symbols.
    pub gains: DMatrix<C64>,
    /// `gains` restricted to the desired columns.
    pub a: DMatrix<C64>,
    /// Combined observations.
    pub b: DVector<C64>,
    /// Covariance of the combined noise.
    pub k: DMatrix<C64>,
}

impl ReceiverSystem {
    fn build(receiver: Rx, desired: &[usize], rows: &[Row], model: &DMatrix<C64>, received: &ReceivedSignals) -> Self {
        let combining = DMatrix::from_fn(rows.len(), BLOCK_SLOTS, |r, t| rows[r][t]);
        let gains = &combining * model;
        let a = DMatrix::from_fn(rows.len(), desired.len(), |r, c| gains[(r, desired[c])]);
        let y = DVector::from_column_slice(received.receiver(receiver));
        let b = &combining * y;
        let k = (&combining * combining.adjoint()).scale(received.noise_power);
        Self {
            receiver,
            desired: desired.to_vec(),
            combining,
            gains,
            a,
            b,
            k,
        }
    }

    /// Largest unintended-symbol coefficient relative to the largest
    /// coefficient of the same equation, over all equations.
    pub fn leakage(&self) -> f64 {
        (0..self.gains.nrows())
            .map(|r| {
                let row = self.gains.row(r);
                let peak = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
                let leak = (0..SYMBOLS)
                    .filter(|c| !self.desired.contains(c))
                    .map(|c| row[c].norm())
                    .fold(0.0, f64::max);
                if peak > 0.0 {
                    leak / peak
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Both receivers' effective systems for one block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSystem {
    pub case: SchemeCase,
    /// System of the receiver that wants `u1_1, u1_2, u2` (3x3).
    pub u: ReceiverSystem,
    /// System of the receiver that wants `v1, v2` (2x2).
    pub v: ReceiverSystem,
    pub noise_power: f64,
}

impl EffectiveSystem {
    pub fn leakage(&self) -> f64 {
        self.u.leakage().max(self.v.leakage())
    }
}

fn unit(slot: usize) -> Row {
    let mut r = [C64::new(0.0, 0.0); BLOCK_SLOTS];
    r[slot - 1] = C64::new(1.0, 0.0);
    r
}

fn lin(terms: &[(C64, Row)]) -> Row {
    let mut out = [C64::new(0.0, 0.0); BLOCK_SLOTS];
    for (w, row) in terms {
        for (o, x) in out.iter_mut().zip(row) {
            *o += w * x;
        }
    }
    out
}

/// Noise-free observation model `y_rx = M x` with `M` the 4x5 map from symbols.
pub fn observation_model(case: &SchemeCase, channels: &ChannelRealization, rx: Rx) -> DMatrix<C64> {
    let precoders = receiver_precoders(case, channels);
    DMatrix::from_fn(BLOCK_SLOTS, SYMBOLS, |t, k| {
        Tx::ALL
            .iter()
            .map(|&tx| channels.h(rx, tx, t + 1) * precoders[tx.index()][t][k])
            .sum()
    })
}

/// Receiver-side combining: cancel interference and stack the equations each
/// receiver decodes from. Receivers know every channel coefficient.
pub fn combine(case: &SchemeCase, channels: &ChannelRealization, received: &ReceivedSignals) -> EffectiveSystem {
    let roles = case.roles();
    let u_rx = roles.u_receiver();
    let v_rx = roles.v_receiver();
    let one = C64::new(1.0, 0.0);
    let hv = |tx, t| channels.h(v_rx, tx, t);

    // v-receiver: rebuild the u-combination from its slots `lead` and `lag`.
    let rebuilt = |lead: usize, lag: usize| lin(&[(hv(Tx::T2, lag), unit(lead)), (-hv(Tx::T2, lead), unit(lag))]);

    let (u_rows, v_rows): (Vec<Row>, Vec<Row>) = match roles.assignment() {
        Assignment::Case1 {
            combined,
            second,
            echo_v,
            echo_u,
        } => (
            vec![
                lin(&[(one, unit(combined)), (-one, unit(echo_v))]),
                unit(second),
                unit(echo_u),
            ],
            vec![
                lin(&[
                    (one, rebuilt(combined, second)),
                    (-hv(Tx::T1, echo_u).inv(), unit(echo_u)),
                ]),
                unit(echo_v),
            ],
        ),
        Assignment::Case2 {
            first,
            second,
            v_only,
            echo,
        } => (
            vec![
                unit(first),
                unit(second),
                lin(&[(one, unit(echo)), (-one, unit(v_only))]),
            ],
            vec![
                unit(v_only),
                lin(&[(one, unit(echo)), (-hv(Tx::T1, echo), rebuilt(first, second))]),
            ],
        ),
        Assignment::Case3 {
            v_only,
            first,
            overlap,
            echo_u,
        } => (
            vec![
                unit(first),
                lin(&[(one, unit(overlap)), (-one, unit(v_only))]),
                unit(echo_u),
            ],
            vec![
                unit(v_only),
                lin(&[
                    (one, rebuilt(overlap, first)),
                    (-hv(Tx::T1, echo_u).inv(), unit(echo_u)),
                ]),
            ],
        ),
    };

    let model_u = observation_model(case, channels, u_rx);
    let model_v = observation_model(case, channels, v_rx);
    EffectiveSystem {
        case: *case,
        u: ReceiverSystem::build(u_rx, &U_SYMBOLS, &u_rows, &model_u, received),
        v: ReceiverSystem::build(v_rx, &V_SYMBOLS, &v_rows, &model_v, received),
        noise_power: received.noise_power,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csit::CsitPattern;
    use crate::scheme::{classify_case, encode, transmit, SymbolSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(pat: &str, seed: u64, symbols: Option<SymbolSet>, noise: f64) -> (EffectiveSystem, SymbolSet) {
        let pattern: CsitPattern = pat.parse().unwrap();
        let case = classify_case(&pattern).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = ChannelRealization::draw_with(&mut rng, 4);
        let s = symbols.unwrap_or_else(|| SymbolSet::random(&mut rng));
        let block = encode(&pattern, &case, &s, &h).unwrap();
        let y = transmit(&block, &h, noise, &mut rng);
        (combine(&case, &h, &y), s)
    }

    #[test]
    fn case1_first_equation_cancels_v() {
        let (sys, _) = run("DD,ND,PN,NN", 1, None, 0.0);
        let row = sys.u.gains.row(0);
        let peak = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(row[3].norm() < 1e-10 * peak && row[4].norm() < 1e-10 * peak);
        assert!(sys.leakage() < 1e-10);
    }

    #[test]
    fn zero_symbols_zero_observations() {
        let (sys, _) = run("DD,ND,PN,NN", 2, Some(SymbolSet::zero()), 0.0);
        assert!(sys.u.b.iter().all(|c| c.norm() == 0.0));
        assert!(sys.v.b.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn case2_v_receiver_second_equation_is_pure_v() {
        let (sys, _) = run("ND,ND,DN,PN", 3, None, 0.0);
        let row = sys.v.gains.row(1);
        let peak = row.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for k in U_SYMBOLS {
            assert!(row[k].norm() < 1e-10 * peak, "u-coefficient {k}: {}", row[k]);
        }
    }

    #[test]
    fn noise_free_b_equals_a_times_symbols() {
        for pat in ["DD,ND,PN,NN", "ND,ND,DN,PN", "ND,DN,PD,NN", "DN,PD,ND,NN"] {
            let (sys, s) = run(pat, 4, None, 0.0);
            let arr = s.to_array();
            for rs in [&sys.u, &sys.v] {
                let x = DVector::from_iterator(rs.desired.len(), rs.desired.iter().map(|&k| arr[k]));
                let err = (&rs.a * x - &rs.b).norm() / rs.b.norm();
                assert!(err < 1e-12, "{pat}: {err}");
            }
        }
    }

    #[test]
    fn covariance_is_hermitian_psd() {
        let (sys, _) = run("ND,DN,PD,NN", 5, None, 0.5);
        for k in [&sys.u.k, &sys.v.k] {
            assert!((k - k.adjoint()).norm() < 1e-12 * k.norm());
            let eig = k.clone().symmetric_eigenvalues();
            assert!(eig.iter().all(|&l| l > -1e-12));
        }
    }

    #[test]
    fn shapes() {
        let (sys, _) = run("DN,ND,PD,NN", 6, None, 0.0);
        assert_eq!(sys.u.a.shape(), (3, 3));
        assert_eq!(sys.v.a.shape(), (2, 2));
        assert_eq!(sys.u.k.shape(), (3, 3));
        assert_eq!(sys.v.k.shape(), (2, 2));
    }
}
