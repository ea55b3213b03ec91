//! Closed-form converse bounds and rates for the interference-channel and
//! common-source MAC examples. All logarithms are base 2.

use serde::Serialize;

use crate::error::{Error, Result};

/// `−Σ p log2 p`, with `0 log 0 = 0`.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>()
}

pub fn binary_entropy(p: f64) -> f64 {
    entropy_bits(&[p, 1.0 - p])
}

fn check_agreement(p_bar: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p_bar) {
        Ok(())
    } else {
        Err(Error::Domain(format!("average agreement {p_bar} outside [0, 1]")))
    }
}

fn check_q(q: u32) -> Result<()> {
    if q >= 2 {
        Ok(())
    } else {
        Err(Error::Domain(format!("alphabet size {q} below 2")))
    }
}

/// Slack on the upper end of the noise range, for grids computed as
/// `max · k / K`.
const DELTA_TOL: f64 = 1e-12;

fn check_delta(q: u32, delta: f64) -> Result<()> {
    let max = (q - 1) as f64 / q as f64;
    if (0.0..=max + DELTA_TOL).contains(&delta) {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta {delta} outside [0, {max}] for q = {q}")))
    }
}

/// The q-ary noise `N_δ`: 0 with probability `1 − δ`, each other symbol
/// with probability `δ / (q − 1)`.
pub fn noise_distribution(q: u32, delta: f64) -> Result<Vec<f64>> {
    check_q(q)?;
    check_delta(q, delta)?;
    let mut p = vec![delta / (q - 1) as f64; q as usize];
    p[0] = 1.0 - delta;
    Ok(p)
}

/// `H(N_δ) = h_b(δ) + δ log2(q − 1)`.
pub fn noise_entropy(q: u32, delta: f64) -> Result<f64> {
    check_q(q)?;
    check_delta(q, delta)?;
    Ok(binary_entropy(delta) + delta * ((q - 1) as f64).log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IcBoundInput {
    /// `(1/n) Σ_i P(e_{1,i} = e_{22,i})`
    pub avg_agreement: f64,
    /// Erasure-channel alphabet size.
    pub q: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MacBoundInput {
    /// `(1/n) Σ_i P(U_{1,i} = U_{2,i})`
    pub avg_agreement: f64,
    pub q: u32,
    pub delta: f64,
}

/// `p̄ log2 q + 1`.
///
/// The per-symbol form carried through the Fano chain; the lemma's display
/// drops the `log q` factor.
pub fn ic_hz_bound(input: IcBoundInput) -> Result<f64> {
    check_agreement(input.avg_agreement)?;
    check_q(input.q)?;
    Ok(input.avg_agreement * (input.q as f64).log2() + 1.0)
}

/// `p̄ (log2 q − H(N_δ)) + 1`.
pub fn mac_hx_bound(input: MacBoundInput) -> Result<f64> {
    check_agreement(input.avg_agreement)?;
    let h = noise_entropy(input.q, input.delta)?;
    Ok(input.avg_agreement * ((input.q as f64).log2() - h) + 1.0)
}

/// `R_{s,1}` with the input uniform on two symbols:
/// `h(a, a, δ/(q−1), …) − h(1−δ, δ/(q−1), …)` where
/// `a = ½ (1 − (q−2) δ/(q−1))`.
pub fn mac_single_user_rate(q: u32, delta: f64) -> Result<f64> {
    let noise = noise_distribution(q, delta)?;
    let spread = delta / (q - 1) as f64;
    let a = 0.5 * (1.0 - (q - 2) as f64 * spread);
    let mut output = vec![a, a];
    output.extend(std::iter::repeat_n(spread, q as usize - 2));
    Ok(entropy_bits(&output) - entropy_bits(&noise))
}

/// `max(0, target − bound)`; positive when the agreement level cannot
/// carry the target entropy.
pub fn suboptimality_gap(target_h: f64, bound_value: f64) -> f64 {
    (target_h - bound_value).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ic_values() {
        let b = |p| ic_hz_bound(IcBoundInput { avg_agreement: p, q: 16 }).unwrap();
        assert_eq!(b(1.0), 5.0);
        assert_eq!(b(0.0), 1.0);
        assert!((b(0.9) - 4.6).abs() < 1e-12);
        assert!(ic_hz_bound(IcBoundInput { avg_agreement: 1.5, q: 16 }).is_err());
    }

    #[test]
    fn mac_values() {
        let b = |p, q, d| mac_hx_bound(MacBoundInput { avg_agreement: p, q, delta: d }).unwrap();
        assert_eq!(b(0.0, 4, 0.3), 1.0);
        assert!((b(0.7, 8, 0.0) - (0.7 * 3.0 + 1.0)).abs() < 1e-12);
        let h = binary_entropy(0.1) + 0.1 * 3f64.log2();
        assert!((b(1.0, 4, 0.1) - (3.0 - h)).abs() < 1e-12);
        assert!(mac_hx_bound(MacBoundInput { avg_agreement: 0.5, q: 4, delta: 0.8 }).is_err());
    }

    #[test]
    fn noise_entropy_matches_generic() {
        for q in 2..9 {
            for k in 0..=10 {
                let delta = k as f64 / 10.0 * (q - 1) as f64 / q as f64;
                let generic = entropy_bits(&noise_distribution(q, delta).unwrap());
                assert!((noise_entropy(q, delta).unwrap() - generic).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_user_rate() {
        assert!((mac_single_user_rate(2, 0.1).unwrap() - (1.0 - binary_entropy(0.1))).abs() < 1e-12);
        for q in 2..7 {
            assert!((mac_single_user_rate(q, 0.0).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gap() {
        assert_eq!(suboptimality_gap(4.0, 4.6), 0.0);
        assert_eq!(suboptimality_gap(4.6, 4.6), 0.0);
        let bound = ic_hz_bound(IcBoundInput { avg_agreement: 0.7, q: 16 }).unwrap();
        assert!((suboptimality_gap(4.0, bound) - 0.2).abs() < 1e-12);
    }
}
