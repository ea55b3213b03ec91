//! Maximal correlation of a pair source and the dependency-spectrum bounds
//! on the disagreement probability `P(e(X^n) != f(Y^n))` of two Boolean
//! functions.
//!
//! With `P_i`, `Q_i` the spectra of `e` under `P_X` and `f` under `P_Y`,
//! `C_i = ψ^{N_i}`, `P = Σ P_i` and `Q = Σ Q_i`:
//!
//! ```text
//! 2√P√Q − 2 Σ C_i √(P_i Q_i)  ≤  P(e ≠ f)  ≤  1 − 2√P√Q + 2 Σ C_i √(P_i Q_i)
//! ```

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::decomposition::{spectrum, spectrum_fast_binary, DependencySpectrum};
use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::model::{BooleanFunction, Marginal, PairSource, SubsetMask, MAX_TABLE_LEN};

/// Largest alphabet accepted by [`psi`].
pub const MAX_PSI_ALPHABET: usize = 64;

/// Exhaustive agreement is computed only when `dx^n · dy^n` is at most this.
pub const MAX_EXACT_PAIRS: u64 = 1 << 26;

const CROSS_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiMethod {
    Spectral,
    BinaryClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaximalCorrelation {
    pub psi: f64,
    pub method: PsiMethod,
    /// One side has a single support symbol; `psi` is 0 by convention.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

/// `|p + q − 2pq − ε| / (2 √(p q (1−p)(1−q)))` for binary `X`, `Y` with
/// `p = P(X = 1)`, `q = P(Y = 1)` and `ε = P(X ≠ Y)`.
pub fn binary_psi_closed_form(p: f64, q: f64, eps: f64) -> f64 {
    let num = (p + q - 2.0 * p * q - eps).abs();
    let den = 2.0 * (p * q * (1.0 - p) * (1.0 - q)).sqrt();
    (num / den).clamp(0.0, 1.0)
}

fn support(m: &Marginal) -> Vec<usize> {
    (0..m.alphabet_size()).filter(|&x| m.prob(x) > 0.0).collect()
}

/// Second singular value of `B(x, y) = P(x, y) / √(P_X(x) P_Y(y))` over the
/// support symbols.
fn spectral_psi(source: &PairSource, sx: &[usize], sy: &[usize]) -> f64 {
    let (px, py) = (source.marginal_x(), source.marginal_y());
    let b: Vec<f64> = sx
        .iter()
        .flat_map(|&x| sy.iter().map(move |&y| (x, y)))
        .map(|(x, y)| source.joint(x, y) / (px.prob(x) * py.prob(y)).sqrt())
        .collect();
    let sv = singular_values(&b, sx.len(), sy.len());
    sv.get(1).copied().unwrap_or(0.0).clamp(0.0, 1.0)
}

fn check_psi_alphabets(source: &PairSource) -> Result<()> {
    if source.dx() > MAX_PSI_ALPHABET || source.dy() > MAX_PSI_ALPHABET {
        return Err(Error::Domain(format!(
            "alphabets {}x{} exceed {MAX_PSI_ALPHABET}",
            source.dx(),
            source.dy()
        )));
    }
    Ok(())
}

/// `ψ` from the singular values alone, for any alphabets; 0 when either
/// marginal is deterministic.
pub fn psi_spectral(source: &PairSource) -> Result<f64> {
    check_psi_alphabets(source)?;
    let sx = support(source.marginal_x());
    let sy = support(source.marginal_y());
    if sx.len() < 2 || sy.len() < 2 {
        return Ok(0.0);
    }
    Ok(spectral_psi(source, &sx, &sy))
}

pub fn psi(source: &PairSource) -> Result<MaximalCorrelation> {
    check_psi_alphabets(source)?;
    let sx = support(source.marginal_x());
    let sy = support(source.marginal_y());
    if sx.len() < 2 || sy.len() < 2 {
        warn!("deterministic marginal: no zero-mean non-constant function exists, psi set to 0");
        return Ok(MaximalCorrelation { psi: 0.0, method: PsiMethod::Spectral, degenerate: true });
    }
    let spectral = spectral_psi(source, &sx, &sy);
    if source.dx() == 2 && source.dy() == 2 {
        let p = source.marginal_x().prob(1);
        let q = source.marginal_y().prob(1);
        let eps = source.joint(0, 1) + source.joint(1, 0);
        let closed = binary_psi_closed_form(p, q, eps);
        if (closed - spectral).abs() > CROSS_CHECK_TOL {
            warn!("binary closed-form psi {closed} disagrees with spectral {spectral}");
        }
        return Ok(MaximalCorrelation {
            psi: closed,
            method: PsiMethod::BinaryClosedForm,
            degenerate: false,
        });
    }
    Ok(MaximalCorrelation { psi: spectral, method: PsiMethod::Spectral, degenerate: false })
}

/// `C_i = psi^{N_i}` for all `2^n` masks, with `0^0 = 1`.
pub fn coefficients_from_psi(psi: f64, n: usize) -> Vec<f64> {
    let powers: Vec<f64> = (0..=n as i32).map(|k| psi.powi(k)).collect();
    (0..1usize << n).map(|m| powers[m.count_ones() as usize]).collect()
}

pub fn bound_coefficients(source: &PairSource, n: usize) -> Result<Vec<f64>> {
    if (1usize << n.min(63)) > MAX_TABLE_LEN {
        return Err(Error::TooLarge(format!("2^{n} masks exceed the table limit")));
    }
    Ok(coefficients_from_psi(psi(source)?.psi, n))
}

/// Joint output probabilities of `(e(X^n), f(Y^n))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AgreementStats {
    /// `P(e = 1, f = 1)`
    pub a: f64,
    /// `P(e = 0, f = 1)`
    pub b: f64,
    /// `P(e = 1, f = 0)`
    pub c: f64,
    /// `P(e = 0, f = 0)`
    pub d: f64,
    /// `P(e ≠ f) = b + c`
    pub sigma: f64,
    /// `P(e = 1)`
    pub s: f64,
    /// `P(f = 1)`
    pub r: f64,
}

impl AgreementStats {
    fn from_cells(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d, sigma: b + c, s: a + c, r: a + b }
    }

    /// Largest violation among the normalization and the linear relations
    /// tying `(a, b, c, d)` to `(σ, s, r)`.
    pub fn relations_residual(&self) -> f64 {
        [
            self.a + self.b + self.c + self.d - 1.0,
            self.a - (self.s + self.r - self.sigma) / 2.0,
            self.b - (self.r + self.sigma - self.s) / 2.0,
            self.c - (self.s - self.r + self.sigma) / 2.0,
            self.d - (1.0 - (self.s + self.r + self.sigma) / 2.0),
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn check_pair(e: &BooleanFunction, f: &BooleanFunction, source: &PairSource) -> Result<()> {
    if e.n() != f.n() || e.n() != source.n() {
        return Err(Error::Domain(format!(
            "blocklengths differ: e has {}, f has {}, source has {}",
            e.n(),
            f.n(),
            source.n()
        )));
    }
    if e.alphabet_size() != source.dx() || f.alphabet_size() != source.dy() {
        return Err(Error::Domain(format!(
            "alphabets ({}, {}) do not match joint {}x{}",
            e.alphabet_size(),
            f.alphabet_size(),
            source.dx(),
            source.dy()
        )));
    }
    Ok(())
}

fn pairwise_sum(cells: &[[f64; 4]]) -> [f64; 4] {
    if cells.len() <= 8 {
        let mut acc = [0.0; 4];
        for c in cells {
            for k in 0..4 {
                acc[k] += c[k];
            }
        }
        return acc;
    }
    let (l, r) = cells.split_at(cells.len() / 2);
    let (l, r) = (pairwise_sum(l), pairwise_sum(r));
    [l[0] + r[0], l[1] + r[1], l[2] + r[2], l[3] + r[3]]
}

fn exact_pairs(source: &PairSource) -> Option<u64> {
    let n = u32::try_from(source.n()).ok()?;
    (source.dx() as u64)
        .checked_pow(n)?
        .checked_mul((source.dy() as u64).checked_pow(n)?)
}

/// Exhaustive enumeration over all `(x^n, y^n)`.
pub fn exact_agreement(
    e: &BooleanFunction,
    f: &BooleanFunction,
    source: &PairSource,
) -> Result<AgreementStats> {
    check_pair(e, f, source)?;
    match exact_pairs(source) {
        Some(pairs) if pairs <= MAX_EXACT_PAIRS => {}
        _ => {
            return Err(Error::TooLarge(format!(
                "{}^{n} x {}^{n} word pairs exceed 2^26; estimate by Monte Carlo instead",
                source.dx(),
                source.dy(),
                n = source.n()
            )))
        }
    }
    let (n, dx, dy) = (source.n(), source.dx(), source.dy());
    let nx = e.table().len();

    let per_x = |x_idx: usize| -> [f64; 4] {
        // Weights ∏_t P(x_t, y_t) over all y^n for this x^n.
        let mut w = Vec::with_capacity(f.table().len());
        w.push(1.0);
        let mut rem = x_idx;
        for _ in 0..n {
            let xt = rem % dx;
            rem /= dx;
            let prev = w.len();
            for y in 1..dy {
                let p = source.joint(xt, y);
                for i in 0..prev {
                    let v = w[i] * p;
                    w.push(v);
                }
            }
            let p0 = source.joint(xt, 0);
            w[..prev].iter_mut().for_each(|v| *v *= p0);
        }
        let (mut ones, mut zeros) = (0.0, 0.0);
        for (wy, &fy) in w.iter().zip(f.table()) {
            if fy {
                ones += wy;
            } else {
                zeros += wy;
            }
        }
        // [a, b, c, d]
        if e.eval(x_idx) {
            [ones, 0.0, zeros, 0.0]
        } else {
            [0.0, ones, 0.0, zeros]
        }
    };

    let cells: Vec<[f64; 4]> = if nx >= 64 {
        (0..nx).into_par_iter().map(per_x).collect()
    } else {
        (0..nx).map(per_x).collect()
    };
    let [a, b, c, d] = pairwise_sum(&cells);
    Ok(AgreementStats::from_cells(a, b, c, d))
}

/// One entry of the bound sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundTerm {
    pub mask: SubsetMask,
    pub c: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationBoundReport {
    /// Lower bound on `P(e ≠ f)`, clamped to `[0, 1]`.
    pub lower: f64,
    /// Upper bound on `P(e ≠ f)`, clamped to `[0, 1]`.
    pub upper: f64,
    /// Weaker lower bound `2 Σ (1 − C_i) √(P_i Q_i)`.
    pub lower_simplified: f64,
    pub raw_lower: f64,
    pub raw_upper: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<AgreementStats>,
    pub psi: f64,
    pub psi_method: PsiMethod,
    pub p_total: f64,
    pub q_total: f64,
    /// `P` or `Q` vanishes: the bounds reduce to `[0, 1]`.
    pub degenerate: bool,
    pub flags: Vec<String>,
    /// Masks where `P_i` or `Q_i` is non-zero.
    pub terms: Vec<BoundTerm>,
}

/// `(raw lower, simplified lower)` from two spectra and coefficients `C_i`.
pub fn lower_bounds_from_spectra(
    p: &DependencySpectrum,
    q: &DependencySpectrum,
    coeffs: &[f64],
) -> (f64, f64) {
    let (mut weighted, mut simplified) = (0.0, 0.0);
    for ((pi, qi), c) in p.variances().iter().zip(q.variances()).zip(coeffs) {
        let cross = (pi * qi).sqrt();
        weighted += c * cross;
        simplified += (1.0 - c) * cross;
    }
    let lower = 2.0 * p.total().sqrt() * q.total().sqrt() - 2.0 * weighted;
    (lower, 2.0 * simplified)
}

/// Spectrum under a marginal, via the binary butterfly when `d = 2`.
pub fn spectrum_for(f: &BooleanFunction, marginal: &Marginal) -> Result<DependencySpectrum> {
    if f.alphabet_size() == 2 && marginal.alphabet_size() == 2 {
        spectrum_fast_binary(f, marginal.prob(1))
    } else {
        spectrum(f, marginal)
    }
}

/// Whether [`theorem_bounds_with`] fills in the exhaustive `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactMode {
    /// Only when the instance is small enough.
    Auto,
    Skip,
    /// Fail with [`Error::TooLarge`] when the instance is too big.
    Require,
}

pub fn theorem_bounds(
    e: &BooleanFunction,
    f: &BooleanFunction,
    source: &PairSource,
) -> Result<CorrelationBoundReport> {
    theorem_bounds_with(e, f, source, ExactMode::Auto)
}

pub fn theorem_bounds_with(
    e: &BooleanFunction,
    f: &BooleanFunction,
    source: &PairSource,
    exact_mode: ExactMode,
) -> Result<CorrelationBoundReport> {
    check_pair(e, f, source)?;
    let p = spectrum_for(e, source.marginal_x())?;
    let q = spectrum_for(f, source.marginal_y())?;
    let mc = psi(source)?;
    let coeffs = coefficients_from_psi(mc.psi, e.n());
    let (raw_lower, lower_simplified) = lower_bounds_from_spectra(&p, &q, &coeffs);
    let raw_upper = 1.0 - raw_lower;

    let mut flags = Vec::new();
    if mc.degenerate {
        flags.push("psi-degenerate-marginal".to_string());
    }
    if source.dx() == 2 && source.dy() == 2 && source.crossover().is_some_and(|eps| eps > 0.5) {
        flags.push("crossover-above-half: C_i uses psi = |1 - 2 eps|".to_string());
    }
    if !(0.0..=1.0).contains(&raw_lower) || !(0.0..=1.0).contains(&raw_upper) {
        flags.push("clamped".to_string());
    }
    let degenerate = p.total() <= 0.0 || q.total() <= 0.0;
    if degenerate {
        flags.push("degenerate: constant function".to_string());
    }
    let (lower, upper) = if degenerate {
        (0.0, 1.0)
    } else {
        (raw_lower.clamp(0.0, 1.0), raw_upper.clamp(0.0, 1.0))
    };

    let exact = match exact_mode {
        ExactMode::Skip => None,
        ExactMode::Require => Some(exact_agreement(e, f, source)?),
        ExactMode::Auto => match exact_pairs(source) {
            Some(pairs) if pairs <= MAX_EXACT_PAIRS => Some(exact_agreement(e, f, source)?),
            _ => None,
        },
    };

    let terms = p
        .variances()
        .iter()
        .zip(q.variances())
        .zip(&coeffs)
        .enumerate()
        .filter(|(_, ((pi, qi), _))| **pi > 0.0 || **qi > 0.0)
        .map(|(m, ((&p, &q), &c))| BoundTerm { mask: SubsetMask::new(m as u32), c, p, q })
        .collect();

    Ok(CorrelationBoundReport {
        lower,
        upper,
        lower_simplified,
        raw_lower,
        raw_upper,
        exact_sigma: exact.map(|s| s.sigma),
        exact,
        psi: mc.psi,
        psi_method: mc.method,
        p_total: p.total(),
        q_total: q.total(),
        degenerate,
        flags,
        terms,
    })
}
