//! Orthogonal decomposition of Boolean functions of a product source.
//!
//! A Boolean function `e` is first recentred into its real transform `ẽ`
//! (`1 - s` where `e = 1`, `-s` where `e = 0`, with `s = P(e = 1)`). The
//! transform splits uniquely into components `ẽ_i`, one per coordinate
//! subset `i`, where `ẽ_i` depends only on the coordinates in `i` and has
//! zero conditional mean along each of them. The component variances
//! `P_i` form the dependency spectrum.
//!
//! The spectrum is computed from the second moments
//! `M_i = E[E[ẽ | X_i]^2]` followed by a Möbius inversion over the subset
//! lattice, since `M_i = Σ_{j ≤ i} P_j`. The moments are obtained by a
//! depth-first walk that sums coordinates out one at a time, keeping only
//! arrays indexed by the in-mask sub-word.

mod basis;

pub use basis::{
    binary_coefficients, spectrum_fast_binary, spectrum_via_basis, BiasedBasis,
};

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{enumerate_submasks, BooleanFunction, Marginal, SubsetMask, MAX_EXACT_N};

/// Below this blocklength everything runs on the calling thread.
const PARALLEL_MIN_N: usize = 12;

/// Variances in `(-CLAMP_TOL, 0)` are treated as rounding noise.
const CLAMP_TOL: f64 = 1e-9;

/// Zero-mean real transform of a Boolean function under a product source.
#[derive(Debug, Clone, PartialEq)]
pub struct RealTransform {
    n: usize,
    d: usize,
    values: Vec<f64>,
    one_prob: f64,
}

impl RealTransform {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `s = P(e = 1)`.
    pub fn one_prob(&self) -> f64 {
        self.one_prob
    }

    /// `Var(ẽ) = s (1 - s)`.
    pub fn variance(&self) -> f64 {
        self.one_prob * (1.0 - self.one_prob)
    }
}

fn check_alphabet(f_d: usize, source: &Marginal) -> Result<()> {
    if f_d != source.alphabet_size() {
        return Err(Error::Domain(format!(
            "function alphabet {f_d} does not match source alphabet {}",
            source.alphabet_size()
        )));
    }
    Ok(())
}

fn check_exact_n(n: usize) -> Result<()> {
    if n > MAX_EXACT_N {
        return Err(Error::TooLarge(format!(
            "blocklength {n} exceeds {MAX_EXACT_N} for exact decomposition"
        )));
    }
    Ok(())
}

pub fn real_transform(f: &BooleanFunction, source: &Marginal) -> Result<RealTransform> {
    check_alphabet(f.alphabet_size(), source)?;
    let probs = source.word_probs(f.n())?;
    let (mut s, mut zeros) = (0.0, 0.0);
    for (&b, p) in f.table().iter().zip(&probs) {
        if b {
            s += p;
        } else {
            zeros += p;
        }
    }
    // Keep s exactly 1 when e = 1 almost surely.
    if zeros == 0.0 {
        s = 1.0;
    }
    let values = f.table().iter().map(|&b| if b { 1.0 - s } else { -s }).collect();
    Ok(RealTransform { n: f.n(), d: f.alphabet_size(), values, one_prob: s })
}

/// Sums coordinate `t` out of an array indexed by the sub-word over `present`.
fn sum_out(arr: &[f64], d: usize, present: u32, t: usize) -> Vec<f64> {
    let pos = (present & ((1u32 << t) - 1)).count_ones();
    let stride = d.pow(pos);
    let mut out = vec![0.0; arr.len() / d];
    for (dst, chunk) in out.chunks_mut(stride).zip(arr.chunks(stride * d)) {
        for fiber in chunk.chunks(stride) {
            dst.iter_mut().zip(fiber).for_each(|(o, v)| *o += v);
        }
    }
    out
}

/// Sums every coordinate outside `mask` out of a full table.
fn compact_sums(full: &[f64], d: usize, n: usize, mask: SubsetMask) -> Vec<f64> {
    let mut present = SubsetMask::full(n).bits();
    let mut arr = full.to_vec();
    for t in (0..n).rev().filter(|&t| !mask.contains_coord(t)) {
        arr = sum_out(&arr, d, present, t);
        present &= !(1 << t);
    }
    arr
}

/// Broadcasts an in-mask array back to a full table.
fn expand(compact: &[f64], d: usize, n: usize, mask: SubsetMask, len: usize) -> Vec<f64> {
    (0..len)
        .map(|idx| {
            let (mut rem, mut ci, mut mult) = (idx, 0, 1);
            for t in 0..n {
                let digit = rem % d;
                rem /= d;
                if mask.contains_coord(t) {
                    ci += digit * mult;
                    mult *= d;
                }
            }
            compact[ci]
        })
        .collect()
}

/// `E[values | X_mask]` evaluated at every word. Conditioning on a
/// zero-probability sub-word yields 0.
pub fn conditional_expectation(
    values: &[f64],
    source: &Marginal,
    n: usize,
    mask: SubsetMask,
) -> Result<Vec<f64>> {
    let d = source.alphabet_size();
    let probs = source.word_probs(n)?;
    if values.len() != probs.len() {
        return Err(Error::Domain(format!(
            "table of length {} does not match {d}^{n}",
            values.len()
        )));
    }
    let weighted: Vec<f64> = values.iter().zip(&probs).map(|(v, p)| v * p).collect();
    Ok(conditional_from_weighted(&weighted, &probs, d, n, mask))
}

fn conditional_from_weighted(
    weighted: &[f64],
    probs: &[f64],
    d: usize,
    n: usize,
    mask: SubsetMask,
) -> Vec<f64> {
    let g = compact_sums(weighted, d, n, mask);
    let p = compact_sums(probs, d, n, mask);
    let ce: Vec<f64> = g.iter().zip(&p).map(|(g, p)| if *p > 0.0 { g / p } else { 0.0 }).collect();
    expand(&ce, d, n, mask, weighted.len())
}

/// Component `ẽ_i` tabulated over every word.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTable {
    pub mask: SubsetMask,
    pub values: Vec<f64>,
}

/// Memoized evaluation of `ẽ_i = E[ẽ | X_i] - Σ_{j < i} ẽ_j`.
struct ComponentMemo {
    n: usize,
    d: usize,
    probs: Vec<f64>,
    weighted: Vec<f64>,
    memo: HashMap<u32, Vec<f64>>,
}

impl ComponentMemo {
    fn new(f: &RealTransform, source: &Marginal) -> Result<Self> {
        check_exact_n(f.n)?;
        check_alphabet(f.d, source)?;
        let probs = source.word_probs(f.n)?;
        let weighted = f.values.iter().zip(&probs).map(|(v, p)| v * p).collect();
        Ok(Self { n: f.n, d: f.d, probs, weighted, memo: HashMap::new() })
    }

    fn ensure(&mut self, i: SubsetMask) {
        if self.memo.contains_key(&i.bits()) {
            return;
        }
        let mut values = if i == SubsetMask::EMPTY {
            // ẽ has zero mean, so the constant component vanishes.
            vec![0.0; self.weighted.len()]
        } else {
            conditional_from_weighted(&self.weighted, &self.probs, self.d, self.n, i)
        };
        for j in enumerate_submasks(i).into_iter().filter(|&j| j != i) {
            self.ensure(j);
            let cj = &self.memo[&j.bits()];
            values.iter_mut().zip(cj).for_each(|(v, c)| *v -= c);
        }
        self.memo.insert(i.bits(), values);
    }

    fn take(&mut self, i: SubsetMask) -> ComponentTable {
        self.ensure(i);
        ComponentTable { mask: i, values: self.memo[&i.bits()].clone() }
    }
}

pub fn component(f: &RealTransform, i: SubsetMask, source: &Marginal) -> Result<ComponentTable> {
    if i.bits() & !SubsetMask::full(f.n).bits() != 0 {
        return Err(Error::Domain(format!("mask {:#x} has coordinates beyond n={}", i.bits(), f.n)));
    }
    Ok(ComponentMemo::new(f, source)?.take(i))
}

/// Every component, indexed by mask bits.
pub fn decompose(f: &RealTransform, source: &Marginal) -> Result<Vec<ComponentTable>> {
    let mut memo = ComponentMemo::new(f, source)?;
    Ok((0..1u32 << f.n).map(|bits| memo.take(SubsetMask::new(bits))).collect())
}

/// Component variances `P_i` for all `2^n` masks.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencySpectrum {
    n: usize,
    variances: Vec<f64>,
    total: f64,
}

impl DependencySpectrum {
    pub(crate) fn from_parts(n: usize, variances: Vec<f64>, total: f64) -> Self {
        debug_assert_eq!(variances.len(), 1 << n);
        Self { n, variances, total }
    }

    /// Inverts `M_i = Σ_{j ≤ i} P_j`, clamping rounding noise to zero.
    pub(crate) fn from_moments(n: usize, mut moments: Vec<f64>, total: f64) -> Result<Self> {
        for bit in 0..n {
            let b = 1usize << bit;
            for m in 0..moments.len() {
                if m & b != 0 {
                    moments[m] -= moments[m ^ b];
                }
            }
        }
        moments[0] = 0.0;
        for (mask, v) in moments.iter_mut().enumerate() {
            if *v < -CLAMP_TOL {
                return Err(Error::NegativeVariance { mask: mask as u32, value: *v });
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(Self::from_parts(n, moments, total))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `P = Var(ẽ) = s (1 - s)`.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn get(&self, mask: SubsetMask) -> f64 {
        self.variances[mask.bits() as usize]
    }

    /// Variances indexed by mask bits.
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn sum(&self) -> f64 {
        self.variances.iter().sum()
    }

    /// `(mask, P_i)` for every strictly positive entry.
    pub fn nonzero(&self) -> impl Iterator<Item = (SubsetMask, f64)> + '_ {
        self.variances
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(m, &v)| (SubsetMask::new(m as u32), v))
    }

    /// `Σ_{N_i ≤ max_weight, i ≠ exclude} P_i`.
    pub fn low_weight_mass(&self, max_weight: u32, exclude: Option<SubsetMask>) -> f64 {
        self.variances
            .iter()
            .enumerate()
            .filter(|(m, _)| (*m as u32).count_ones() <= max_weight)
            .filter(|(m, _)| exclude.is_none_or(|e| e.bits() != *m as u32))
            .map(|(_, v)| v)
            .sum()
    }
}

/// `(k, Σ_{N_i = k} P_i)` for `k = 0..=n`.
pub fn k_letter_profile(s: &DependencySpectrum) -> Vec<(usize, f64)> {
    let mut profile: Vec<(usize, f64)> = (0..=s.n).map(|k| (k, 0.0)).collect();
    for (m, v) in s.variances.iter().enumerate() {
        profile[m.count_ones() as usize].1 += v;
    }
    profile
}

fn second_moment(g: &[f64], p: &[f64]) -> f64 {
    g.iter().zip(p).filter(|(_, p)| **p > 0.0).map(|(g, p)| g * g / p).sum()
}

/// Records `M_mask` and recurses into the masks obtained by removing one
/// coordinate below `limit`, so each subset is reached exactly once.
fn visit(g: &[f64], p: &[f64], d: usize, mask: u32, limit: usize, out: &mut Vec<(u32, f64)>) {
    out.push((mask, second_moment(g, p)));
    for t in (0..limit).filter(|t| mask >> t & 1 == 1) {
        let cg = sum_out(g, d, mask, t);
        let cp = sum_out(p, d, mask, t);
        visit(&cg, &cp, d, mask & !(1 << t), t, out);
    }
}

pub fn spectrum(f: &BooleanFunction, source: &Marginal) -> Result<DependencySpectrum> {
    check_exact_n(f.n())?;
    let rt = real_transform(f, source)?;
    let (n, d) = (rt.n, rt.d);
    let probs = source.word_probs(n)?;
    let weighted: Vec<f64> = rt.values.iter().zip(&probs).map(|(v, p)| v * p).collect();
    let full = SubsetMask::full(n).bits();

    let mut pairs = Vec::with_capacity(1 << n);
    if n >= PARALLEL_MIN_N {
        pairs.push((full, second_moment(&weighted, &probs)));
        let branches: Vec<Vec<(u32, f64)>> = (0..n)
            .into_par_iter()
            .map(|t| {
                let mut out = Vec::new();
                let g = sum_out(&weighted, d, full, t);
                let p = sum_out(&probs, d, full, t);
                visit(&g, &p, d, full & !(1 << t), t, &mut out);
                out
            })
            .collect();
        pairs.extend(branches.into_iter().flatten());
    } else {
        visit(&weighted, &probs, d, full, n, &mut pairs);
    }

    let mut moments = vec![0.0; 1 << n];
    for (mask, m) in pairs {
        moments[mask as usize] = m;
    }
    DependencySpectrum::from_moments(n, moments, rt.variance())
}
