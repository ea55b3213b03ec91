use crate::error::{Error, Result};
use crate::model::{BooleanFunction, Marginal, MAX_EXACT_N};

use super::{real_transform, DependencySpectrum, RealTransform};

/// Orthogonal basis of the zero-mean single-letter functions, each with
/// second moment `q (1 - q)` where `q = P(X != 0)`.
///
/// Built by Gram-Schmidt on the indicators `1{X = l}`, `l = 1..d`, under the
/// marginal. Symbols of zero probability contribute no basis function, and
/// a deterministic marginal yields an empty basis. When symbol 0 has zero
/// probability but the support still has two symbols, `q (1 - q) = 0` and
/// no basis with that normalization exists.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasedBasis {
    d: usize,
    q: f64,
    functions: Vec<Vec<f64>>,
}

fn inner(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    a.iter().zip(b).zip(p).map(|((a, b), p)| a * b * p).sum()
}

impl BiasedBasis {
    pub fn new(marginal: &Marginal) -> Result<Self> {
        let d = marginal.alphabet_size();
        let p = marginal.probs();
        let q = marginal.nonzero_mass();
        let scale = q * (1.0 - q);
        if scale == 0.0 && marginal.support_size() > 1 {
            return Err(Error::Domain(
                "P(X = 0) = 0 with a non-trivial support leaves no q(1-q)-normalized basis".into(),
            ));
        }
        let mut functions: Vec<Vec<f64>> = Vec::new();
        if scale > 0.0 {
            for l in 1..d {
                let mut v: Vec<f64> =
                    (0..d).map(|x| if x == l { 1.0 } else { 0.0 } - p[l]).collect();
                for h in &functions {
                    let proj = inner(&v, h, p) / inner(h, h, p);
                    v.iter_mut().zip(h).for_each(|(a, b)| *a -= proj * b);
                }
                let norm2 = inner(&v, &v, p);
                if norm2 <= 1e-13 {
                    continue;
                }
                let s = (scale / norm2).sqrt();
                v.iter_mut().for_each(|a| *a *= s);
                functions.push(v);
            }
        }
        Ok(Self { d, q, functions })
    }

    pub fn alphabet_size(&self) -> usize {
        self.d
    }

    /// `q (1 - q)`, the common second moment.
    pub fn scale(&self) -> f64 {
        self.q * (1.0 - self.q)
    }

    /// Basis functions as value vectors over the alphabet.
    pub fn functions(&self) -> &[Vec<f64>] {
        &self.functions
    }
}

/// Expansion coefficients of `ẽ` in the product basis `{1, h̃_1, …}^{⊗n}`.
///
/// The returned array is indexed in mixed radix by `(l_0, …, l_{n-1})`
/// with `l_t = 0` the constant function and `l_t ≥ 1` the basis function
/// `h̃_{l_t}`. Coefficients are basis-relative; only their squared sums per
/// mask are basis-invariant.
pub fn basis_coefficients(f: &RealTransform, source: &Marginal) -> Result<(BiasedBasis, Vec<f64>)> {
    if f.n() > MAX_EXACT_N {
        return Err(Error::TooLarge(format!("blocklength {} exceeds {MAX_EXACT_N}", f.n())));
    }
    if f.alphabet_size() != source.alphabet_size() {
        return Err(Error::Domain("function and source alphabets differ".into()));
    }
    let basis = BiasedBasis::new(source)?;
    let (d, p) = (basis.d, source.probs());
    let scale = basis.scale();
    let mut c = f.values().to_vec();
    let mut fiber = vec![0.0; d];
    for t in 0..f.n() {
        let stride = d.pow(t as u32);
        for block in c.chunks_mut(stride * d) {
            for inner_idx in 0..stride {
                for (x, slot) in fiber.iter_mut().enumerate() {
                    *slot = block[x * stride + inner_idx];
                }
                block[inner_idx] = fiber.iter().zip(p).map(|(v, p)| v * p).sum();
                for l in 1..d {
                    block[l * stride + inner_idx] = match basis.functions.get(l - 1) {
                        Some(h) => inner(&fiber, h, p) / scale,
                        None => 0.0,
                    };
                }
            }
        }
    }
    Ok((basis, c))
}

/// Spectrum through the basis expansion:
/// `P_i = Σ c_{i,(l_t)}^2 (q (1 - q))^{N_i}`.
pub fn spectrum_via_basis(f: &BooleanFunction, source: &Marginal) -> Result<DependencySpectrum> {
    let rt = real_transform(f, source)?;
    let (basis, coeffs) = basis_coefficients(&rt, source)?;
    let (n, d) = (rt.n(), rt.alphabet_size());
    let powers: Vec<f64> = (0..=n as i32).map(|k| basis.scale().powi(k)).collect();
    let mut variances = vec![0.0; 1 << n];
    for (idx, c) in coeffs.iter().enumerate() {
        let (mut rem, mut mask) = (idx, 0usize);
        for t in 0..n {
            if rem % d != 0 {
                mask |= 1 << t;
            }
            rem /= d;
        }
        if mask != 0 {
            variances[mask] += c * c * powers[mask.count_ones() as usize];
        }
    }
    Ok(DependencySpectrum::from_parts(n, variances, rt.variance()))
}

/// Coefficients `c_i` of `ẽ = Σ_i c_i ∏_{t ∈ i} h̃(X_t)` with
/// `h̃(1) = 1 - q`, `h̃(0) = -q`, by an in-place butterfly over the
/// coordinates. Returns `(s, c)` with `c[0] = 0`.
pub fn binary_coefficients(f: &BooleanFunction, q: f64) -> Result<(f64, Vec<f64>)> {
    if f.alphabet_size() != 2 {
        return Err(Error::UnsupportedAlphabet { found: f.alphabet_size(), expected: 2 });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("bias {q} outside [0, 1]")));
    }
    let mut c: Vec<f64> = f.table().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    for t in 0..f.n() {
        let half = 1usize << t;
        for block in c.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi) {
                let diff = *b - *a;
                *a += q * diff;
                *b = diff;
            }
        }
    }
    let s = c[0];
    c[0] = 0.0;
    Ok((s, c))
}

/// `P_i = c_i^2 (q (1 - q))^{N_i}` from [`binary_coefficients`].
pub fn spectrum_fast_binary(f: &BooleanFunction, q: f64) -> Result<DependencySpectrum> {
    let (s, c) = binary_coefficients(f, q)?;
    let n = f.n();
    let var1 = q * (1.0 - q);
    let powers: Vec<f64> = (0..=n as i32).map(|k| var1.powi(k)).collect();
    let variances = c
        .iter()
        .enumerate()
        .map(|(m, c)| if m == 0 { 0.0 } else { c * c * powers[m.count_ones() as usize] })
        .collect();
    Ok(DependencySpectrum::from_parts(n, variances, s * (1.0 - s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::spectrum;
    use crate::model::SubsetMask;

    #[test]
    fn binary_basis_matches_closed_form() {
        let q = 0.3;
        let basis = BiasedBasis::new(&Marginal::bernoulli(q).unwrap()).unwrap();
        assert_eq!(basis.functions().len(), 1);
        let h = &basis.functions()[0];
        assert!((h[0] + q).abs() < 1e-15 && (h[1] - (1.0 - q)).abs() < 1e-15);
    }

    #[test]
    fn ternary_basis_invariants() {
        let m = Marginal::new(vec![0.2, 0.5, 0.3]).unwrap();
        let basis = BiasedBasis::new(&m).unwrap();
        let p = m.probs();
        let scale = basis.scale();
        assert_eq!(basis.functions().len(), 2);
        for (i, h) in basis.functions().iter().enumerate() {
            assert!(inner(h, &[1.0; 3], p).abs() < 1e-12);
            assert!((inner(h, h, p) - scale).abs() < 1e-10);
            for g in &basis.functions()[i + 1..] {
                assert!(inner(h, g, p).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_marginals_shrink_the_basis() {
        let m = Marginal::new(vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(BiasedBasis::new(&m).unwrap().functions().len(), 1);
        let point = Marginal::new(vec![0.0, 1.0, 0.0]).unwrap();
        assert!(BiasedBasis::new(&point).unwrap().functions().is_empty());
        let no_zero = Marginal::new(vec![0.0, 0.5, 0.5]).unwrap();
        assert!(BiasedBasis::new(&no_zero).is_err());
    }

    #[test]
    fn xor_coefficient_at_half() {
        let (s, c) = binary_coefficients(&BooleanFunction::parity(2).unwrap(), 0.5).unwrap();
        assert_eq!(s, 0.5);
        assert!((c[3].abs() - 2.0).abs() < 1e-12);
        let fast = spectrum_fast_binary(&BooleanFunction::parity(2).unwrap(), 0.5).unwrap();
        assert!((fast.get(SubsetMask::new(3)) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn biased_xor_has_single_letter_mass() {
        let s = spectrum_fast_binary(&BooleanFunction::parity(2).unwrap(), 0.3).unwrap();
        assert!(s.get(SubsetMask::new(0b01)) > 1e-3);
        assert!(s.get(SubsetMask::new(0b10)) > 1e-3);
    }

    #[test]
    fn constant_function_has_zero_coefficients() {
        for q in [0.0, 0.2, 0.5, 1.0] {
            let (_, c) = binary_coefficients(&BooleanFunction::constant(4, 2, true).unwrap(), q).unwrap();
            assert!(c.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn fast_path_rejects_ternary() {
        let f = BooleanFunction::constant(2, 3, true).unwrap();
        assert!(matches!(
            spectrum_fast_binary(&f, 0.5),
            Err(Error::UnsupportedAlphabet { found: 3, expected: 2 })
        ));
    }

    #[test]
    fn basis_route_matches_spectrum_for_ternary() {
        let m = Marginal::new(vec![0.2, 0.5, 0.3]).unwrap();
        let f = BooleanFunction::from_fn(3, 3, |w| (w[0] + 2 * w[1] + w[0] * w[2]) % 3 == 1).unwrap();
        let a = spectrum(&f, &m).unwrap();
        let b = spectrum_via_basis(&f, &m).unwrap();
        for (x, y) in a.variances().iter().zip(b.variances()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
