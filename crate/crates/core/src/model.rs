//! Domain types shared by every module: alphabets and distributions,
//! Boolean functions given by truth tables, and subset masks.
//!
//! Words over an alphabet of size `d` are indexed in mixed radix with
//! position 0 varying fastest, so coordinate `t` (`X_{t+1}` in one-based notation)
//! corresponds to bit `t` of a [`SubsetMask`]. For binary alphabets the word
//! index is simply the bit pattern of the input.

use crate::error::{Error, Result};

/// Tolerance on probability vectors summing to one.
pub const PROB_TOL: f64 = 1e-12;

/// Largest blocklength accepted by the exact (table based) general paths.
pub const MAX_EXACT_N: usize = 20;

/// Largest truth table this crate will materialize.
pub const MAX_TABLE_LEN: usize = 1 << 24;

/// `d^n`, or `None` when it overflows or exceeds [`MAX_TABLE_LEN`].
pub fn table_len(d: usize, n: usize) -> Option<usize> {
    let n = u32::try_from(n).ok()?;
    d.checked_pow(n).filter(|&len| len <= MAX_TABLE_LEN)
}

fn check_probs(probs: &[f64], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::Domain(format!("{what}: empty probability vector")));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::Domain(format!("{what}: invalid probability {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::Domain(format!("{what}: probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// Single-letter distribution over the symbols `0..d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    probs: Vec<f64>,
}

impl Marginal {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_probs(&probs, "marginal")?;
        Ok(Self { probs })
    }

    /// Binary marginal with `P(X = 1) = p_one`.
    pub fn bernoulli(p_one: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_one) {
            return Err(Error::Domain(format!("bias {p_one} outside [0, 1]")));
        }
        Ok(Self { probs: vec![1.0 - p_one, p_one] })
    }

    pub fn uniform(d: usize) -> Self {
        assert!(d > 0, "alphabet must be non-empty");
        Self { probs: vec![1.0 / d as f64; d] }
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    /// `P(X != 0)`.
    pub fn nonzero_mass(&self) -> f64 {
        self.probs[1..].iter().sum()
    }

    /// Number of symbols with positive probability.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// Product probabilities of all `d^n` words, in word-index order.
    pub fn word_probs(&self, n: usize) -> Result<Vec<f64>> {
        let d = self.alphabet_size();
        let len = table_len(d, n)
            .ok_or_else(|| Error::TooLarge(format!("{d}^{n} words exceed the table limit")))?;
        let mut table = Vec::with_capacity(len);
        table.push(1.0);
        for _ in 0..n {
            let prev = table.len();
            for x in 1..d {
                for idx in 0..prev {
                    let v = table[idx] * self.probs[x];
                    table.push(v);
                }
            }
            let p0 = self.probs[0];
            table[..prev].iter_mut().for_each(|v| *v *= p0);
        }
        Ok(table)
    }
}

/// `∏_t P_X(word_t)`.
pub fn product_prob(source: &Marginal, word: &[usize]) -> Result<f64> {
    let d = source.alphabet_size();
    word.iter().try_fold(1.0, |acc, &x| {
        if x >= d {
            Err(Error::Domain(format!("symbol {x} outside alphabet of size {d}")))
        } else {
            Ok(acc * source.prob(x))
        }
    })
}

/// Decodes a word index into its symbols, position 0 first.
pub fn decode_word(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut word = Vec::with_capacity(n);
    for _ in 0..n {
        word.push(index % d);
        index /= d;
    }
    word
}

/// Inverse of [`decode_word`].
pub fn encode_word(word: &[usize], d: usize) -> usize {
    word.iter().rev().fold(0, |acc, &x| acc * d + x)
}

/// Memoryless pair source `P_{X,Y}` with blocklength `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSource {
    dx: usize,
    dy: usize,
    joint: Vec<f64>,
    n: usize,
    px: Marginal,
    py: Marginal,
}

impl PairSource {
    /// Builds a source from a `dx × dy` joint probability matrix.
    pub fn new(joint: Vec<Vec<f64>>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("blocklength must be positive".into()));
        }
        let dx = joint.len();
        let dy = joint.first().map_or(0, Vec::len);
        if dx == 0 || dy == 0 {
            return Err(Error::Domain("joint matrix must be non-empty".into()));
        }
        if joint.iter().any(|row| row.len() != dy) {
            return Err(Error::Domain("joint matrix rows have different lengths".into()));
        }
        let flat: Vec<f64> = joint.into_iter().flatten().collect();
        check_probs(&flat, "joint")?;
        let px = (0..dx).map(|x| flat[x * dy..(x + 1) * dy].iter().sum()).collect();
        let py = (0..dy).map(|y| (0..dx).map(|x| flat[x * dy + y]).sum()).collect();
        Ok(Self {
            dx,
            dy,
            joint: flat,
            n,
            px: Marginal { probs: px },
            py: Marginal { probs: py },
        })
    }

    /// Binary pair with both marginals `Bern(q)` and `P(X != Y) = eps`.
    pub fn symmetric_binary(q: f64, eps: f64, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&eps) {
            return Err(Error::Domain(format!("bias {q} or crossover {eps} outside [0, 1]")));
        }
        let half = eps / 2.0;
        if half > q.min(1.0 - q) + PROB_TOL {
            return Err(Error::Domain(format!(
                "crossover {eps} not realizable with both marginals Bern({q})"
            )));
        }
        let p11 = (q - half).max(0.0);
        let p00 = (1.0 - q - half).max(0.0);
        Self::new(vec![vec![p00, half], vec![half, p11]], n)
    }

    /// Doubly symmetric binary source with crossover `eps`.
    pub fn dsbs(eps: f64, n: usize) -> Result<Self> {
        Self::symmetric_binary(0.5, eps, n)
    }

    pub fn dx(&self) -> usize {
        self.dx
    }

    pub fn dy(&self) -> usize {
        self.dy
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn joint(&self, x: usize, y: usize) -> f64 {
        self.joint[x * self.dy + y]
    }

    /// Joint matrix as rows.
    pub fn joint_rows(&self) -> Vec<Vec<f64>> {
        self.joint.chunks(self.dy).map(<[f64]>::to_vec).collect()
    }

    pub fn marginal_x(&self) -> &Marginal {
        &self.px
    }

    pub fn marginal_y(&self) -> &Marginal {
        &self.py
    }

    /// `P(X != Y)` when both alphabets coincide.
    pub fn crossover(&self) -> Option<f64> {
        (self.dx == self.dy).then(|| {
            (0..self.dx)
                .flat_map(|x| (0..self.dy).map(move |y| (x, y)))
                .filter(|(x, y)| x != y)
                .map(|(x, y)| self.joint(x, y))
                .sum()
        })
    }

    pub fn with_blocklength(&self, n: usize) -> Result<Self> {
        Self::new(self.joint_rows(), n)
    }
}

/// Truth table of `e: X^n -> {0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanFunction {
    n: usize,
    d: usize,
    table: Vec<bool>,
}

impl BooleanFunction {
    pub fn new(n: usize, d: usize, table: Vec<bool>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Domain(format!("invalid shape n={n}, d={d}")));
        }
        let len = table_len(d, n)
            .ok_or_else(|| Error::TooLarge(format!("{d}^{n} entries exceed the table limit")))?;
        if table.len() != len {
            return Err(Error::Domain(format!(
                "truth table has {} entries, expected {len}",
                table.len()
            )));
        }
        Ok(Self { n, d, table })
    }

    /// Tabulates `f` over every word.
    pub fn from_fn(n: usize, d: usize, f: impl Fn(&[usize]) -> bool) -> Result<Self> {
        let len = table_len(d, n)
            .ok_or_else(|| Error::TooLarge(format!("{d}^{n} entries exceed the table limit")))?;
        let table = (0..len).map(|idx| f(&decode_word(idx, d, n))).collect();
        Self::new(n, d, table)
    }

    /// Binary function from a predicate on the input bit pattern.
    pub fn binary_from_fn(n: usize, f: impl Fn(u64) -> bool) -> Result<Self> {
        let len = table_len(2, n)
            .ok_or_else(|| Error::TooLarge(format!("2^{n} entries exceed the table limit")))?;
        Self::new(n, 2, (0..len as u64).map(f).collect())
    }

    /// `e(x) = 1{x_k != 0}`; the dictator `X_{k+1}` for binary inputs.
    pub fn dictator(n: usize, d: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::Domain(format!("coordinate {k} outside blocklength {n}")));
        }
        Self::from_fn(n, d, |w| w[k] != 0)
    }

    /// XOR of all binary inputs.
    pub fn parity(n: usize) -> Result<Self> {
        Self::binary_from_fn(n, |x| x.count_ones() % 2 == 1)
    }

    /// AND of all binary inputs.
    pub fn and(n: usize) -> Result<Self> {
        let all = (1u64 << n) - 1;
        Self::binary_from_fn(n, move |x| x == all)
    }

    pub fn constant(n: usize, d: usize, value: bool) -> Result<Self> {
        Self::from_fn(n, d, |_| value)
    }

    /// `1 ⊕ e`.
    pub fn complement(&self) -> Self {
        Self { n: self.n, d: self.d, table: self.table.iter().map(|b| !b).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet_size(&self) -> usize {
        self.d
    }

    pub fn table(&self) -> &[bool] {
        &self.table
    }

    pub fn eval(&self, index: usize) -> bool {
        self.table[index]
    }

    pub fn eval_word(&self, word: &[usize]) -> bool {
        self.table[encode_word(word, self.d)]
    }
}

/// A subset of coordinates; bit `t` set means coordinate `t` is included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask {
    bits: u32,
    weight: u32,
}

impl SubsetMask {
    pub const EMPTY: SubsetMask = SubsetMask { bits: 0, weight: 0 };

    pub fn new(bits: u32) -> Self {
        Self { bits, weight: bits.count_ones() }
    }

    /// The singleton `{k}`.
    pub fn dictator(k: usize) -> Self {
        Self::new(1 << k)
    }

    pub fn full(n: usize) -> Self {
        Self::new(if n >= 32 { u32::MAX } else { (1u32 << n) - 1 })
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    /// Hamming weight `N_i`.
    pub fn weight(self) -> u32 {
        self.weight
    }

    pub fn contains_coord(self, t: usize) -> bool {
        self.bits >> t & 1 == 1
    }

    /// `self ≤ other` in the componentwise order.
    pub fn is_submask_of(self, other: SubsetMask) -> bool {
        self.bits & other.bits == self.bits
    }

    /// `self < other`.
    pub fn is_strict_submask_of(self, other: SubsetMask) -> bool {
        self.is_submask_of(other) && self.bits != other.bits
    }
}

impl serde::Serialize for SubsetMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u32(self.bits)
    }
}

/// All `j ≤ i` in increasing numeric order, including `0` and `i`.
pub fn enumerate_submasks(i: SubsetMask) -> Vec<SubsetMask> {
    let mut out = Vec::with_capacity(1 << i.weight());
    let mut j = 0u32;
    loop {
        out.push(SubsetMask::new(j));
        if j == i.bits() {
            break;
        }
        j = j.wrapping_sub(i.bits()) & i.bits();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn submasks_of_101() {
        let got: Vec<u32> = enumerate_submasks(SubsetMask::new(0b101))
            .into_iter()
            .map(SubsetMask::bits)
            .collect();
        assert_eq!(got, vec![0b000, 0b001, 0b100, 0b101]);
    }

    #[test]
    fn submasks_of_empty_and_full() {
        assert_eq!(enumerate_submasks(SubsetMask::EMPTY), vec![SubsetMask::EMPTY]);
        assert_eq!(enumerate_submasks(SubsetMask::new(0b111)).len(), 8);
    }

    #[test]
    fn product_prob_examples() {
        let uniform = Marginal::uniform(2);
        assert_eq!(product_prob(&uniform, &[0, 1, 1]).unwrap(), 0.125);
        let biased = Marginal::bernoulli(0.3).unwrap();
        assert!((product_prob(&biased, &[1, 1]).unwrap() - 0.09).abs() < 1e-15);
        let degenerate = Marginal::bernoulli(0.0).unwrap();
        assert_eq!(product_prob(&degenerate, &[0, 1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn product_prob_rejects_out_of_range_symbol() {
        let m = Marginal::uniform(3);
        assert!(matches!(product_prob(&m, &[0, 3]), Err(Error::Domain(_))));
    }

    #[test]
    fn word_probs_match_product_prob() {
        let m = Marginal::new(vec![0.2, 0.5, 0.3]).unwrap();
        let table = m.word_probs(4).unwrap();
        assert_eq!(table.len(), 81);
        for (idx, p) in table.iter().enumerate() {
            assert_eq!(*p, product_prob(&m, &decode_word(idx, 3, 4)).unwrap());
        }
        assert!((table.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_validation() {
        assert!(Marginal::new(vec![0.5, 0.6]).is_err());
        assert!(Marginal::new(vec![-0.1, 1.1]).is_err());
        assert!(Marginal::new(vec![]).is_err());
        assert!(Marginal::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn pair_source_marginals_and_crossover() {
        let src = PairSource::new(vec![vec![0.4, 0.1], vec![0.2, 0.3]], 3).unwrap();
        assert!((src.marginal_x().prob(1) - 0.5).abs() < 1e-15);
        assert!((src.marginal_y().prob(1) - 0.4).abs() < 1e-15);
        assert!((src.crossover().unwrap() - 0.3).abs() < 1e-15);
        let rect = PairSource::new(vec![vec![0.5, 0.25, 0.25]], 1).unwrap();
        assert_eq!(rect.crossover(), None);
    }

    #[test]
    fn symmetric_binary_rejects_unrealizable_crossover() {
        assert!(PairSource::symmetric_binary(0.1, 0.5, 2).is_err());
        let ok = PairSource::symmetric_binary(0.3, 0.5, 2).unwrap();
        assert!((ok.marginal_x().prob(1) - 0.3).abs() < 1e-15);
        assert!((ok.crossover().unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn boolean_function_shape_checks() {
        assert!(BooleanFunction::new(2, 2, vec![false; 3]).is_err());
        assert!(BooleanFunction::new(40, 2, vec![]).is_err());
        let f = BooleanFunction::and(2).unwrap();
        assert_eq!(f.table(), &[false, false, false, true]);
        assert!(f.eval_word(&[1, 1]));
        assert_eq!(f.complement().complement(), f);
    }

    #[test]
    fn word_index_is_little_endian() {
        assert_eq!(decode_word(5, 3, 3), vec![2, 1, 0]);
        assert_eq!(encode_word(&[2, 1, 0], 3), 5);
        let dict = BooleanFunction::dictator(3, 2, 0).unwrap();
        assert!(dict.eval(1) && !dict.eval(2));
    }
}
