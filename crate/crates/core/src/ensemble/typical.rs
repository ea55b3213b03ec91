//! Weight-band enumeration of the typical set and the joint-typicality test.

/// Binomial coefficients `C(n, k)` for `n ≤ 64`, as a Pascal triangle.
pub(crate) struct Binomials {
    rows: Vec<Vec<u128>>,
}

impl Binomials {
    pub(crate) fn new(n: usize) -> Self {
        let mut rows: Vec<Vec<u128>> = vec![vec![1]];
        for m in 1..=n {
            let prev = &rows[m - 1];
            let row = (0..=m)
                .map(|k| {
                    let left = if k > 0 { prev[k - 1] } else { 0 };
                    left + prev.get(k).copied().unwrap_or(0)
                })
                .collect();
            rows.push(row);
        }
        Self { rows }
    }

    pub(crate) fn get(&self, n: usize, k: usize) -> u128 {
        if k > n {
            0
        } else {
            self.rows[n][k]
        }
    }
}

/// Weights `k` with `|k/n − p| < eps`.
pub(crate) fn typical_weights(n: usize, p: f64, eps: f64) -> Vec<usize> {
    (0..=n).filter(|&k| (k as f64 / n as f64 - p).abs() < eps).collect()
}

/// Weight bands of `A_ε^n(U)` and their cumulative sizes.
pub(crate) struct TypicalSet {
    n: usize,
    binom: Binomials,
    weights: Vec<usize>,
    cumulative: Vec<u128>,
}

impl TypicalSet {
    pub(crate) fn new(n: usize, p_one: f64, eps: f64) -> Self {
        let binom = Binomials::new(n);
        let weights = typical_weights(n, p_one, eps);
        let mut total = 0u128;
        let cumulative = weights
            .iter()
            .map(|&k| {
                total += binom.get(n, k);
                total
            })
            .collect();
        Self { n, binom, weights, cumulative }
    }

    pub(crate) fn size(&self) -> u128 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    #[cfg(test)]
    pub(crate) fn weights(&self) -> &[usize] {
        &self.weights
    }

    /// The `rank`-th word in weight-then-colex order.
    pub(crate) fn unrank(&self, rank: u128) -> u64 {
        let band = self.cumulative.partition_point(|&c| c <= rank);
        let below = if band == 0 { 0 } else { self.cumulative[band - 1] };
        let mut r = rank - below;
        let mut k = self.weights[band];
        let mut word = 0u64;
        for pos in (0..self.n).rev() {
            if k == 0 {
                break;
            }
            let c = self.binom.get(pos, k);
            if r >= c {
                word |= 1 << pos;
                r -= c;
                k -= 1;
            }
        }
        word
    }
}

/// Joint type counts `N(a, b)` of `(x^n, u^n)`, indexed `[a][b]`.
pub(crate) fn joint_counts(x: u64, u: u64, n: usize) -> [[u32; 2]; 2] {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let n11 = (x & u).count_ones();
    let n10 = (x & !u & mask).count_ones();
    let n01 = (!x & u & mask).count_ones();
    let n00 = n as u32 - n11 - n10 - n01;
    [[n00, n01], [n10, n11]]
}

/// `|N(a, b)/n − P_{XU}(a, b)| < eps` for all four pairs.
pub(crate) fn jointly_typical(x: u64, u: u64, n: usize, pxu: &[[f64; 2]; 2], eps: f64) -> bool {
    let counts = joint_counts(x, u, n);
    (0..2).all(|a| (0..2).all(|b| (counts[a][b] as f64 / n as f64 - pxu[a][b]).abs() < eps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pascal() {
        let b = Binomials::new(62);
        assert_eq!(b.get(5, 2), 10);
        assert_eq!(b.get(62, 31), 465_428_353_255_261_088);
        assert_eq!(b.get(3, 4), 0);
    }

    #[test]
    fn unrank_enumerates_band_bijectively() {
        let set = TypicalSet::new(8, 0.5, 0.2);
        assert_eq!(set.weights(), &[3, 4, 5]);
        assert_eq!(set.size(), 56 + 70 + 56);
        let mut words: Vec<u64> = (0..set.size()).map(|r| set.unrank(r)).collect();
        assert!(words.iter().all(|w| (3..=5).contains(&w.count_ones()) && *w < 256));
        words.sort();
        words.dedup();
        assert_eq!(words.len() as u128, set.size());
    }

    #[test]
    fn counts_partition_n() {
        let c = joint_counts(0b1100, 0b1010, 4);
        assert_eq!(c, [[1, 1], [1, 1]]);
        let c = joint_counts(0, 0, 10);
        assert_eq!(c[0][0], 10);
    }
}
