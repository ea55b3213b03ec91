use std::collections::HashMap;

use boolcorr::decomposition::{
    component, decompose, k_letter_profile, real_transform, spectrum, spectrum_fast_binary,
    spectrum_via_basis, BiasedBasis,
};
use boolcorr::model::{decode_word, BooleanFunction, Marginal, SubsetMask};
use proptest::prelude::*;

/// `E[v | X_mask]` by grouping words on their in-mask symbols.
fn naive_conditional(v: &[f64], p: &[f64], d: usize, n: usize, mask: u32) -> Vec<f64> {
    let key = |x: usize| -> Vec<usize> {
        let w = decode_word(x, d, n);
        (0..n).map(|t| if mask >> t & 1 == 1 { w[t] } else { usize::MAX }).collect()
    };
    let mut sums: HashMap<Vec<usize>, (f64, f64)> = HashMap::new();
    for x in 0..v.len() {
        let e = sums.entry(key(x)).or_default();
        e.0 += v[x] * p[x];
        e.1 += p[x];
    }
    (0..v.len())
        .map(|x| {
            let (g, w) = sums[&key(x)];
            if w > 0.0 {
                g / w
            } else {
                0.0
            }
        })
        .collect()
}

/// Components by inclusion-exclusion over conditional expectations.
fn naive_components(f: &BooleanFunction, m: &Marginal) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (n, d) = (f.n(), f.alphabet_size());
    let p: Vec<f64> = (0..f.table().len())
        .map(|x| decode_word(x, d, n).iter().map(|&s| m.prob(s)).product())
        .collect();
    let s: f64 = f.table().iter().zip(&p).filter(|(b, _)| **b).map(|(_, p)| p).sum();
    let v: Vec<f64> = f.table().iter().map(|&b| if b { 1.0 - s } else { -s }).collect();
    let cond: Vec<Vec<f64>> = (0..1u32 << n).map(|mask| naive_conditional(&v, &p, d, n, mask)).collect();
    let comps = (0..1u32 << n)
        .map(|i| {
            let mut c = vec![0.0; v.len()];
            for j in 0..1u32 << n {
                if j & i == j {
                    let sign = if (i.count_ones() - j.count_ones()) % 2 == 0 { 1.0 } else { -1.0 };
                    c.iter_mut().zip(&cond[j as usize]).for_each(|(a, b)| *a += sign * b);
                }
            }
            c
        })
        .collect();
    (p, comps)
}

fn expect(a: &[f64], b: &[f64], p: &[f64]) -> f64 {
    a.iter().zip(b).zip(p).map(|((a, b), p)| a * b * p).sum()
}

fn marginal_strategy(d: usize) -> impl Strategy<Value = Marginal> {
    prop::collection::vec(0.05f64..1.0, d).prop_map(|w| {
        let total: f64 = w.iter().sum();
        Marginal::new(w.iter().map(|v| v / total).collect()).unwrap()
    })
}

fn instance() -> impl Strategy<Value = (BooleanFunction, Marginal)> {
    (1usize..=4, 2usize..=3).prop_flat_map(|(n, d)| {
        let len = d.pow(n as u32);
        (
            prop::collection::vec(any::<bool>(), len).prop_map(move |t| BooleanFunction::new(n, d, t).unwrap()),
            marginal_strategy(d),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn spectrum_matches_inclusion_exclusion((f, m) in instance()) {
        let (p, comps) = naive_components(&f, &m);
        let spec = spectrum(&f, &m).unwrap();
        for (i, c) in comps.iter().enumerate() {
            let var = expect(c, c, &p);
            prop_assert!((spec.variances()[i] - var).abs() < 1e-9, "mask {i}: {} vs {var}", spec.variances()[i]);
        }
        let rt = real_transform(&f, &m).unwrap();
        for table in decompose(&rt, &m).unwrap() {
            let oracle = &comps[table.mask.bits() as usize];
            for (a, b) in table.values.iter().zip(oracle) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn decomposition_properties((f, m) in instance()) {
        let rt = real_transform(&f, &m).unwrap();
        let (n, d) = (f.n(), f.alphabet_size());
        let p = m.word_probs(n).unwrap();
        let comps = decompose(&rt, &m).unwrap();

        for (x, v) in rt.values().iter().enumerate() {
            let sum: f64 = comps.iter().map(|c| c.values[x]).sum();
            prop_assert!((sum - v).abs() < 1e-9);
        }
        for a in &comps {
            for b in &comps {
                if a.mask != b.mask {
                    prop_assert!(expect(&a.values, &b.values, &p).abs() < 1e-9);
                }
            }
            if a.mask != SubsetMask::EMPTY {
                prop_assert!(expect(&a.values, &vec![1.0; p.len()], &p).abs() < 1e-10);
            }
        }
        let spec = spectrum(&f, &m).unwrap();
        prop_assert!((spec.sum() - rt.variance()).abs() < 1e-9);
        prop_assert!(comps[0].values.iter().all(|&v| v == 0.0));

        for a in &comps {
            for k in 0..1u32 << n {
                let km = SubsetMask::new(k);
                let ce = naive_conditional(&a.values, &p, d, n, k);
                if a.mask.is_submask_of(km) {
                    for (u, v) in ce.iter().zip(&a.values) {
                        prop_assert!((u - v).abs() < 1e-9);
                    }
                } else if km.is_strict_submask_of(a.mask) {
                    prop_assert!(ce.iter().all(|u| u.abs() < 1e-9));
                }
            }
        }
    }

    #[test]
    fn components_depend_only_on_their_mask((f, m) in instance()) {
        let rt = real_transform(&f, &m).unwrap();
        let (n, d) = (f.n(), f.alphabet_size());
        for c in decompose(&rt, &m).unwrap() {
            for x in 0..c.values.len() {
                let w = decode_word(x, d, n);
                for t in (0..n).filter(|&t| !c.mask.contains_coord(t)) {
                    let mut w2 = w.clone();
                    w2[t] = (w[t] + 1) % d;
                    let y = boolcorr::model::encode_word(&w2, d);
                    prop_assert!((c.values[x] - c.values[y]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn fast_binary_path_agrees(n in 1usize..=10, q in 0.01f64..0.99, seed in any::<u64>()) {
        let f = BooleanFunction::binary_from_fn(n, |x| (x.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ seed).count_ones() % 2 == 1).unwrap();
        let m = Marginal::bernoulli(q).unwrap();
        let slow = spectrum(&f, &m).unwrap();
        let fast = spectrum_fast_binary(&f, q).unwrap();
        for (a, b) in slow.variances().iter().zip(fast.variances()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn basis_route_agrees((f, m) in instance()) {
        let a = spectrum(&f, &m).unwrap();
        let b = spectrum_via_basis(&f, &m).unwrap();
        for (x, y) in a.variances().iter().zip(b.variances()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn basis_is_orthogonal_with_common_moment(m in (2usize..=6).prop_flat_map(marginal_strategy)) {
        let basis = BiasedBasis::new(&m).unwrap();
        let p = m.probs();
        for (i, h) in basis.functions().iter().enumerate() {
            prop_assert!((expect(h, h, p) - basis.scale()).abs() < 1e-10);
            for g in &basis.functions()[i + 1..] {
                prop_assert!(expect(h, g, p).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn and_at_uniform() {
    let s = spectrum(&BooleanFunction::and(2).unwrap(), &Marginal::uniform(2)).unwrap();
    assert!((s.total() - 3.0 / 16.0).abs() < 1e-12);
    for m in 1..4 {
        assert!((s.get(SubsetMask::new(m)) - 1.0 / 16.0).abs() < 1e-12);
    }
}

#[test]
fn and_at_bias_point_three() {
    // s = 0.09, E[ẽ | X_1] = 0.3 X_1 − 0.09, so P_{1} = 0.09 · 0.21.
    let s = spectrum(&BooleanFunction::and(2).unwrap(), &Marginal::bernoulli(0.3).unwrap()).unwrap();
    assert!((s.get(SubsetMask::new(1)) - 0.0189).abs() < 1e-12);
    assert!((s.get(SubsetMask::new(2)) - 0.0189).abs() < 1e-12);
    assert!((s.get(SubsetMask::new(3)) - 0.0441).abs() < 1e-12);
    assert!((s.total() - 0.0819).abs() < 1e-12);
}

#[test]
fn xor_is_purely_two_letter() {
    let f = BooleanFunction::parity(2).unwrap();
    let m = Marginal::uniform(2);
    let rt = real_transform(&f, &m).unwrap();
    let c = component(&rt, SubsetMask::new(3), &m).unwrap();
    for x in 0..4usize {
        let (x1, x2) = ((x & 1) as f64, (x >> 1 & 1) as f64);
        let expected = -0.5 * (1.0 - 2.0 * x1) * (1.0 - 2.0 * x2);
        assert!((c.values[x] - expected).abs() < 1e-12);
    }
    for k in [1u32, 2] {
        assert!(component(&rt, SubsetMask::new(k), &m).unwrap().values.iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn majority_profile() {
    // Majority of three fair bits: each single letter carries 1/16, the
    // triple 1/16, pairs nothing.
    let maj = BooleanFunction::binary_from_fn(3, |x| x.count_ones() >= 2).unwrap();
    let s = spectrum(&maj, &Marginal::uniform(2)).unwrap();
    let profile = k_letter_profile(&s);
    let expected = [0.0, 3.0 / 16.0, 0.0, 1.0 / 16.0];
    for ((k, v), e) in profile.iter().zip(expected) {
        assert!((v - e).abs() < 1e-12, "weight {k}");
    }
}

#[test]
fn dictator_mass_is_single_letter_variance() {
    for q in [0.1, 0.5, 0.8] {
        let f = BooleanFunction::dictator(5, 2, 3).unwrap();
        let s = spectrum(&f, &Marginal::bernoulli(q).unwrap()).unwrap();
        assert!((s.get(SubsetMask::dictator(3)) - q * (1.0 - q)).abs() < 1e-12);
        assert!((s.sum() - s.get(SubsetMask::dictator(3))).abs() < 1e-12);
    }
}
