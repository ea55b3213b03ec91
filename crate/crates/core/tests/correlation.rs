use boolcorr::correlation::{
    binary_psi_closed_form, exact_agreement, psi, theorem_bounds, PsiMethod,
};
use boolcorr::model::{decode_word, BooleanFunction, PairSource};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_joint(r: &mut impl Rng, dx: usize, dy: usize) -> Vec<Vec<f64>> {
    let w: Vec<Vec<f64>> = (0..dx).map(|_| (0..dy).map(|_| r.gen_range(0.01..1.0)).collect()).collect();
    let total: f64 = w.iter().flatten().sum();
    w.into_iter().map(|row| row.into_iter().map(|v| v / total).collect()).collect()
}

/// Second singular value of the normalized joint, from nalgebra's SVD.
fn svd_psi(joint: &[Vec<f64>]) -> f64 {
    let (dx, dy) = (joint.len(), joint[0].len());
    let px: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let py: Vec<f64> = (0..dy).map(|y| joint.iter().map(|r| r[y]).sum()).collect();
    let b = DMatrix::from_fn(dx, dy, |x, y| joint[x][y] / (px[x] * py[y]).sqrt());
    let mut sv: Vec<f64> = b.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv[1]
}

/// `P(e ≠ f)` by summing over all word pairs.
fn naive_sigma(e: &BooleanFunction, f: &BooleanFunction, src: &PairSource) -> f64 {
    let n = src.n();
    let mut sigma = 0.0;
    for x in 0..e.table().len() {
        let wx = decode_word(x, src.dx(), n);
        for y in 0..f.table().len() {
            if e.eval(x) != f.eval(y) {
                let wy = decode_word(y, src.dy(), n);
                sigma += wx.iter().zip(&wy).map(|(&a, &b)| src.joint(a, b)).product::<f64>();
            }
        }
    }
    sigma
}

#[test]
fn spectral_psi_matches_svd() {
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let (dx, dy) = (r.gen_range(2..6), r.gen_range(2..6));
        let joint = random_joint(&mut r, dx, dy);
        let expected = svd_psi(&joint);
        let got = psi(&PairSource::new(joint, 1).unwrap()).unwrap();
        assert!((got.psi - expected).abs() < 1e-9, "{} vs {expected}", got.psi);
    }
}

#[test]
fn binary_closed_form_matches_svd() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let joint = random_joint(&mut r, 2, 2);
        let p = joint[1][0] + joint[1][1];
        let q = joint[0][1] + joint[1][1];
        let eps = joint[0][1] + joint[1][0];
        let closed = binary_psi_closed_form(p, q, eps);
        assert!((closed - svd_psi(&joint)).abs() < 1e-9);
        let got = psi(&PairSource::new(joint, 1).unwrap()).unwrap();
        assert_eq!(got.method, PsiMethod::BinaryClosedForm);
        assert_eq!(got.psi, closed);
    }
}

#[test]
fn symmetric_coupling_psi() {
    for eps in [0.0, 0.05, 0.1, 0.25, 0.5] {
        let mc = psi(&PairSource::dsbs(eps, 1).unwrap()).unwrap();
        assert!((mc.psi - (1.0 - 2.0 * eps)).abs() < 1e-15);
    }
}

#[test]
fn exact_agreement_matches_naive_sum() {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let (dx, dy, n) = (r.gen_range(2..4), r.gen_range(2..4), r.gen_range(1..4));
        let src = PairSource::new(random_joint(&mut r, dx, dy), n).unwrap();
        let e = BooleanFunction::new(n, dx, (0..dx.pow(n as u32)).map(|_| r.gen()).collect()).unwrap();
        let f = BooleanFunction::new(n, dy, (0..dy.pow(n as u32)).map(|_| r.gen()).collect()).unwrap();
        let stats = exact_agreement(&e, &f, &src).unwrap();
        assert!((stats.sigma - naive_sigma(&e, &f, &src)).abs() < 1e-12);
        assert!(stats.relations_residual() < 1e-12);
    }
}

#[test]
fn two_bit_sandwich_is_exhaustive() {
    let eps_grid = [0.0, 0.05, 0.1, 0.25, 0.5];
    for q in [0.5, 0.3] {
        for eps in eps_grid {
            let src = PairSource::symmetric_binary(q, eps, 2).unwrap();
            for a in 0..16u64 {
                for b in 0..16u64 {
                    let e = BooleanFunction::binary_from_fn(2, |x| a >> x & 1 == 1).unwrap();
                    let f = BooleanFunction::binary_from_fn(2, |x| b >> x & 1 == 1).unwrap();
                    let r = theorem_bounds(&e, &f, &src).unwrap();
                    let sigma = r.exact_sigma.unwrap();
                    assert!(r.lower - 1e-9 <= sigma && sigma <= r.upper + 1e-9, "q={q} eps={eps} a={a} b={b}");
                    assert!(r.lower_simplified <= r.raw_lower + 1e-12);
                }
            }
        }
    }
}

#[test]
fn tight_pairs_at_uniform() {
    for eps in [0.0, 0.05, 0.1, 0.25, 0.5] {
        let src = PairSource::dsbs(eps, 2).unwrap();
        let d = BooleanFunction::dictator(2, 2, 0).unwrap();
        let r = theorem_bounds(&d, &d, &src).unwrap();
        assert!((r.exact_sigma.unwrap() - eps).abs() < 1e-12);
        assert!((r.lower - eps).abs() < 1e-9);

        let x = BooleanFunction::parity(2).unwrap();
        let r = theorem_bounds(&x, &x, &src).unwrap();
        let expected = 2.0 * eps * (1.0 - eps);
        assert!((r.exact_sigma.unwrap() - expected).abs() < 1e-12);
        assert!((r.lower - expected).abs() < 1e-9);
    }
}

fn pair_instance() -> impl Strategy<Value = (BooleanFunction, BooleanFunction, PairSource)> {
    (1usize..=3, 2usize..=3, 2usize..=3, any::<u64>()).prop_map(|(n, dx, dy, seed)| {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let src = PairSource::new(random_joint(&mut r, dx, dy), n).unwrap();
        let e = BooleanFunction::new(n, dx, (0..dx.pow(n as u32)).map(|_| r.gen()).collect()).unwrap();
        let f = BooleanFunction::new(n, dy, (0..dy.pow(n as u32)).map(|_| r.gen()).collect()).unwrap();
        (e, f, src)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sandwich_holds_for_general_alphabets((e, f, src) in pair_instance()) {
        let r = theorem_bounds(&e, &f, &src).unwrap();
        let sigma = r.exact_sigma.unwrap();
        prop_assert!(r.lower - 1e-9 <= sigma && sigma <= r.upper + 1e-9);
        prop_assert!((0.0..=1.0).contains(&r.lower) && (0.0..=1.0).contains(&r.upper));
        prop_assert!((0.0..=1.0).contains(&r.psi));
    }

    #[test]
    fn complement_swaps_bounds((e, f, src) in pair_instance()) {
        let r = theorem_bounds(&e, &f, &src).unwrap();
        let c = theorem_bounds(&e, &f.complement(), &src).unwrap();
        prop_assert!((r.raw_lower - c.raw_lower).abs() < 1e-9);
        prop_assert!((r.exact_sigma.unwrap() + c.exact_sigma.unwrap() - 1.0).abs() < 1e-12);
    }
}
