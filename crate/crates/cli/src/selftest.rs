use serde::Serialize;

use boolcorr::correlation::{psi, theorem_bounds};
use boolcorr::decomposition::{component, real_transform, spectrum};
use boolcorr::model::{BooleanFunction, Marginal, PairSource, SubsetMask};
use boolcorr::netbounds::{binary_entropy, ic_hz_bound, mac_hx_bound, mac_single_user_rate, IcBoundInput, MacBoundInput};

const TOL: f64 = 1e-12;
const SANDWICH_TOL: f64 = 1e-9;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failed: usize,
}

fn check(name: &'static str, f: impl FnOnce() -> boolcorr::Result<(bool, String)>) -> Check {
    match f() {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check { name, passed: false, detail: format!("error: {e}") },
    }
}

fn and_example() -> boolcorr::Result<(bool, String)> {
    let s = spectrum(&BooleanFunction::and(2)?, &Marginal::uniform(2))?;
    let parts: Vec<f64> = (1..4).map(|m| s.get(SubsetMask::new(m))).collect();
    let ok = (s.total() - 3.0 / 16.0).abs() < TOL && parts.iter().all(|v| (v - 1.0 / 16.0).abs() < TOL);
    Ok((ok, format!("total {} components {parts:?}", s.total())))
}

fn xor_example() -> boolcorr::Result<(bool, String)> {
    let m = Marginal::uniform(2);
    let rt = real_transform(&BooleanFunction::parity(2)?, &m)?;
    let pair = component(&rt, SubsetMask::new(3), &m)?;
    let mut worst: f64 = 0.0;
    for x in 0..4usize {
        let (a, b) = ((x & 1) as f64, (x >> 1 & 1) as f64);
        worst = worst.max((pair.values[x] + 0.5 * (1.0 - 2.0 * a) * (1.0 - 2.0 * b)).abs());
    }
    for k in [1, 2] {
        let single = component(&rt, SubsetMask::new(k), &m)?;
        worst = worst.max(single.values.iter().fold(0.0, |w, v| w.max(v.abs())));
    }
    Ok((worst < TOL, format!("max deviation {worst:e}")))
}

fn two_bit_sandwich() -> boolcorr::Result<(bool, String)> {
    let mut cases = 0;
    let mut violations = 0;
    for q in [0.5, 0.3] {
        for eps in [0.0, 0.05, 0.1, 0.25, 0.5] {
            let src = PairSource::symmetric_binary(q, eps, 2)?;
            for a in 0..16u64 {
                let e = BooleanFunction::binary_from_fn(2, |x| a >> x & 1 == 1)?;
                for b in 0..16u64 {
                    let f = BooleanFunction::binary_from_fn(2, |x| b >> x & 1 == 1)?;
                    let r = theorem_bounds(&e, &f, &src)?;
                    let sigma = r.exact_sigma.unwrap_or(f64::NAN);
                    cases += 1;
                    if !(r.lower - SANDWICH_TOL <= sigma && sigma <= r.upper + SANDWICH_TOL) {
                        violations += 1;
                    }
                }
            }
        }
    }
    Ok((violations == 0, format!("{violations} violations in {cases} cases")))
}

fn tight_pairs() -> boolcorr::Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for eps in [0.0, 0.05, 0.1, 0.25, 0.5] {
        let src = PairSource::dsbs(eps, 2)?;
        let d = BooleanFunction::dictator(2, 2, 0)?;
        let r = theorem_bounds(&d, &d, &src)?;
        worst = worst.max((r.lower - eps).abs()).max((r.exact_sigma.unwrap_or(f64::NAN) - eps).abs());
        let x = BooleanFunction::parity(2)?;
        let r = theorem_bounds(&x, &x, &src)?;
        let target = 2.0 * eps * (1.0 - eps);
        worst = worst.max((r.lower - target).abs()).max((r.exact_sigma.unwrap_or(f64::NAN) - target).abs());
    }
    Ok((worst < SANDWICH_TOL, format!("max gap {worst:e}")))
}

fn psi_values() -> boolcorr::Result<(bool, String)> {
    let dsbs = psi(&PairSource::dsbs(0.1, 1)?)?.psi;
    let indep = psi(&PairSource::new(vec![vec![0.12, 0.28], vec![0.18, 0.42]], 1)?)?.psi;
    let same: Vec<Vec<f64>> = (0..3).map(|x| (0..3).map(|y| if x == y { 1.0 / 3.0 } else { 0.0 }).collect()).collect();
    let ident = psi(&PairSource::new(same, 1)?)?.psi;
    let ok = (dsbs - 0.8).abs() < TOL && indep.abs() < 1e-9 && (ident - 1.0).abs() < 1e-9;
    Ok((ok, format!("dsbs(0.1) {dsbs}, independent {indep}, identical {ident}")))
}

fn netbound_values() -> boolcorr::Result<(bool, String)> {
    let ic = ic_hz_bound(IcBoundInput { avg_agreement: 1.0, q: 16 })?;
    let mac = mac_hx_bound(MacBoundInput { avg_agreement: 0.0, q: 4, delta: 0.1 })?;
    let rate = mac_single_user_rate(2, 0.1)?;
    let ok = (ic - 5.0).abs() < TOL && (mac - 1.0).abs() < TOL && (rate - (1.0 - binary_entropy(0.1))).abs() < TOL;
    Ok((ok, format!("ic {ic}, mac {mac}, rate {rate}")))
}

pub fn run_all() -> SelftestReport {
    let checks = vec![
        check("and-uniform-spectrum", and_example),
        check("xor-two-letter-component", xor_example),
        check("two-bit-sandwich", two_bit_sandwich),
        check("tight-dictator-and-parity", tight_pairs),
        check("psi-values", psi_values),
        check("netbound-values", netbound_values),
    ];
    let passed = checks.iter().filter(|c| c.passed).count();
    let failed = checks.len() - passed;
    SelftestReport { checks, passed, failed }
}
