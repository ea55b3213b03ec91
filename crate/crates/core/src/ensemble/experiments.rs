//! Experiments over sampled encoders: concentration of low-weight spectral
//! mass, the agreement discontinuity at zero crossover, and the
//! single-letter marginal check.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{encoder_bit_spectrum, rng, EncoderRealization, EnsembleConfig, MAX_MATERIALIZED_N};
use crate::correlation::{
    coefficients_from_psi, exact_agreement, lower_bounds_from_spectra, psi, MAX_EXACT_PAIRS,
};
use crate::decomposition::DependencySpectrum;
use crate::error::{Error, Result};
use crate::model::{PairSource, SubsetMask};

const MC_CHUNK: u64 = 8192;
const PROBES: u64 = 32;
/// Normal quantile for the reported 95% half-widths.
const Z95: f64 = 1.96;

/// Sample statistics; quantiles interpolate linearly between order
/// statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self { count, mean: 0.0, sd: 0.0, se: 0.0, min: 0.0, q25: 0.0, median: 0.0, q75: 0.0, max: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let quantile = |p: f64| {
            let h = p * (count - 1) as f64;
            let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        };
        Self {
            count,
            mean,
            sd,
            se: sd / (count as f64).sqrt(),
            min: sorted[0],
            q25: quantile(0.25),
            median: quantile(0.5),
            q75: quantile(0.75),
            max: sorted[count - 1],
        }
    }
}

fn check_materialized(cfg: &EnsembleConfig, limit: usize) -> Result<()> {
    cfg.validate()?;
    if cfg.n > limit {
        return Err(Error::TooLarge(format!("blocklength {} exceeds {limit} for this experiment", cfg.n)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationSample {
    pub sample: u64,
    /// `Σ_{N_i ≤ m, i ≠ i_1} P_{1,i}`
    pub statistic: f64,
    pub dictator_mass: f64,
    pub total: f64,
    pub fallback_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub config: EnsembleConfig,
    pub codebook_size: u64,
    pub max_weight: u32,
    pub statistic: Summary,
    pub dictator_mass: Summary,
    pub total: Summary,
    /// Fraction of inputs encoded by the fallback rule.
    pub fallback_fraction: Summary,
    pub rows: Vec<ConcentrationSample>,
}

/// Low-weight, non-dictator spectral mass of the first output bit across
/// `samples` independent encoders.
pub fn concentration_experiment(cfg: &EnsembleConfig, m: u32, samples: u64) -> Result<ConcentrationReport> {
    check_materialized(cfg, MAX_MATERIALIZED_N)?;
    let dictator = SubsetMask::dictator(0);
    let rows = (0..samples)
        .into_par_iter()
        .map(|s| {
            let enc = EncoderRealization::sample(cfg, 0, s)?;
            let spec = encoder_bit_spectrum(&enc, 0)?;
            Ok(ConcentrationSample {
                sample: s,
                statistic: spec.low_weight_mass(m, Some(dictator)),
                dictator_mass: spec.get(dictator),
                total: spec.total(),
                fallback_count: enc.fallback_count().unwrap_or(0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let column = |f: fn(&ConcentrationSample) -> f64| Summary::of(&rows.iter().map(f).collect::<Vec<_>>());
    let inputs = (1u64 << cfg.n) as f64;
    Ok(ConcentrationReport {
        config: *cfg,
        codebook_size: if cfg.uncoded { 1 << cfg.n } else { cfg.codebook_size()? },
        max_weight: m,
        statistic: column(|r| r.statistic),
        dictator_mass: column(|r| r.dictator_mass),
        total: column(|r| r.total),
        fallback_fraction: Summary::of(&rows.iter().map(|r| r.fallback_count as f64 / inputs).collect::<Vec<_>>()),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderMode {
    /// Both terminals use the same encoder.
    Shared,
    /// The second encoder is drawn independently.
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscontinuitySample {
    pub sample: u64,
    pub eps: f64,
    pub disagreements: u64,
    pub draws: u64,
    /// Monte Carlo estimate of `P(E_1(X^n) ≠ F_1(Y^n))`.
    pub estimate: f64,
    pub half_width: f64,
    /// `2√(PQ) − 2(1 − 2ε)√(P_{i_1} Q_{i_1})`, clamped to `[0, 1]`.
    pub bound_main: f64,
    /// The full spectrum bound with `C_i = ψ^{N_i}`, clamped to `[0, 1]`.
    pub bound_full: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    pub p_total: f64,
    pub q_total: f64,
    pub p_dictator: f64,
    pub q_dictator: f64,
    pub fallback_e: u64,
    pub fallback_f: u64,
}

impl DiscontinuitySample {
    /// `estimate − (bound_main − 3 · half_width)`.
    pub fn margin(&self) -> f64 {
        self.estimate - (self.bound_main - 3.0 * self.half_width)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscontinuityPoint {
    pub eps: f64,
    pub mean_estimate: f64,
    pub mean_bound_main: f64,
    pub mean_bound_full: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_exact: Option<f64>,
    /// Smallest [`DiscontinuitySample::margin`] over the encoders.
    pub min_margin: f64,
    pub max_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscontinuityReport {
    pub config: EnsembleConfig,
    pub mode: EncoderMode,
    pub codebook_size: u64,
    pub samples: u64,
    pub draws: u64,
    pub points: Vec<DiscontinuityPoint>,
    pub rows: Vec<DiscontinuitySample>,
}

/// Disagreements among `draws` pairs from the coupling, drawn in
/// independently keyed chunks.
fn monte_carlo(
    cfg: &EnsembleConfig,
    cells: [f64; 4],
    eps_index: u64,
    sample: u64,
    draws: u64,
    e: &EncoderRealization,
    f: &EncoderRealization,
) -> u64 {
    let n = cfg.n;
    let chunks = draws.div_ceil(MC_CHUNK);
    let role = rng::role(rng::MONTE_CARLO, n, eps_index);
    let c0 = cells[0];
    let c1 = c0 + cells[1];
    let c2 = c1 + cells[2];
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(cfg.seed, role, sample, c);
            let len = MC_CHUNK.min(draws - c * MC_CHUNK);
            let mut count = 0u64;
            for _ in 0..len {
                let (mut x, mut y) = (0u64, 0u64);
                for t in 0..n {
                    let u: f64 = r.gen();
                    let (a, b) = if u < c0 {
                        (0, 0)
                    } else if u < c1 {
                        (0, 1)
                    } else if u < c2 {
                        (1, 0)
                    } else {
                        (1, 1)
                    };
                    x |= a << t;
                    y |= b << t;
                }
                if (e.encode(x) ^ f.encode(y)) & 1 == 1 {
                    count += 1;
                }
            }
            count
        })
        .collect::<Vec<u64>>()
        .iter()
        .sum()
}

fn clamp01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn main_bound(p: &DependencySpectrum, q: &DependencySpectrum, eps: f64) -> f64 {
    let d = SubsetMask::dictator(0);
    2.0 * (p.total() * q.total()).sqrt() - 2.0 * (1.0 - 2.0 * eps) * (p.get(d) * q.get(d)).sqrt()
}

/// Agreement of the first output bits of an encoder pair over a symmetric
/// binary coupling with each crossover in `eps_list`.
pub fn discontinuity_experiment(
    cfg: &EnsembleConfig,
    eps_list: &[f64],
    mode: EncoderMode,
    samples: u64,
    draws: u64,
) -> Result<DiscontinuityReport> {
    check_materialized(cfg, MAX_MATERIALIZED_N)?;
    if draws == 0 {
        return Err(Error::Config("at least one Monte Carlo draw is required".into()));
    }
    let sources = eps_list
        .iter()
        .map(|&eps| PairSource::symmetric_binary(cfg.source_bias, eps, cfg.n))
        .collect::<Result<Vec<_>>>()?;
    let exact_ok = (1u64 << cfg.n).pow(2) <= MAX_EXACT_PAIRS;

    let per_sample = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<Vec<DiscontinuitySample>> {
            let e = EncoderRealization::sample(cfg, 0, s)?;
            let f = match mode {
                EncoderMode::Shared => e.clone(),
                EncoderMode::Independent => EncoderRealization::sample(cfg, 1, s)?,
            };
            let (fe, ff) = (e.output_bit(0)?, f.output_bit(0)?);
            let p = encoder_bit_spectrum(&e, 0)?;
            let q = encoder_bit_spectrum(&f, 0)?;
            let d = SubsetMask::dictator(0);
            sources
                .iter()
                .enumerate()
                .map(|(k, source)| {
                    let eps = eps_list[k];
                    let cells = [source.joint(0, 0), source.joint(0, 1), source.joint(1, 0), source.joint(1, 1)];
                    let count = monte_carlo(cfg, cells, k as u64, s, draws, &e, &f);
                    let estimate = count as f64 / draws as f64;
                    let coeffs = coefficients_from_psi(psi(source)?.psi, cfg.n);
                    let (full, _) = lower_bounds_from_spectra(&p, &q, &coeffs);
                    let exact = if exact_ok {
                        Some(exact_agreement(&fe, &ff, source)?.sigma)
                    } else {
                        None
                    };
                    Ok(DiscontinuitySample {
                        sample: s,
                        eps,
                        disagreements: count,
                        draws,
                        estimate,
                        half_width: Z95 * (estimate * (1.0 - estimate) / draws as f64).sqrt(),
                        bound_main: clamp01(main_bound(&p, &q, eps)),
                        bound_full: clamp01(full),
                        exact,
                        p_total: p.total(),
                        q_total: q.total(),
                        p_dictator: p.get(d),
                        q_dictator: q.get(d),
                        fallback_e: e.fallback_count().unwrap_or(0),
                        fallback_f: f.fallback_count().unwrap_or(0),
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let rows: Vec<DiscontinuitySample> = per_sample.into_iter().flatten().collect();
    let points = eps_list
        .iter()
        .enumerate()
        .map(|(k, &eps)| {
            let at: Vec<&DiscontinuitySample> = rows.iter().skip(k).step_by(eps_list.len()).collect();
            let mean = |f: fn(&DiscontinuitySample) -> f64| at.iter().map(|r| f(r)).sum::<f64>() / at.len().max(1) as f64;
            DiscontinuityPoint {
                eps,
                mean_estimate: mean(|r| r.estimate),
                mean_bound_main: mean(|r| r.bound_main),
                mean_bound_full: mean(|r| r.bound_full),
                mean_exact: exact_ok.then(|| mean(|r| r.exact.unwrap_or(0.0))),
                min_margin: at.iter().map(|r| r.margin()).fold(f64::INFINITY, f64::min),
                max_estimate: at.iter().map(|r| r.estimate).fold(0.0, f64::max),
            }
        })
        .collect();

    Ok(DiscontinuityReport {
        config: *cfg,
        mode,
        codebook_size: if cfg.uncoded { 1 << cfg.n } else { cfg.codebook_size()? },
        samples,
        draws,
        points,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Property2Report {
    pub config: EnsembleConfig,
    pub samples: u64,
    pub probes: Vec<u64>,
    /// Max over probes `x^n` and coordinates `i` of
    /// `|P(E_i = 1 | X^n = x^n) − P(E_i = 1 | X_i = x_i)|`, both averaged
    /// over the sampled encoders.
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub fallback_fraction: Summary,
}

/// Per-encoder output bits at the probes, and `P(E_i = 1 | X_i = v)`.
struct Property2Sample {
    probe_bits: Vec<Vec<f64>>,
    conditional: Vec<[f64; 2]>,
    fallback: u64,
}

pub fn slce_property2_check(cfg: &EnsembleConfig, samples: u64) -> Result<Property2Report> {
    check_materialized(cfg, 10)?;
    if samples == 0 {
        return Err(Error::Config("at least one encoder sample is required".into()));
    }
    let n = cfg.n;
    let q = cfg.source_bias;
    let px = [1.0 - q, q];
    let words = cfg.source_marginal().word_probs(n)?;

    let probe_role = rng::role(rng::PROBE, n, 0);
    let probes: Vec<u64> = (0..PROBES)
        .map(|j| {
            let mut r = rng::stream(cfg.seed, probe_role, 0, j);
            (0..n).fold(0u64, |x, t| x | u64::from(r.gen::<f64>() < q) << t)
        })
        .collect();

    let per_sample = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<Property2Sample> {
            let enc = EncoderRealization::sample(cfg, 0, s)?;
            let outputs: Vec<u64> = (0..1u64 << n).map(|x| enc.encode(x)).collect();
            let probe_bits = probes
                .iter()
                .map(|&x| (0..n).map(|i| (outputs[x as usize] >> i & 1) as f64).collect())
                .collect();
            let conditional = (0..n)
                .map(|i| {
                    let mut acc = [0.0; 2];
                    for (x, (&u, &w)) in outputs.iter().zip(&words).enumerate() {
                        if u >> i & 1 == 1 {
                            acc[x >> i & 1] += w;
                        }
                    }
                    [0, 1].map(|v| if px[v] > 0.0 { acc[v] / px[v] } else { 0.0 })
                })
                .collect();
            Ok(Property2Sample { probe_bits, conditional, fallback: enc.fallback_count().unwrap_or(0) })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut deviations = Vec::with_capacity(probes.len() * n);
    for (j, &x) in probes.iter().enumerate() {
        for i in 0..n {
            let v = (x >> i & 1) as usize;
            let full: f64 = per_sample.iter().map(|s| s.probe_bits[j][i]).sum::<f64>() / samples as f64;
            let single: f64 = per_sample.iter().map(|s| s.conditional[i][v]).sum::<f64>() / samples as f64;
            deviations.push((full - single).abs());
        }
    }
    let inputs = (1u64 << n) as f64;
    Ok(Property2Report {
        config: *cfg,
        samples,
        max_deviation: deviations.iter().copied().fold(0.0, f64::max),
        mean_deviation: deviations.iter().sum::<f64>() / deviations.len() as f64,
        probes,
        fallback_fraction: Summary::of(&per_sample.iter().map(|s| s.fallback as f64 / inputs).collect::<Vec<_>>()),
    })
}
