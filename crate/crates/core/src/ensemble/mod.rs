//! Random binary block encoders from the single-letter coding ensemble:
//! a codebook drawn uniformly (with replacement) from the typical set of
//! `U`, and typicality encoding of each input against that codebook.

mod experiments;
mod rng;
mod typical;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::correlation::spectrum_for;
use crate::decomposition::DependencySpectrum;
use crate::error::{Error, Result};
use crate::model::{BooleanFunction, Marginal};

pub use experiments::{
    concentration_experiment, discontinuity_experiment, slce_property2_check, ConcentrationReport,
    DiscontinuityPoint, DiscontinuityReport, DiscontinuitySample, EncoderMode, Property2Report,
    Summary,
};
use typical::{jointly_typical, TypicalSet};

/// Largest blocklength handled (words are stored in a `u64`).
pub const MAX_ENSEMBLE_N: usize = 62;
/// Assignments are tabulated up to this blocklength, computed on demand above.
pub const MAX_MATERIALIZED_N: usize = 16;
/// Largest codebook that will be drawn.
pub const MAX_CODEBOOK: u64 = 1 << 24;

/// Typicality slack used when none is given.
pub fn default_eps_typ(n: usize) -> f64 {
    if n <= 10 {
        0.1
    } else {
        0.05
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub n: usize,
    pub rate: f64,
    /// `P(X = 1)`.
    pub source_bias: f64,
    /// Test channel `P(U = u | X = x)` as `channel[x][u]`.
    pub channel: [[f64; 2]; 2],
    pub eps_typ: f64,
    pub seed: u64,
    /// Replace the random code by the identity map.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub uncoded: bool,
}

impl EnsembleConfig {
    /// Uniform source, BSC(0.1) test channel, default slack.
    pub fn new(n: usize, rate: f64, seed: u64) -> Self {
        Self {
            n,
            rate,
            source_bias: 0.5,
            channel: bsc(0.1),
            eps_typ: default_eps_typ(n),
            seed,
            uncoded: false,
        }
    }

    pub fn with_source_bias(mut self, q: f64) -> Self {
        self.source_bias = q;
        self
    }

    pub fn with_channel(mut self, channel: [[f64; 2]; 2]) -> Self {
        self.channel = channel;
        self
    }

    pub fn with_eps_typ(mut self, eps: f64) -> Self {
        self.eps_typ = eps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_blocklength(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn uncoded(mut self) -> Self {
        self.uncoded = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_ENSEMBLE_N {
            return Err(Error::Config(format!("blocklength {} outside 1..={MAX_ENSEMBLE_N}", self.n)));
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(Error::Config(format!("rate {} outside (0, 1]", self.rate)));
        }
        if !(self.eps_typ > 0.0 && self.eps_typ < 0.5) {
            return Err(Error::Config(format!("typicality slack {} outside (0, 1/2)", self.eps_typ)));
        }
        if !(0.0..=1.0).contains(&self.source_bias) {
            return Err(Error::Config(format!("source bias {} outside [0, 1]", self.source_bias)));
        }
        for row in &self.channel {
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (row[0] + row[1] - 1.0).abs() > 1e-12 {
                return Err(Error::Config(format!("channel row {row:?} is not a distribution")));
            }
        }
        Ok(())
    }

    /// `M = ⌈2^{nR}⌉`, with `nR` snapped to an integer when within 1e-9
    /// (so a rate below `1e-9 / n` gives a single codeword).
    pub fn codebook_size(&self) -> Result<u64> {
        let mut exponent = self.n as f64 * self.rate;
        if (exponent - exponent.round()).abs() < 1e-9 {
            exponent = exponent.round();
        }
        let m = exponent.exp2().ceil();
        if m > MAX_CODEBOOK as f64 {
            return Err(Error::TooLarge(format!("codebook of 2^{exponent} words exceeds 2^24")));
        }
        Ok((m as u64).max(1))
    }

    pub fn source_marginal(&self) -> Marginal {
        Marginal::bernoulli(self.source_bias).expect("validated bias")
    }

    /// `P_U(1)`.
    pub fn u_bias(&self) -> f64 {
        (1.0 - self.source_bias) * self.channel[0][1] + self.source_bias * self.channel[1][1]
    }

    /// `P_{XU}(a, b)` as `[a][b]`.
    pub fn joint_xu(&self) -> [[f64; 2]; 2] {
        let px = [1.0 - self.source_bias, self.source_bias];
        [
            [px[0] * self.channel[0][0], px[0] * self.channel[0][1]],
            [px[1] * self.channel[1][0], px[1] * self.channel[1][1]],
        ]
    }
}

/// Binary symmetric test channel with crossover `p`.
pub fn bsc(p: f64) -> [[f64; 2]; 2] {
    [[1.0 - p, p], [p, 1.0 - p]]
}

/// Codewords as bit patterns, bit `t` holding coordinate `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Codebook {
    pub n: usize,
    pub words: Vec<u64>,
}

/// Size of `A_ε^n(U)`.
pub fn typical_set_size(cfg: &EnsembleConfig) -> Result<u128> {
    cfg.validate()?;
    Ok(TypicalSet::new(cfg.n, cfg.u_bias(), cfg.eps_typ).size())
}

fn sample_codebook(cfg: &EnsembleConfig, family: u64, sample: u64) -> Result<Codebook> {
    let m = cfg.codebook_size()?;
    let set = TypicalSet::new(cfg.n, cfg.u_bias(), cfg.eps_typ);
    if u128::from(m) > set.size() {
        return Err(Error::Config(format!(
            "codebook size {m} exceeds the {} typical words at n = {}, slack {}",
            set.size(),
            cfg.n,
            cfg.eps_typ
        )));
    }
    let role = rng::role(rng::CODEBOOK, cfg.n, family);
    let mut r = rng::stream(cfg.seed, role, sample, 0);
    let words = (0..m).map(|_| set.unrank(r.gen_range(0..set.size()))).collect();
    Ok(Codebook { n: cfg.n, words })
}

#[derive(Debug, Clone, PartialEq)]
enum Assignment {
    Identity,
    Table(Vec<u32>),
    Lazy,
}

/// One draw from the ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderRealization {
    config: EnsembleConfig,
    family: u64,
    sample: u64,
    codebook: Codebook,
    assignment: Assignment,
    fallback_count: Option<u64>,
}

/// Codebook index for `x`, and whether the fallback was used.
fn assign(cfg: &EnsembleConfig, family: u64, sample: u64, codebook: &Codebook, pxu: &[[f64; 2]; 2], x: u64) -> (u32, bool) {
    let candidates: Vec<u32> = codebook
        .words
        .iter()
        .enumerate()
        .filter(|(_, &u)| jointly_typical(x, u, cfg.n, pxu, cfg.eps_typ))
        .map(|(j, _)| j as u32)
        .collect();
    let m = codebook.words.len() as u32;
    if candidates.is_empty() {
        let mut r = rng::stream(cfg.seed, rng::role(rng::FALLBACK, cfg.n, family), sample, x);
        (r.gen_range(0..m), true)
    } else {
        let mut r = rng::stream(cfg.seed, rng::role(rng::ASSIGN, cfg.n, family), sample, x);
        (candidates[r.gen_range(0..candidates.len())], false)
    }
}

impl EncoderRealization {
    /// Draws encoder number `sample` of stream `family` (independent
    /// encoder pairs use two families).
    pub fn sample(cfg: &EnsembleConfig, family: u64, sample: u64) -> Result<Self> {
        cfg.validate()?;
        if cfg.uncoded {
            return Self::uncoded(cfg);
        }
        let codebook = sample_codebook(cfg, family, sample)?;
        let (assignment, fallback_count) = if cfg.n <= MAX_MATERIALIZED_N {
            let pxu = cfg.joint_xu();
            let pairs: Vec<(u32, bool)> = (0..1u64 << cfg.n)
                .into_par_iter()
                .map(|x| assign(cfg, family, sample, &codebook, &pxu, x))
                .collect();
            let fallbacks = pairs.iter().filter(|p| p.1).count() as u64;
            (Assignment::Table(pairs.into_iter().map(|p| p.0).collect()), Some(fallbacks))
        } else {
            (Assignment::Lazy, None)
        };
        Ok(Self { config: *cfg, family, sample, codebook, assignment, fallback_count })
    }

    /// The identity encoder; its codebook is every `n`-bit word.
    pub fn uncoded(cfg: &EnsembleConfig) -> Result<Self> {
        if cfg.n > MAX_MATERIALIZED_N {
            return Err(Error::TooLarge(format!(
                "uncoded codebook at n = {} exceeds n = {MAX_MATERIALIZED_N}",
                cfg.n
            )));
        }
        let words = (0..1u64 << cfg.n).collect();
        Ok(Self {
            config: EnsembleConfig { uncoded: true, ..*cfg },
            family: 0,
            sample: 0,
            codebook: Codebook { n: cfg.n, words },
            assignment: Assignment::Identity,
            fallback_count: Some(0),
        })
    }

    /// Encoder from an explicit codebook, assigned by typicality.
    pub fn from_codebook(cfg: &EnsembleConfig, codebook: Codebook) -> Result<Self> {
        cfg.validate()?;
        if codebook.n != cfg.n || codebook.words.is_empty() {
            return Err(Error::Config("codebook must be non-empty with blocklength n".into()));
        }
        if cfg.n > MAX_MATERIALIZED_N {
            return Err(Error::TooLarge(format!("explicit codebooks need n ≤ {MAX_MATERIALIZED_N}")));
        }
        let pxu = cfg.joint_xu();
        let pairs: Vec<(u32, bool)> = (0..1u64 << cfg.n)
            .into_par_iter()
            .map(|x| assign(cfg, 0, 0, &codebook, &pxu, x))
            .collect();
        let fallbacks = pairs.iter().filter(|p| p.1).count() as u64;
        Ok(Self {
            config: *cfg,
            family: 0,
            sample: 0,
            codebook,
            assignment: Assignment::Table(pairs.into_iter().map(|p| p.0).collect()),
            fallback_count: Some(fallbacks),
        })
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.config
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    /// Inputs with no jointly typical codeword; known only for tabulated
    /// encoders.
    pub fn fallback_count(&self) -> Option<u64> {
        self.fallback_count
    }

    /// Codeword for input `x` (bit `t` is coordinate `t`).
    pub fn encode(&self, x: u64) -> u64 {
        match &self.assignment {
            Assignment::Identity => x,
            Assignment::Table(t) => self.codebook.words[t[x as usize] as usize],
            Assignment::Lazy => {
                let pxu = self.config.joint_xu();
                let (j, _) = assign(&self.config, self.family, self.sample, &self.codebook, &pxu, x);
                self.codebook.words[j as usize]
            }
        }
    }

    /// Output bit `k` as a Boolean function of the input.
    pub fn output_bit(&self, k: usize) -> Result<BooleanFunction> {
        let n = self.config.n;
        if n > MAX_MATERIALIZED_N {
            return Err(Error::TooLarge(format!("output tables need n ≤ {MAX_MATERIALIZED_N}")));
        }
        if k >= n {
            return Err(Error::Domain(format!("coordinate {k} outside 0..{n}")));
        }
        BooleanFunction::binary_from_fn(n, |x| self.encode(x) >> k & 1 == 1)
    }
}

/// Draws encoder 0 of the configuration.
pub fn sample_encoder(cfg: &EnsembleConfig) -> Result<EncoderRealization> {
    EncoderRealization::sample(cfg, 0, 0)
}

/// Dependency spectrum of output bit `k` under the source.
pub fn encoder_bit_spectrum(enc: &EncoderRealization, k: usize) -> Result<DependencySpectrum> {
    spectrum_for(&enc.output_bit(k)?, &enc.config.source_marginal())
}
