use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use boolcorr::correlation::{psi, theorem_bounds_with, ExactMode};
use boolcorr::decomposition::{
    k_letter_profile, real_transform, spectrum, spectrum_fast_binary, spectrum_via_basis,
};
use boolcorr::ensemble::{
    bsc, concentration_experiment, default_eps_typ, discontinuity_experiment,
    slce_property2_check, EncoderMode, EnsembleConfig,
};
use boolcorr::format::{parse_boolean_function, parse_f64_list, parse_marginal, parse_pair_source, parse_usize_list};
use boolcorr::model::{BooleanFunction, Marginal, PairSource, SubsetMask};
use boolcorr::netbounds::{
    ic_hz_bound, mac_hx_bound, mac_single_user_rate, suboptimality_gap, IcBoundInput, MacBoundInput,
};

use crate::args::*;
use crate::manifest::sha256_hex;
use crate::{selftest, CliError};

/// Above this many entries, per-mask listings go to the CSV only.
const MAX_LISTED: usize = 1 << 16;

const FALLBACK_RULE: &str =
    "inputs with no jointly typical codeword map to a codeword chosen uniformly by the seeded stream";

/// What a command read and wrote, for the manifest.
#[derive(Default)]
pub struct Context {
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    report: Option<Map<String, Value>>,
}

impl Context {
    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|_| CliError::Input(format!("{}: not UTF-8", path.display())))
    }

    fn function(&mut self, path: &Path) -> Result<BooleanFunction, CliError> {
        let text = self.read(path)?;
        parse_boolean_function(&text).map_err(|e| annotate(path, e))
    }

    fn joint(&mut self, path: &Path) -> Result<PairSource, CliError> {
        let text = self.read(path)?;
        parse_pair_source(&text).map_err(|e| annotate(path, e))
    }

    fn write_csv<R: Serialize>(&mut self, path: &Path, rows: &[R]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| CliError::Internal(format!("csv: {e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Internal(format!("csv: {e}")))?;
        fs::write(path, &bytes).map_err(|e| CliError::io(path, e))?;
        self.outputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn take_report(&mut self) -> Option<Map<String, Value>> {
        self.report.take()
    }
}

fn annotate(path: &Path, e: boolcorr::Error) -> CliError {
    match e {
        boolcorr::Error::Format(m) => CliError::Core(boolcorr::Error::Format(format!("{}: {m}", path.display()))),
        other => CliError::Core(other),
    }
}

fn to_map(schema: &str, v: impl Serialize) -> Result<Map<String, Value>, CliError> {
    let mut map = match serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()))? {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    map.insert("schema".into(), Value::String(schema.into()));
    Ok(map)
}

fn coordinates(mask: SubsetMask, n: usize) -> Vec<usize> {
    (0..n).filter(|&t| mask.contains_coord(t)).collect()
}

pub fn dispatch(cmd: &Command, ctx: &mut Context) -> Result<Map<String, Value>, CliError> {
    match cmd {
        Command::Spectrum(a) => spectrum_cmd(a, ctx),
        Command::Bound(a) => bound_cmd(a, ctx),
        Command::Psi(a) => {
            let src = ctx.joint(&a.joint)?;
            let mc = psi(&src)?;
            to_map("boolcorr.psi/1", json!({
                "psi": mc.psi,
                "method": mc.method,
                "degenerate": mc.degenerate,
                "dx": src.dx(),
                "dy": src.dy(),
            }))
        }
        Command::Ensemble(e) => ensemble_cmd(e, ctx),
        Command::Netbound(n) => netbound_cmd(n),
        Command::Selftest => {
            let report = selftest::run_all();
            let failed = report.failed;
            let map = to_map("boolcorr.selftest/1", report)?;
            if failed > 0 {
                ctx.report = Some(map);
                return Err(CliError::SelftestFailed(failed));
            }
            Ok(map)
        }
        Command::Rerun(_) => Err(CliError::Internal("rerun is resolved before dispatch".into())),
    }
}

#[derive(Serialize)]
struct SpectrumRow {
    mask: u32,
    coordinates: String,
    weight: u32,
    variance: f64,
}

fn spectrum_cmd(a: &SpectrumArgs, ctx: &mut Context) -> Result<Map<String, Value>, CliError> {
    let f = ctx.function(&a.function)?;
    let marginal = match (&a.marginal, a.bias) {
        (Some(path), _) => {
            let text = ctx.read(path)?;
            parse_marginal(&text).map_err(|e| annotate(path, e))?
        }
        (None, Some(q)) => {
            if f.alphabet_size() != 2 {
                return Err(CliError::Input("--bias needs a binary function; use --marginal".into()));
            }
            Marginal::bernoulli(q)?
        }
        (None, None) => return Err(CliError::Input("one of --bias or --marginal is required".into())),
    };
    let binary = f.alphabet_size() == 2 && marginal.alphabet_size() == 2;
    let spec = match a.method {
        SpectrumMethod::Auto if binary => spectrum_fast_binary(&f, marginal.prob(1))?,
        SpectrumMethod::Auto | SpectrumMethod::Moments => spectrum(&f, &marginal)?,
        SpectrumMethod::Binary => spectrum_fast_binary(&f, marginal.prob(1))?,
        SpectrumMethod::Basis => spectrum_via_basis(&f, &marginal)?,
    };
    let s = real_transform(&f, &marginal)?.one_prob();
    let n = f.n();
    let rows: Vec<SpectrumRow> = spec
        .nonzero()
        .map(|(m, v)| SpectrumRow {
            mask: m.bits(),
            coordinates: coordinates(m, n).iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "),
            weight: m.weight(),
            variance: v,
        })
        .collect();
    if let Some(path) = &a.csv {
        ctx.write_csv(path, &rows)?;
    }
    let profile: Vec<Value> = k_letter_profile(&spec).into_iter().map(|(k, v)| json!({"weight": k, "mass": v})).collect();
    let mut out = json!({
        "n": n,
        "d": f.alphabet_size(),
        "marginal": marginal.probs(),
        "method": a.method,
        "s": s,
        "total": spec.total(),
        "sum": spec.sum(),
        "profile": profile,
        "nonzero_components": rows.len(),
    });
    if rows.len() <= MAX_LISTED {
        out["components"] = rows
            .iter()
            .map(|r| json!({"mask": r.mask, "coordinates": coordinates(SubsetMask::new(r.mask), n), "variance": r.variance}))
            .collect();
    }
    to_map("boolcorr.spectrum/1", out)
}

#[derive(Serialize)]
struct TermRow {
    mask: u32,
    coordinates: String,
    weight: u32,
    c: f64,
    p: f64,
    q: f64,
}

fn bound_cmd(a: &BoundArgs, ctx: &mut Context) -> Result<Map<String, Value>, CliError> {
    let e = ctx.function(&a.e)?;
    let f = ctx.function(&a.f)?;
    let src = ctx.joint(&a.joint)?;
    let mode = if a.exact {
        ExactMode::Require
    } else if a.no_exact {
        ExactMode::Skip
    } else {
        ExactMode::Auto
    };
    let mut report = theorem_bounds_with(&e, &f, &src, mode)?;
    let n = e.n();
    if let Some(path) = &a.csv {
        let rows: Vec<TermRow> = report
            .terms
            .iter()
            .map(|t| TermRow {
                mask: t.mask.bits(),
                coordinates: coordinates(t.mask, n).iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" "),
                weight: t.mask.weight(),
                c: t.c,
                p: t.p,
                q: t.q,
            })
            .collect();
        ctx.write_csv(path, &rows)?;
    }
    let listed = report.terms.len() <= MAX_LISTED;
    if !listed {
        report.terms.clear();
    }
    let mut map = to_map("boolcorr.bound/1", &report)?;
    map.insert("n".into(), json!(n));
    if !listed {
        map.insert("terms_omitted".into(), json!(true));
    }
    Ok(map)
}

fn ensemble_config(n: usize, o: &EnsembleOpts) -> EnsembleConfig {
    EnsembleConfig::new(n, o.rate, o.seed)
        .with_source_bias(o.bias)
        .with_channel(bsc(o.test_channel))
        .with_eps_typ(o.eps_typ.unwrap_or_else(|| default_eps_typ(n)))
}

/// Index pairs where the sequence increases, and whether each increase is
/// within the larger of the two standard errors.
fn trend(ns: &[usize], means: &[f64], ses: &[f64]) -> Value {
    let inversions: Vec<Value> = (1..means.len())
        .filter(|&i| means[i] > means[i - 1])
        .map(|i| {
            json!({
                "from_n": ns[i - 1],
                "to_n": ns[i],
                "increase": means[i] - means[i - 1],
                "within_one_se": means[i] - means[i - 1] <= ses[i].max(ses[i - 1]),
            })
        })
        .collect();
    let non_increasing = inversions.is_empty()
        || (inversions.len() == 1 && inversions[0]["within_one_se"] == Value::Bool(true));
    json!({
        "n": ns,
        "mean": means,
        "se": ses,
        "inversions": inversions,
        "non_increasing_allowing_one_inversion": non_increasing,
    })
}

#[derive(Serialize)]
struct ConcentrationRow {
    n: usize,
    sample: u64,
    statistic: f64,
    dictator_mass: f64,
    total: f64,
    fallback_count: u64,
}

#[derive(Serialize)]
struct DiscontinuityRow {
    n: usize,
    eps: f64,
    sample: u64,
    disagreements: u64,
    draws: u64,
    estimate: f64,
    half_width: f64,
    bound_main: f64,
    bound_full: f64,
    exact: Option<f64>,
}

#[derive(Serialize)]
struct SlceRow {
    n: usize,
    samples: u64,
    max_deviation: f64,
    mean_deviation: f64,
    fallback_fraction: f64,
}

fn ensemble_cmd(cmd: &EnsembleCommand, ctx: &mut Context) -> Result<Map<String, Value>, CliError> {
    match cmd {
        EnsembleCommand::Concentration(a) => {
            ctx.seed = Some(a.opts.seed);
            let ns = parse_usize_list(&a.n)?;
            let mut runs = Vec::new();
            let mut rows = Vec::new();
            for &n in &ns {
                let report = concentration_experiment(&ensemble_config(n, &a.opts), a.m, a.samples)?;
                log::info!("n = {n}: mean statistic {}", report.statistic.mean);
                rows.extend(report.rows.iter().map(|r| ConcentrationRow {
                    n,
                    sample: r.sample,
                    statistic: r.statistic,
                    dictator_mass: r.dictator_mass,
                    total: r.total,
                    fallback_count: r.fallback_count,
                }));
                runs.push(report);
            }
            if let Some(path) = &a.csv {
                ctx.write_csv(path, &rows)?;
            }
            let means: Vec<f64> = runs.iter().map(|r| r.statistic.mean).collect();
            let ses: Vec<f64> = runs.iter().map(|r| r.statistic.se).collect();
            to_map("boolcorr.concentration/1", json!({
                "runs": runs,
                "trend": trend(&ns, &means, &ses),
                "fallback_rule": FALLBACK_RULE,
            }))
        }
        EnsembleCommand::Discontinuity(a) => {
            ctx.seed = Some(a.opts.seed);
            let eps = parse_f64_list(&a.eps)?;
            let mode = match a.mode {
                Mode::Shared => EncoderMode::Shared,
                Mode::Independent => EncoderMode::Independent,
            };
            let report = discontinuity_experiment(&ensemble_config(a.n, &a.opts), &eps, mode, a.samples, a.draws)?;
            if let Some(path) = &a.csv {
                let rows: Vec<DiscontinuityRow> = report
                    .rows
                    .iter()
                    .map(|r| DiscontinuityRow {
                        n: a.n,
                        eps: r.eps,
                        sample: r.sample,
                        disagreements: r.disagreements,
                        draws: r.draws,
                        estimate: r.estimate,
                        half_width: r.half_width,
                        bound_main: r.bound_main,
                        bound_full: r.bound_full,
                        exact: r.exact,
                    })
                    .collect();
                ctx.write_csv(path, &rows)?;
            }
            let checks: Vec<Value> = report
                .points
                .iter()
                .map(|p| {
                    if p.eps == 0.0 {
                        json!({"eps": 0.0, "max_estimate": p.max_estimate, "zero_disagreement": p.max_estimate == 0.0})
                    } else {
                        json!({
                            "eps": p.eps,
                            "min_margin": p.min_margin,
                            "estimate_at_least_bound_minus_3hw": p.min_margin >= 0.0,
                        })
                    }
                })
                .collect();
            let mut map = to_map("boolcorr.discontinuity/1", &report)?;
            map.insert("checks".into(), Value::Array(checks));
            map.insert("fallback_rule".into(), json!(FALLBACK_RULE));
            Ok(map)
        }
        EnsembleCommand::SlceCheck(a) => {
            ctx.seed = Some(a.opts.seed);
            let ns = parse_usize_list(&a.n)?;
            let runs = ns
                .iter()
                .map(|&n| slce_property2_check(&ensemble_config(n, &a.opts), a.samples))
                .collect::<boolcorr::Result<Vec<_>>>()?;
            if let Some(path) = &a.csv {
                let rows: Vec<SlceRow> = runs
                    .iter()
                    .map(|r| SlceRow {
                        n: r.config.n,
                        samples: r.samples,
                        max_deviation: r.max_deviation,
                        mean_deviation: r.mean_deviation,
                        fallback_fraction: r.fallback_fraction.mean,
                    })
                    .collect();
                ctx.write_csv(path, &rows)?;
            }
            let maxes: Vec<f64> = runs.iter().map(|r| r.max_deviation).collect();
            let zeros = vec![0.0; maxes.len()];
            to_map("boolcorr.slce-check/1", json!({
                "runs": runs,
                "trend": trend(&ns, &maxes, &zeros),
                "fallback_rule": FALLBACK_RULE,
            }))
        }
    }
}

fn netbound_cmd(cmd: &NetboundCommand) -> Result<Map<String, Value>, CliError> {
    let with_gap = |input: Value, bound: f64, target: Option<f64>| {
        let mut v = json!({"input": input, "bound_bits": bound});
        if let Some(t) = target {
            v["target_bits"] = json!(t);
            v["gap_bits"] = json!(suboptimality_gap(t, bound));
        }
        v
    };
    match cmd {
        NetboundCommand::Ic(a) => {
            let input = IcBoundInput { avg_agreement: a.agreement, q: a.q };
            let bound = ic_hz_bound(input)?;
            to_map("boolcorr.netbound/1", with_gap(json!(input), bound, a.target))
        }
        NetboundCommand::Mac(a) => {
            let input = MacBoundInput { avg_agreement: a.agreement, q: a.q, delta: a.delta };
            let bound = mac_hx_bound(input)?;
            to_map("boolcorr.netbound/1", with_gap(json!(input), bound, a.target))
        }
        NetboundCommand::MacRate(a) => to_map(
            "boolcorr.netbound/1",
            json!({"input": {"q": a.q, "delta": a.delta}, "rate_bits": mac_single_user_rate(a.q, a.delta)?}),
        ),
    }
}
