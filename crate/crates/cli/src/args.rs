use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "boolcorr", version, about = "Dependency spectra, agreement bounds and coding-ensemble experiments")]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,

    /// Write the JSON result here instead of stdout.
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,

    /// Record wall-clock time in the manifest (outputs are then no longer
    /// byte-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,

    /// Log progress to stderr (repeat for more detail).
    #[arg(long, short, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Dependency spectrum of a Boolean function.
    #[command(after_help = "CSV columns (--csv): mask,coordinates,weight,variance")]
    Spectrum(SpectrumArgs),
    /// Bounds on P(e(X^n) != f(Y^n)) from the two spectra and the maximal correlation.
    #[command(after_help = "CSV columns (--csv): mask,coordinates,weight,c,p,q")]
    Bound(BoundArgs),
    /// Maximal correlation of a joint distribution.
    Psi(PsiArgs),
    /// Random-coding ensemble experiments.
    #[command(subcommand)]
    Ensemble(EnsembleCommand),
    /// Network converse bounds and rates.
    #[command(subcommand)]
    Netbound(NetboundCommand),
    /// Run the built-in checks; exit 1 on any failure.
    Selftest,
    /// Re-execute the command recorded in a manifest or an output file.
    Rerun(RerunArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    /// Boolean function file.
    #[arg(long = "fn", value_name = "FILE")]
    pub function: PathBuf,
    /// P(X = 1) for a binary source.
    #[arg(long, conflicts_with = "marginal", required_unless_present = "marginal")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias: Option<f64>,
    /// Marginal file for a general alphabet.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginal: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SpectrumMethod::Auto)]
    pub method: SpectrumMethod,
    /// Also write every mask's variance as CSV.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumMethod {
    /// Binary butterfly when d = 2, moment inversion otherwise.
    Auto,
    /// Second moments of conditional expectations and Möbius inversion.
    Moments,
    /// Binary butterfly.
    Binary,
    /// Expansion in the orthogonal single-letter basis.
    Basis,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    /// Function of X^n.
    #[arg(long, value_name = "FILE")]
    pub e: PathBuf,
    /// Function of Y^n.
    #[arg(long, value_name = "FILE")]
    pub f: PathBuf,
    /// Joint distribution file.
    #[arg(long, value_name = "FILE")]
    pub joint: PathBuf,
    /// Require the exhaustive disagreement (exit 3 when too large).
    #[arg(long, conflicts_with = "no_exact")]
    pub exact: bool,
    /// Skip the exhaustive disagreement even when it is cheap.
    #[arg(long)]
    pub no_exact: bool,
    /// Also write the per-mask terms as CSV.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PsiArgs {
    #[arg(long, value_name = "FILE")]
    pub joint: PathBuf,
}

/// Options shared by the ensemble experiments.
#[derive(Debug, Args, Serialize)]
pub struct EnsembleOpts {
    /// Rate R in (0, 1].
    #[arg(long)]
    pub rate: f64,
    #[arg(long)]
    pub seed: u64,
    /// P(X = 1).
    #[arg(long, default_value_t = 0.5)]
    pub bias: f64,
    /// Crossover of the binary symmetric test channel P(U|X).
    #[arg(long, default_value_t = 0.1)]
    pub test_channel: f64,
    /// Typicality slack; defaults to 0.1 for n <= 10 and 0.05 above.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_typ: Option<f64>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnsembleCommand {
    /// Low-weight non-dictator spectral mass of the first output bit.
    #[command(after_help = "CSV columns (--csv): n,sample,statistic,dictator_mass,total,fallback_count")]
    Concentration(ConcentrationArgs),
    /// Disagreement of encoder pairs over a symmetric binary coupling.
    #[command(after_help = "CSV columns (--csv): n,eps,sample,disagreements,draws,estimate,half_width,bound_main,bound_full,exact")]
    Discontinuity(DiscontinuityArgs),
    /// Distance of the averaged output law from single-letter conditionals.
    #[command(after_help = "CSV columns (--csv): n,samples,max_deviation,mean_deviation,fallback_fraction")]
    SlceCheck(SlceArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ConcentrationArgs {
    /// Comma-separated blocklengths.
    #[arg(long)]
    pub n: String,
    /// Weight cutoff m.
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub samples: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub opts: EnsembleOpts,
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Shared,
    Independent,
}

#[derive(Debug, Args, Serialize)]
pub struct DiscontinuityArgs {
    #[arg(long)]
    pub n: usize,
    /// Comma-separated crossover probabilities.
    #[arg(long)]
    pub eps: String,
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long)]
    pub samples: u64,
    /// Monte Carlo pairs per encoder sample and crossover.
    #[arg(long)]
    pub draws: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub opts: EnsembleOpts,
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SlceArgs {
    /// Comma-separated blocklengths (at most 10).
    #[arg(long)]
    pub n: String,
    #[arg(long)]
    pub samples: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub opts: EnsembleOpts,
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetboundCommand {
    /// p log2 q + 1 for the interference-channel example.
    Ic(IcArgs),
    /// p (log2 q - H(N_delta)) + 1 for the common-source MAC example.
    Mac(MacArgs),
    /// Single-user rate of the MAC example with a two-symbol input.
    MacRate(MacRateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct IcArgs {
    /// Average agreement probability.
    #[arg(long)]
    pub agreement: f64,
    #[arg(long)]
    pub q: u32,
    /// Target entropy; adds the suboptimality gap to the output.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct MacArgs {
    #[arg(long)]
    pub agreement: f64,
    #[arg(long)]
    pub q: u32,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct MacRateArgs {
    #[arg(long)]
    pub q: u32,
    #[arg(long)]
    pub delta: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct RerunArgs {
    /// A manifest, or any output JSON embedding one.
    pub manifest: PathBuf,
}
