//! Command-line front end. [`run`] parses arguments, executes one command
//! on a bounded thread pool and writes a JSON document that embeds its run
//! manifest.
//!
//! Exit codes: 0 success, 1 failed self-test or internal error, 2 invalid
//! input or usage, 3 instance too large for exact computation.

mod args;
mod commands;
mod manifest;
mod selftest;

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use log::LevelFilter;

pub use args::Cli;
use args::Command;
pub use manifest::{parse as parse_manifest, reproducible_args, Manifest, MANIFEST_SCHEMA};

#[derive(Debug)]
pub enum CliError {
    Core(boolcorr::Error),
    Io(PathBuf, std::io::Error),
    Input(String),
    SelftestFailed(usize),
    Internal(String),
}

impl CliError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(path.to_path_buf(), e)
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(boolcorr::Error::TooLarge(_)) => 3,
            CliError::Core(boolcorr::Error::NegativeVariance { .. }) => 1,
            CliError::Core(_) | CliError::Io(..) | CliError::Input(_) => 2,
            CliError::SelftestFailed(_) | CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Input(m) | CliError::Internal(m) => f.write_str(m),
            CliError::SelftestFailed(n) => write!(f, "{n} self-test check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<boolcorr::Error> for CliError {
    fn from(e: boolcorr::Error) -> Self {
        CliError::Core(e)
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    // Configured from flags only; the environment is not consulted.
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    let raw: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli, reproducible_args(&raw)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, args: Vec<String>) -> Result<(), CliError> {
    if let Command::Rerun(r) = &cli.command {
        let recorded = manifest::load(&r.manifest)?;
        manifest::verify_inputs(&recorded)?;
        let argv = std::iter::once("boolcorr".to_string()).chain(recorded.args.iter().cloned());
        let inner = Cli::try_parse_from(argv).map_err(|e| CliError::Input(format!("recorded arguments: {e}")))?;
        if matches!(inner.command, Command::Rerun(_)) {
            return Err(CliError::Input("a manifest cannot record another rerun".into()));
        }
        let inner = Cli { threads: cli.threads, out: cli.out, timing: cli.timing, verbose: cli.verbose, ..inner };
        return execute(inner, recorded.args);
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        builder = builder.num_threads(t as usize);
    }
    let pool = builder.build().map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;

    let start = Instant::now();
    let mut ctx = commands::Context::default();
    let outcome = pool.install(|| commands::dispatch(&cli.command, &mut ctx));
    let body = match outcome {
        Ok(body) => body,
        Err(CliError::SelftestFailed(n)) => {
            // Still emit the report before failing.
            if let Some(body) = ctx.take_report() {
                emit(&cli, &args, &ctx, body, start)?;
            }
            return Err(CliError::SelftestFailed(n));
        }
        Err(e) => return Err(e),
    };
    emit(&cli, &args, &ctx, body, start)
}

fn emit(
    cli: &Cli,
    args: &[String],
    ctx: &commands::Context,
    mut body: serde_json::Map<String, serde_json::Value>,
    start: Instant,
) -> Result<(), CliError> {
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA.to_string(),
        tool: "boolcorr".to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        args: args.to_vec(),
        seed: ctx.seed,
        config: serde_json::to_value(&cli.command).map_err(|e| CliError::Internal(e.to_string()))?,
        inputs: ctx.inputs.clone(),
        outputs: ctx.outputs.clone(),
        wall_clock_ms: cli.timing.then(|| start.elapsed().as_millis() as u64),
    };
    body.insert(
        "manifest".into(),
        serde_json::to_value(&manifest).map_err(|e| CliError::Internal(e.to_string()))?,
    );
    let doc = serde_json::Value::Object(body);
    if let Some(path) = find_null(&doc, "$") {
        return Err(CliError::Internal(format!("non-finite number at {path}")));
    }
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

/// Path of the first `null`, which can only come from a non-finite float.
fn find_null(v: &serde_json::Value, at: &str) -> Option<String> {
    match v {
        serde_json::Value::Null => Some(at.to_string()),
        serde_json::Value::Array(items) => {
            items.iter().enumerate().find_map(|(i, x)| find_null(x, &format!("{at}[{i}]")))
        }
        serde_json::Value::Object(map) => map.iter().find_map(|(k, x)| find_null(x, &format!("{at}.{k}"))),
        _ => None,
    }
}
