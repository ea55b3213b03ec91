//! Run manifests: enough to re-execute a command and check that its
//! inputs are unchanged.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_SCHEMA: &str = "boolcorr.manifest/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema: String,
    pub tool: String,
    pub version: String,
    /// Arguments after the program name, without output-only flags.
    pub args: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    /// Input path to SHA-256 of its contents.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    /// Side-file path to SHA-256 of what was written.
    #[serde(default)]
    pub outputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<u64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Drops flags that only affect where output goes or how fast it arrives.
pub fn reproducible_args(raw: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(raw.len());
    let mut skip_next = false;
    for arg in raw {
        if skip_next {
            skip_next = false;
            continue;
        }
        match arg.as_str() {
            "--threads" | "--out" | "-o" => skip_next = true,
            "--timing" | "--verbose" => {}
            a if a.starts_with("--threads=") || a.starts_with("--out=") => {}
            a if a.starts_with("-o") && a.len() > 2 && !a.starts_with("--") => {}
            a if a.len() > 1 && a.starts_with('-') && a[1..].chars().all(|c| c == 'v') => {}
            _ => out.push(arg.clone()),
        }
    }
    out
}

/// Reads a manifest, either bare or embedded under `"manifest"`.
pub fn load(path: &Path) -> Result<Manifest, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Parses manifest JSON, either bare or embedded under `"manifest"`.
pub fn parse(text: &str) -> Result<Manifest, CliError> {
    let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(inner) = value.get_mut("manifest") {
        value = inner.take();
    }
    let manifest: Manifest = serde_json::from_value(value).map_err(|e| CliError::Input(e.to_string()))?;
    if manifest.schema != MANIFEST_SCHEMA {
        return Err(CliError::Input(format!("manifest schema {:?} is not {MANIFEST_SCHEMA:?}", manifest.schema)));
    }
    Ok(manifest)
}

/// Fails when an input recorded in the manifest has changed.
pub fn verify_inputs(manifest: &Manifest) -> Result<(), CliError> {
    for (path, digest) in &manifest.inputs {
        let bytes = fs::read(path).map_err(|e| CliError::io(Path::new(path), e))?;
        if &sha256_hex(&bytes) != digest {
            return Err(CliError::Input(format!("input {path} differs from the manifest digest")));
        }
    }
    Ok(())
}
