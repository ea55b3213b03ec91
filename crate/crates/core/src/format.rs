//! JSON file formats for Boolean functions, pair sources and marginals,
//! plus the comma-separated list syntax used on the command line.
//!
//! Boolean function: `{ "n": 2, "d": 2, "table": "0001" }` where character
//! `t` of `table` is the value at word index `t`.
//! Pair source: `{ "joint": [[0.45, 0.05], [0.05, 0.45]], "n": 2 }`.
//! Marginal: `{ "probs": [0.7, 0.3] }`.
//!
//! Every object may carry an optional `"schema"` tag; when present it must
//! match the tag this crate writes for other outputs of the same kind.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{table_len, BooleanFunction, Marginal, PairSource};

pub const BOOLEAN_FUNCTION_SCHEMA: &str = "boolcorr.function/1";
pub const PAIR_SOURCE_SCHEMA: &str = "boolcorr.joint/1";
pub const MARGINAL_SCHEMA: &str = "boolcorr.marginal/1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FunctionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    n: usize,
    d: usize,
    table: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairSourceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    joint: Vec<Vec<f64>>,
    n: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MarginalFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema: Option<String>,
    probs: Vec<f64>,
}

fn check_schema(found: &Option<String>, expected: &str) -> Result<()> {
    match found {
        Some(s) if s != expected => {
            Err(Error::Format(format!("schema {s:?} does not match {expected:?}")))
        }
        _ => Ok(()),
    }
}

pub fn parse_boolean_function(text: &str) -> Result<BooleanFunction> {
    let file: FunctionFile = serde_json::from_str(text)?;
    check_schema(&file.schema, BOOLEAN_FUNCTION_SCHEMA)?;
    let expected = table_len(file.d, file.n).ok_or_else(|| {
        Error::TooLarge(format!("{}^{} entries exceed the table limit", file.d, file.n))
    })?;
    if file.table.len() != expected {
        return Err(Error::Format(format!(
            "table has {} characters, expected {expected}",
            file.table.len()
        )));
    }
    let table = file
        .table
        .bytes()
        .map(|b| match b {
            b'0' => Ok(false),
            b'1' => Ok(true),
            other => Err(Error::Format(format!("table character {:?} is not 0 or 1", other as char))),
        })
        .collect::<Result<Vec<_>>>()?;
    BooleanFunction::new(file.n, file.d, table)
}

pub fn boolean_function_to_json(f: &BooleanFunction) -> String {
    let file = FunctionFile {
        schema: None,
        n: f.n(),
        d: f.alphabet_size(),
        table: f.table().iter().map(|&b| if b { '1' } else { '0' }).collect(),
    };
    serde_json::to_string(&file).expect("function file serializes")
}

pub fn parse_pair_source(text: &str) -> Result<PairSource> {
    let file: PairSourceFile = serde_json::from_str(text)?;
    check_schema(&file.schema, PAIR_SOURCE_SCHEMA)?;
    PairSource::new(file.joint, file.n)
}

pub fn pair_source_to_json(source: &PairSource) -> String {
    let file = PairSourceFile { schema: None, joint: source.joint_rows(), n: source.n() };
    serde_json::to_string(&file).expect("pair source serializes")
}

pub fn parse_marginal(text: &str) -> Result<Marginal> {
    let file: MarginalFile = serde_json::from_str(text)?;
    check_schema(&file.schema, MARGINAL_SCHEMA)?;
    Marginal::new(file.probs)
}

pub fn marginal_to_json(m: &Marginal) -> String {
    let file = MarginalFile { schema: None, probs: m.probs().to_vec() };
    serde_json::to_string(&file).expect("marginal serializes")
}

/// Parses `"0,0.01, 0.1"`. Empty items and non-finite values are rejected.
pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|item| {
            let item = item.trim();
            let v: f64 = item
                .parse()
                .map_err(|_| Error::Format(format!("not a number: {item:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Format(format!("not a finite number: {item:?}")))
            }
        })
        .collect()
}

/// Parses `"6,8,10"`.
pub fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse()
                .map_err(|_| Error::Format(format!("not a non-negative integer: {item:?}")))
        })
        .collect()
}
