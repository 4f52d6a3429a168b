//! Shared output plumbing: formats, CSV quoting, verdict and witness
//! strings, and the stdout-or-file sink.

use std::fs;
use std::path::Path;

use pascu_core::admissibility::{Verdict, WitnessPoint};

use crate::config::{CliError, CliResult};

#[derive(Copy, Clone, PartialEq, Eq, Debug, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// First line of every CSV product; bump when columns change meaning.
pub const CSV_SCHEMA_LINE: &str = "# schema=1";

pub fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::NotApplicable => "not_applicable",
    }
}

pub fn witness_str(w: &WitnessPoint) -> String {
    match w {
        WitnessPoint::Param { name, value } => format!("{name} = {value:.6}"),
        WitnessPoint::AtT { t, value } => format!("t = {t:.6} (value {value:.4e})"),
        WitnessPoint::AtZ {
            z_re,
            z_im,
            eps_re,
            eps_im,
            value,
        } => format!(
            "z = {z_re:.4}{z_im:+.4}i, eps = {eps_re:.4}{eps_im:+.4}i (value {value:.4e})"
        ),
    }
}

/// RFC-4180 quoting: wrap fields containing separators or quotes, double
/// embedded quotes.
pub fn csv_field(s: &str) -> String {
    if s.contains(['"', ',', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_line(fields: &[String]) -> String {
    fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn emit(out: Option<&Path>, body: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| {
            CliError::input(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

pub fn to_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Numeric(format!("cannot serialize report: {e}")))
}
