use std::io::Write;

use serde_json::{Map, Value};

use super::{CliError, Format, RunConfig, SCHEMA_VERSION};
use crate::serde_ext::fmt_ext;

/// A command result in both output shapes.
pub struct Output {
    pub command: &'static str,
    /// JSON object merged under the envelope keys.
    pub json: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

pub fn num(v: f64) -> String {
    fmt_ext(v)
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(fmt_ext).unwrap_or_default()
}

pub fn word(w: &[usize]) -> String {
    w.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// Finite numbers as JSON numbers, infinities as `"inf"`/`"-inf"`, and
/// `None` or NaN as `null`.
pub fn json_num(v: Option<f64>) -> Value {
    match v {
        Some(x) if x.is_finite() => Value::from(x),
        Some(x) if x.is_infinite() => Value::from(fmt_ext(x)),
        _ => Value::Null,
    }
}

fn render(out: &Output, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut obj = Map::new();
            obj.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
            obj.insert("command".into(), Value::from(out.command));
            if let Value::Object(payload) = &out.json {
                obj.extend(payload.clone());
            }
            let mut bytes = serde_json::to_vec_pretty(&Value::Object(obj))
                .map_err(|e| CliError::validation(format!("serialization failed: {e}")))?;
            bytes.push(b'\n');
            Ok(bytes)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::validation(format!("csv output failed: {e}"));
            w.write_record(&out.header).map_err(io)?;
            for row in &out.rows {
                w.write_record(row).map_err(io)?;
            }
            w.into_inner()
                .map_err(|e| CliError::validation(format!("csv output failed: {e}")))
        }
    }
}

pub fn emit(out: &Output, cfg: &RunConfig) -> Result<(), CliError> {
    let bytes = render(out, cfg.format)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::validation(format!("cannot write to stdout: {e}"))),
    }
}
