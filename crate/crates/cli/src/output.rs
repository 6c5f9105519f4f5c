//! Report serialization. CSV output has two columns, `path` and `value`:
//! one row per JSON leaf, in the key order of the JSON document, with array
//! elements addressed by index (`suites.3.residual`).

use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::args::Format;

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, x)| flatten(&join(k), x, rows)),
        Value::Array(xs) => xs.iter().enumerate().for_each(|(i, x)| flatten(&join(&i.to_string()), x, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

pub fn render(report: &Value, format: Format) -> Result<Vec<u8>, String> {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["path", "value"]).map_err(|e| e.to_string())?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(|e| e.to_string())?;
            }
            w.into_inner().map_err(|e| e.to_string())
        }
    }
}

pub fn emit(report: &Value, format: Format, out: Option<&Path>) -> Result<(), String> {
    let bytes = render(report, format)?;
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(&bytes).map_err(|e| e.to_string()),
    }
}
