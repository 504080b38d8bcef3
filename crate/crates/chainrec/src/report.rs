//! Report envelopes: versioned JSON keyed to the scenario hash, with an
//! optional CSV flattening of tabular result rows for plotting.
//!
//! serde_json maps are ordered, so identical inputs serialize to byte
//! identical documents; determinism is part of the report contract.

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use serde_json::{json, Value};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Wraps suite results in the versioned envelope.
pub fn envelope(kind: &str, scenario: &Scenario, ok: bool, results: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "scenario": {
            "name": scenario.name,
            "sha256": scenario.sha256,
            "mode": scenario.mode,
            "seed": scenario.seed,
        },
        "ok": ok,
        "results": results,
    })
}

/// Pretty JSON with a trailing newline, to `path` or stdout.
pub fn write_json(out: Option<&Path>, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Scenario(format!("serialization: {e}")))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Flattens an array of flat JSON objects into CSV. Columns are the sorted
/// union of keys; nested values are skipped.
pub fn csv_flatten(rows: &[Value]) -> String {
    let mut columns: Vec<String> = Vec::new();
    for row in rows {
        if let Value::Object(map) = row {
            for (k, v) in map {
                if !v.is_object() && !v.is_array() && !columns.contains(k) {
                    columns.push(k.clone());
                }
            }
        }
    }
    columns.sort();
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = columns
            .iter()
            .map(|c| match row.get(c) {
                None | Some(Value::Null) => String::new(),
                Some(Value::String(s)) => csv_cell(s),
                Some(other) => csv_cell(&other.to_string()),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `report.results[table]` (when present and tabular) next to `out`
/// with a `.csv` extension.
pub fn write_csv_sibling(out: &Path, report: &Value, table: &str) -> Result<()> {
    let Some(Value::Array(rows)) = report.pointer(&format!("/results/{table}")) else {
        return Ok(());
    };
    let path = out.with_extension("csv");
    std::fs::write(path, csv_flatten(rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_is_versioned_and_hash_keyed() {
        let s = Scenario::from_str("[operator]\nfamily = \"comb\"\nmu1 = \"2\"\nmu2 = \"4\"\n")
            .unwrap();
        let v = envelope("certify", &s, true, json!([]));
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["scenario"]["sha256"], json!(s.sha256));
        // byte-identical serialization for identical input
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            serde_json::to_string(&envelope("certify", &s, true, json!([]))).unwrap()
        );
    }

    #[test]
    fn csv_flattening_handles_missing_keys_and_quotes() {
        let rows = vec![
            json!({"delta": "0.1", "valid": true, "note": "a,b"}),
            json!({"delta": "0.01", "length": 5}),
        ];
        let csv = csv_flatten(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("delta,length,note,valid"));
        assert_eq!(lines.next(), Some("0.1,,\"a,b\",true"));
        assert_eq!(lines.next(), Some("0.01,5,,"));
    }
}
