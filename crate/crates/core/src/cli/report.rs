//! Reports: a schema-versioned JSON document plus CSV tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use super::config::{ExperimentKind, Format};
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// A float as a JSON value; non-finite values become strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(round12(x)).map_or(Value::Null, Value::Number)
    } else {
        Value::String(fmt_float(x))
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

/// A float as a CSV cell.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{}", round12(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub name: String,
    pub experiment: ExperimentKind,
    pub results: BTreeMap<String, Value>,
    pub tables: Vec<Table>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(name: &str, experiment: ExperimentKind) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            experiment,
            results: BTreeMap::new(),
            tables: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.into(), value.into());
    }

    pub fn set_f(&mut self, key: &str, x: f64) {
        self.results.insert(key.into(), num(x));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `key,value` lines for the top-level results.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        for (k, v) in &self.results {
            let cell = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let cell = if cell.contains(',') || cell.contains('"') {
                format!("\"{}\"", cell.replace('"', "\"\""))
            } else {
                cell
            };
            let _ = writeln!(out, "{k},{cell}");
        }
        out
    }
}

/// Writes the report into `dir`: `report.json` plus one CSV per table
/// for `json`, or `summary.csv` plus the tables for `csv`. Returns the
/// paths written.
pub fn emit_report(report: &Report, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut write = |name: &str, body: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
        Ok(())
    };
    match format {
        Format::Json => write("report.json", &report.to_json())?,
        Format::Csv => write("summary.csv", &report.summary_csv())?,
    }
    for t in &report.tables {
        write(&format!("{}.csv", t.name), &t.to_csv())?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round12(1.0397207708399179), 1.03972077084);
        assert_eq!(fmt_float(f64::NEG_INFINITY), "-inf");
        assert_eq!(num(0.1 + 0.2), num(0.3));
    }

    #[test]
    fn writes_json_and_tables() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = Report::new("t", ExperimentKind::Entropy);
        r.set_f("value", 3f64.ln());
        let mut t = Table::new("counts", &["n", "count"]);
        t.push(vec!["1".into(), "3".into()]);
        r.tables.push(t);
        let files = emit_report(&r, Format::Json, dir.path()).unwrap();
        assert_eq!(files.len(), 2);
        let body = std::fs::read_to_string(dir.path().join("counts.csv")).unwrap();
        assert_eq!(body, "n,count\n1,3\n");
        let json: Value = serde_json::from_str(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
        assert_eq!(json["results"]["value"], num(3f64.ln()));
    }
}
