//! Machine-readable experiment reports: one JSON document plus CSV tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub row_count: usize,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            row_count: 0,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
        self.row_count = self.rows.len();
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        ensure!(
            self.row_count == self.rows.len(),
            "table declares {} rows but holds {}",
            self.row_count,
            self.rows.len()
        );
        let mut w =
            csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub threshold: f64,
    /// `"<="`, `">="`, `"=="` and so on, read as `observed relation threshold`.
    pub relation: String,
    /// Reported but never counted against the run.
    pub report_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub config: BTreeMap<String, Value>,
    pub columns: Vec<String>,
    pub row_count: usize,
    pub rows: Vec<Vec<Value>>,
    pub tables: BTreeMap<String, Table>,
    pub assertions: Vec<Assertion>,
    pub constants: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new<C: Serialize>(command: &str, params: &C, seed: u64) -> Self {
        let mut config = match serde_json::to_value(params).expect("parameters serialize") {
            Value::Object(m) => m.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        config.insert("seed".into(), Value::from(seed));
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config,
            columns: Vec::new(),
            row_count: 0,
            rows: Vec::new(),
            tables: BTreeMap::new(),
            assertions: Vec::new(),
            constants: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn set_table(&mut self, t: Table) {
        self.columns = t.columns;
        self.row_count = t.row_count;
        self.rows = t.rows;
    }

    pub fn main_table(&self) -> Table {
        Table {
            columns: self.columns.clone(),
            row_count: self.row_count,
            rows: self.rows.clone(),
        }
    }

    pub fn constant(&mut self, name: &str, v: f64) {
        self.constants.insert(name.into(), v);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn check_le(&mut self, name: &str, observed: f64, threshold: f64) -> bool {
        self.push_assertion(
            name,
            observed <= threshold,
            observed,
            threshold,
            "<=",
            false,
        )
    }

    pub fn check_ge(&mut self, name: &str, observed: f64, threshold: f64) -> bool {
        self.push_assertion(
            name,
            observed >= threshold,
            observed,
            threshold,
            ">=",
            false,
        )
    }

    /// Counts failures next to a zero threshold.
    pub fn check_zero(&mut self, name: &str, failures: usize) -> bool {
        self.push_assertion(name, failures == 0, failures as f64, 0.0, "==", false)
    }

    pub fn observe_le(&mut self, name: &str, observed: f64, threshold: f64) {
        self.push_assertion(name, observed <= threshold, observed, threshold, "<=", true);
    }

    pub fn push_assertion(
        &mut self,
        name: &str,
        passed: bool,
        observed: f64,
        threshold: f64,
        relation: &str,
        report_only: bool,
    ) -> bool {
        self.assertions.push(Assertion {
            name: name.into(),
            passed,
            observed,
            threshold,
            relation: relation.into(),
            report_only,
        });
        passed
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed || a.report_only)
    }

    /// `key=value` lines that re-create this run through `--config`.
    pub fn config_file(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.config {
            if v.is_null() {
                continue;
            }
            s.push_str(&k.replace('_', "-"));
            s.push('=');
            s.push_str(&cell(v));
            s.push('\n');
        }
        s
    }

    /// Writes `report.json`, `config.txt`, the main CSV and one CSV per extra table.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut written = Vec::new();
        let json = dir.join("report.json");
        fs::write(&json, serde_json::to_string_pretty(self)? + "\n")?;
        written.push(json);
        let cfg = dir.join("config.txt");
        fs::write(&cfg, self.config_file())?;
        written.push(cfg);
        let main = dir.join(format!("{}.csv", self.command));
        self.main_table().write_csv(&main)?;
        written.push(main);
        for (name, t) in &self.tables {
            let p = dir.join(format!("{name}.csv"));
            t.write_csv(&p)?;
            written.push(p);
        }
        Ok(written)
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.assertions
            .iter()
            .map(|a| {
                let status = match (a.passed, a.report_only) {
                    (true, false) => "PASS",
                    (false, false) => "FAIL",
                    (_, true) => "INFO",
                };
                format!(
                    "{status} {}: {} {} {}",
                    a.name,
                    fmt_num(a.observed),
                    a.relation,
                    fmt_num(a.threshold)
                )
            })
            .collect()
    }
}

pub fn fmt_num(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-3 || x.abs() >= 1e6) {
        format!("{x:.4e}")
    } else {
        format!("{x:.6}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub command: String,
    pub wall_seconds: f64,
    pub threads: usize,
}

impl Timings {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let p = dir.join("timings.json");
        fs::write(&p, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_row_count_matches_declaration() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.into(), "x".into()]);
        t.push(vec![Value::Null, 2.5.into()]);
        let p = dir.path().join("t.csv");
        t.write_csv(&p).unwrap();
        let mut r = csv::Reader::from_path(&p).unwrap();
        assert_eq!(r.records().count(), t.row_count);
        t.row_count = 5;
        assert!(t.write_csv(&p).is_err());
    }

    #[test]
    fn report_only_assertions_do_not_fail_the_run() {
        let mut r = Report::new("x", &serde_json::json!({"max_n": 3}), 1);
        r.check_le("a", 1.0, 2.0);
        r.observe_le("b", 5.0, 2.0);
        assert!(r.passed());
        r.check_ge("c", 1.0, 2.0);
        assert!(!r.passed());
        assert_eq!(r.config_file(), "max-n=3\nseed=1\n");
    }
}
