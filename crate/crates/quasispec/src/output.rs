//! CSV tables and JSON reports.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config_echo: Value,
    pub results: Vec<Value>,
    pub margins: Map<String, Value>,
    pub wall_time_s: f64,
    pub passed: bool,
}

impl Report {
    pub fn margin(&mut self, key: &str, value: f64) {
        self.margins.insert(key.to_string(), json_f64(value));
    }
}

/// Non-finite floats become `null`.
pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

#[derive(Clone, Debug)]
pub enum Output {
    Csv(Table),
    Json(Report),
}

impl Output {
    pub fn render(&self) -> String {
        match self {
            Output::Csv(t) => t.to_csv(),
            Output::Json(r) => {
                let mut s = serde_json::to_string_pretty(r).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }

    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        let text = self.render();
        match path {
            Some(p) => std::fs::write(p, text).map_err(|source| CliError::Output { path: p.to_path_buf(), source }),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes()).map_err(|source| CliError::Output { path: "<stdout>".into(), source })
            }
        }
    }
}
