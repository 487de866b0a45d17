//! Machine-readable run reports with stable JSON and CSV rendering.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::graph::BipartiteGraph;

pub const SIG_DIGITS: usize = 12;

/// Rounds to `SIG_DIGITS` significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Shortest text for the rounded value; non-finite values print as `nan`, `inf` or `-inf`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{:?}", round_sig(x))
}

fn ser_num<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(round_sig(*x))
    } else {
        s.serialize_none()
    }
}

fn ser_opt<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_num(v, s),
        None => s.serialize_none(),
    }
}

fn de_num<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub name: String,
    #[serde(serialize_with = "ser_num", deserialize_with = "de_num")]
    pub value: f64,
    #[serde(serialize_with = "ser_opt", default)]
    pub expected: Option<f64>,
    #[serde(serialize_with = "ser_opt", default)]
    pub abs_err: Option<f64>,
}

impl ReportRow {
    pub fn value(name: impl Into<String>, value: f64) -> ReportRow {
        ReportRow { name: name.into(), value, expected: None, abs_err: None }
    }

    pub fn compared(name: impl Into<String>, value: f64, expected: f64) -> ReportRow {
        ReportRow { name: name.into(), value, expected: Some(expected), abs_err: Some((value - expected).abs()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub graph_digest: Option<String>,
    pub params: BTreeMap<String, String>,
    pub rows: Vec<ReportRow>,
    pub seed: Option<u64>,
    pub passed: bool,
    #[serde(serialize_with = "ser_num", deserialize_with = "de_num")]
    pub wall_time_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "json" => Some(Format::Json),
            "csv" => Some(Format::Csv),
            _ => None,
        }
    }
}

/// SHA-256 of the canonical graph JSON, hex encoded.
pub fn graph_digest(g: &BipartiteGraph) -> String {
    let d = Sha256::digest(g.to_json().as_bytes());
    d.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunReport {
    pub fn new(command: impl Into<String>) -> RunReport {
        RunReport {
            command: command.into(),
            graph_digest: None,
            params: BTreeMap::new(),
            rows: Vec::new(),
            seed: None,
            passed: true,
            wall_time_s: 0.0,
        }
    }

    pub fn with_graph(mut self, g: &BipartiteGraph) -> RunReport {
        self.graph_digest = Some(graph_digest(g));
        self
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.insert(key.to_string(), value.to_string());
    }

    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    pub fn from_json(text: &str) -> Result<RunReport> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn emit(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s.into_bytes()
            }
            Format::Csv => self.csv().into_bytes(),
        }
    }

    fn csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
        let mut out = String::from("name,value,expected,abs_err\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                csv_field(&r.name),
                fmt_num(r.value),
                opt(r.expected),
                opt(r.abs_err)
            ));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
