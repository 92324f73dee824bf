//! Configuration-driven verification suites and their reports.

mod lsds;
mod suites;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dirichlet::OpRecord;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::measures::MeasureSpec;

pub use lsds::{shift_lsds_norm, Piece};
pub use suites::{example_names, run_example};

/// Environment variable multiplying every tolerance.
pub const TOL_SCALE_VAR: &str = "MISO_LAB_TOL_SCALE";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    CoreIdentities,
    MeasureReport,
    SemigroupSim,
    PaperExamples,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub suite: Suite,
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub degrees: Vec<usize>,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub tolerances_override: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(suite: Suite) -> Self {
        ExperimentConfig {
            suite,
            measure: None,
            degrees: Vec::new(),
            times: Vec::new(),
            tolerances_override: BTreeMap::new(),
            seed: 0,
        }
    }

    /// Parses and validates a JSON config; errors carry line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(pair) = self.degrees.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "field `degrees` must be strictly increasing ({} then {})",
                pair[0], pair[1]
            )));
        }
        if let Some(t) = self.times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(Error::InvalidArgument(format!("field `times` has invalid entry {t}")));
        }
        for (name, value) in &self.tolerances_override {
            if !Tolerances::NAMES.contains(&name.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "field `tolerancesOverride` has unknown key {name:?}; known keys: {}",
                    Tolerances::NAMES.join(", ")
                )));
            }
            if !(value.is_finite() && *value > 0.0) {
                return Err(Error::InvalidArgument(format!("tolerance {name:?} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

/// Named tolerances with per-config overrides and a global scale.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    values: BTreeMap<&'static str, f64>,
    scale: f64,
}

impl Tolerances {
    pub const NAMES: [&'static str; 9] =
        ["exact", "recursion", "identity", "model", "classify", "growth", "truncated", "quadrature", "difference"];

    const DEFAULTS: [f64; 9] = [1e-12, 1e-10, 1e-9, 1e-10, 1e-8, 1e-7, 1e-7, 1e-6, 1e-5];

    pub fn new(overrides: &BTreeMap<String, f64>, scale: f64) -> Self {
        let mut values: BTreeMap<&'static str, f64> = Self::NAMES.into_iter().zip(Self::DEFAULTS).collect();
        for name in Self::NAMES {
            if let Some(v) = overrides.get(name) {
                values.insert(name, *v);
            }
        }
        Tolerances { values, scale }
    }

    pub fn get(&self, name: &str) -> f64 {
        self.values[name] * self.scale
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances::new(&BTreeMap::new(), 1.0)
    }
}

/// Reads [`TOL_SCALE_VAR`]; unset means 1.
pub fn tolerance_scale() -> Result<f64> {
    match std::env::var(TOL_SCALE_VAR) {
        Err(_) => Ok(1.0),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
            _ => Err(Error::InvalidArgument(format!("{TOL_SCALE_VAR} must be a positive number, got {s:?}"))),
        },
    }
}

/// One pass/fail line of a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub check: String,
    /// Name of the result or construction this record exercises.
    pub anchor: String,
    pub value: Value,
    pub expected: Value,
    pub tolerance: Option<f64>,
    pub pass: bool,
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(format!("{x}")), Value::Number)
}

impl Record {
    /// `|value - expected| <= tol`.
    pub fn close(check: &str, anchor: &str, value: f64, expected: f64, tol: f64) -> Self {
        Record {
            check: check.into(),
            anchor: anchor.into(),
            value: number(value),
            expected: number(expected),
            tolerance: Some(tol),
            pass: (value - expected).abs() <= tol,
        }
    }

    /// `value <= tol` for a nonnegative residual.
    pub fn residual(check: &str, anchor: &str, value: f64, tol: f64) -> Self {
        Record {
            check: check.into(),
            anchor: anchor.into(),
            value: number(value),
            expected: number(0.0),
            tolerance: Some(tol),
            pass: value <= tol,
        }
    }

    /// Exact comparison of verdict strings.
    pub fn verdict(check: &str, anchor: &str, value: &str, expected: &str) -> Self {
        Record {
            check: check.into(),
            anchor: anchor.into(),
            value: Value::String(value.into()),
            expected: Value::String(expected.into()),
            tolerance: None,
            pass: value == expected,
        }
    }

    /// A qualitative property with a descriptive value.
    pub fn property(check: &str, anchor: &str, value: Value, expected: &str, pass: bool) -> Self {
        Record {
            check: check.into(),
            anchor: anchor.into(),
            value,
            expected: Value::String(expected.into()),
            tolerance: None,
            pass,
        }
    }

    /// Record for an operation that returned an error.
    pub fn error(check: &str, anchor: &str, err: &Error) -> Self {
        Record {
            check: check.into(),
            anchor: anchor.into(),
            value: Value::String(format!("error: {err}")),
            expected: Value::String("success".into()),
            tolerance: None,
            pass: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

/// One row of a w-estimate table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WRow {
    pub degree: usize,
    pub w1: f64,
    /// Number, or `"diverges"`.
    pub w2: Value,
    pub w: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub seed: u64,
    pub records: Vec<Record>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub operations: Vec<OpRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<WRow>,
    pub summary: Summary,
}

impl Report {
    pub fn new(suite: Suite, seed: u64, records: Vec<Record>, operations: Vec<OpRecord>, table: Vec<WRow>) -> Self {
        let passed = records.iter().filter(|r| r.pass).count() + operations.iter().filter(|o| o.pass).count();
        let total = records.len() + operations.len();
        let summary = Summary { total, passed, failed: total - passed };
        Report { suite, seed, records, operations, table, summary }
    }

    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The w-estimate table when present, otherwise the record list.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if !self.table.is_empty() {
            out.push_str("degree,w1,w2,w\n");
            for row in &self.table {
                let w2 = match &row.w2 {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let w = row.w.map_or(String::new(), |w| w.to_string());
                let _ = writeln!(out, "{},{},{},{}", row.degree, row.w1, w2, w);
            }
            return out;
        }
        out.push_str("check,anchor,value,expected,tolerance,pass\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&r.check),
                csv_field(&r.anchor),
                csv_field(&plain(&r.value)),
                csv_field(&plain(&r.expected)),
                r.tolerance.map_or(String::new(), |t| t.to_string()),
                r.pass
            );
        }
        out
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Runs a suite. The report is a deterministic function of the config, the
/// tolerances and the seed; `exec` only changes how records are computed.
pub fn run(config: &ExperimentConfig, tolerances: &Tolerances, exec: Exec) -> Result<Report> {
    config.validate()?;
    suites::run_suite(config, tolerances, exec)
}
