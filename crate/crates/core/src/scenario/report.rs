use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

use super::ScenarioInfo;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Pass when `residual ≤ tolerance`.
    AtMost,
    /// Pass when `measured ≥ tolerance` (a lower bound).
    AtLeast,
    /// Pass when `measured == expected`.
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub expected: Value,
    pub measured: Value,
    pub residual: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

impl CheckRecord {
    /// `residual ≤ tolerance`; NaN fails.
    pub fn within(name: impl Into<String>, expected: f64, measured: f64, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            expected: number(expected),
            measured: number(measured),
            residual,
            tolerance,
            comparison: Comparison::AtMost,
            pass: residual <= tolerance,
        }
    }

    /// `measured ≥ threshold`; the residual is the margin.
    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            expected: number(threshold),
            measured: number(measured),
            residual: measured - threshold,
            tolerance: threshold,
            comparison: Comparison::AtLeast,
            pass: measured >= threshold,
        }
    }

    pub fn equal(name: impl Into<String>, expected: impl Into<String>, measured: impl Into<String>) -> Self {
        let (expected, measured) = (expected.into(), measured.into());
        let pass = expected == measured;
        Self {
            name: name.into(),
            expected: Value::String(expected),
            measured: Value::String(measured),
            residual: if pass { 0.0 } else { 1.0 },
            tolerance: 0.0,
            comparison: Comparison::Equal,
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub samples: usize,
    pub tol: Option<f64>,
    pub params: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub scenario: String,
    pub summary: String,
    pub config: ConfigEcho,
    pub checks: Vec<CheckRecord>,
    /// Set when the scenario aborted; the report then fails.
    pub error: Option<String>,
    pub overall_pass: bool,
    pub elapsed_ms: f64,
}

impl ReportDocument {
    pub(crate) fn new(
        info: &ScenarioInfo,
        config: ConfigEcho,
        checks: Vec<CheckRecord>,
        error: Option<String>,
        elapsed_ms: f64,
    ) -> Self {
        let overall_pass = error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            scenario: info.name.to_string(),
            summary: info.summary.to_string(),
            config,
            checks,
            error,
            overall_pass,
            elapsed_ms,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }
}
