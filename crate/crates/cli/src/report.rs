//! Report model: deterministic, machine-readable run output.

use serde::Serialize;

use crate::scenario::Parameters;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct AssertionReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub details: serde_json::Value,
    pub assertions: Vec<AssertionReport>,
    pub approximation_events: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub name: String,
    pub parameters: Parameters,
    pub experiments: Vec<ExperimentReport>,
    pub passed: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}

/// Collects named assertions for one experiment.
#[derive(Debug, Default)]
pub struct Checks {
    list: Vec<AssertionReport>,
}

impl Checks {
    pub fn new() -> Self {
        Checks::default()
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.list.push(AssertionReport {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn close(&mut self, name: &str, value: f64, expect: f64, tol: f64) {
        let gap = (value - expect).abs();
        self.check(
            name,
            gap <= tol,
            format!("value {value:.12e}, expect {expect:.12e}, |gap| {gap:.3e}, tol {tol:.1e}"),
        );
    }

    pub fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.check(
            name,
            value <= bound,
            format!("value {value:.12e} <= bound {bound:.3e}"),
        );
    }

    pub fn finish(
        self,
        kind: &str,
        details: serde_json::Value,
        events: Vec<String>,
    ) -> ExperimentReport {
        let passed = self.list.iter().all(|a| a.passed);
        ExperimentReport {
            kind: kind.to_string(),
            details,
            assertions: self.list,
            approximation_events: events,
            passed,
        }
    }
}
