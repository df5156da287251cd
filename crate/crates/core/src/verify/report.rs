use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Informational checks do not affect the summary.
    pub required: bool,
    pub detail: Value,
}

impl CheckResult {
    pub fn required(name: &str, passed: bool, detail: Value) -> Self {
        CheckResult { name: name.into(), passed, required: true, detail }
    }

    pub fn info(name: &str, passed: bool, detail: Value) -> Self {
        CheckResult { name: name.into(), passed, required: false, detail }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub passed: bool,
    pub failed: Vec<String>,
}

/// Self-contained record of one scenario. Everything except
/// `wall_clock_seconds` is a deterministic function of `inputs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub scenario: String,
    pub inputs: Value,
    pub checks: Vec<CheckResult>,
    pub wall_clock_seconds: f64,
    pub summary: Summary,
}

impl VerificationReport {
    pub fn new(scenario: &str, inputs: Value, checks: Vec<CheckResult>, wall_clock_seconds: f64) -> Self {
        let failed: Vec<String> = checks.iter().filter(|c| c.required && !c.passed).map(|c| c.name.clone()).collect();
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            scenario: scenario.into(),
            inputs,
            checks,
            wall_clock_seconds,
            summary: Summary { passed: failed.is_empty(), failed },
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// The report with the wall-clock field zeroed, for comparisons.
    pub fn without_timing(&self) -> Self {
        VerificationReport { wall_clock_seconds: 0.0, ..self.clone() }
    }
}
