use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::scenario::{Diagnostic, Provenance, Scenario};

/// Outcome of one expected band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub provenance: Provenance,
    pub source: String,
    pub passed: bool,
    pub detail: String,
}

/// Result of one requested diagnostic; `result` is diagnostic-specific JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticOutcome {
    pub diagnostic: Diagnostic,
    pub ok: bool,
    pub error: Option<String>,
    pub result: serde_json::Value,
    pub seconds: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepCounts {
    pub trajectories: usize,
    pub samples: usize,
    pub jumps: usize,
    pub truncated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    pub diagnostics: Vec<DiagnosticOutcome>,
    pub checks: Vec<CheckResult>,
    pub artifacts: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
    pub steps: StepCounts,
    pub passed: bool,
}

impl Report {
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .diagnostics
            .iter()
            .filter(|d| !d.ok)
            .map(|d| format!("{:?}: {}", d.diagnostic, d.error.as_deref().unwrap_or("failed")))
            .collect();
        out.extend(
            self.checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{} [{:?}]: {}", c.check, c.provenance, c.detail)),
        );
        out
    }
}
