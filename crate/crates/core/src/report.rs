use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One named check in a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub name: String,
    pub pass: bool,
    pub witness_formula: Option<String>,
    pub counterexample: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Step {
    pub fn pass(name: impl Into<String>) -> Step {
        Step { name: name.into(), pass: true, witness_formula: None, counterexample: None, detail: None }
    }

    pub fn fail(name: impl Into<String>, counterexample: Value) -> Step {
        Step {
            name: name.into(),
            pass: false,
            witness_formula: None,
            counterexample: Some(counterexample),
            detail: None,
        }
    }

    pub fn with_witness(mut self, formula: impl Into<String>) -> Step {
        self.witness_formula = Some(formula.into());
        self
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Step {
        self.detail = Some(detail.into());
        self
    }
}

pub const VERDICT_OK: &str = "bi-interpretable";
pub const VERDICT_FAILED: &str = "not verified";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub instance: String,
    pub steps: Vec<Step>,
    pub verdict: String,
}

impl VerificationReport {
    pub fn new(instance: impl Into<String>, steps: Vec<Step>) -> VerificationReport {
        let verdict = if !steps.is_empty() && steps.iter().all(|s| s.pass) { VERDICT_OK } else { VERDICT_FAILED };
        VerificationReport { instance: instance.into(), steps, verdict: verdict.to_string() }
    }

    /// Report for a run that stopped before all steps were checked.
    pub fn incomplete(instance: impl Into<String>, steps: Vec<Step>) -> VerificationReport {
        VerificationReport { instance: instance.into(), steps, verdict: VERDICT_FAILED.to_string() }
    }

    pub fn passed(&self) -> bool {
        self.verdict == VERDICT_OK
    }

    pub fn step(&self, name: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.name == name)
    }

    pub fn first_failure(&self) -> Option<&Step> {
        self.steps.iter().find(|s| !s.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
