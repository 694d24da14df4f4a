//! Instance descriptions and the bundled corpus.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::folog::{default_budget, parse_formula, Formula, ParamEnv, ParseError};
use crate::gamma::Mode;
use crate::group::{from_expr, GroupError, GroupFile, GroupTable};
use crate::interp::{verify_biinterpretation, CocycleFault, VerifyError, VerifyOptions};
use crate::report::VerificationReport;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    #[default]
    Auto,
    Standard,
    Star,
}

impl ModeChoice {
    pub fn mode(self) -> Option<Mode> {
        match self {
            ModeChoice::Auto => None,
            ModeChoice::Standard => Some(Mode::Standard),
            ModeChoice::Star => Some(Mode::Star),
        }
    }
}

/// One verification instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub name: String,
    /// builder expression, or a path to a group file
    pub group: String,
    pub kappa: String,
    #[serde(default)]
    pub params: BTreeMap<String, usize>,
    #[serde(default)]
    pub mode: ModeChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub suite_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cocycle_fault: Option<CocycleFault>,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("group `{0}`: {1}")]
    Group(String, GroupError),
    #[error("cannot read group file `{0}`: {1}")]
    Io(String, String),
    #[error("group file `{0}`: {1}")]
    GroupFile(String, String),
    #[error("defining formula: {0}")]
    Kappa(ParseError),
    #[error(transparent)]
    Verify(VerifyError),
}

impl SpecError {
    /// Partial report when the budget ran out.
    pub fn partial_report(&self) -> Option<&VerificationReport> {
        match self {
            SpecError::Verify(VerifyError::ComplexityCap { report, .. }) => Some(report),
            _ => None,
        }
    }
}

/// Builds a group from a builder expression, or reads a JSON group file if
/// the text names an existing file.
pub fn load_group(text: &str) -> Result<GroupTable, SpecError> {
    let path = Path::new(text);
    if path.is_file() {
        let data = std::fs::read_to_string(path).map_err(|e| SpecError::Io(text.into(), e.to_string()))?;
        let file: GroupFile =
            serde_json::from_str(&data).map_err(|e| SpecError::GroupFile(text.into(), e.to_string()))?;
        return file.into_table().map_err(|e| SpecError::Group(text.into(), e));
    }
    from_expr(text).map_err(|e| SpecError::Group(text.into(), e))
}

impl InstanceSpec {
    pub fn new(name: &str, group: &str, kappa: &str) -> InstanceSpec {
        InstanceSpec {
            name: name.into(),
            group: group.into(),
            kappa: kappa.into(),
            params: BTreeMap::new(),
            mode: ModeChoice::Auto,
            budget: None,
            seed: 0,
            suite_size: 0,
            cocycle_fault: None,
        }
    }

    pub fn with_param(mut self, name: &str, id: usize) -> InstanceSpec {
        self.params.insert(name.into(), id);
        self
    }

    pub fn options(&self) -> VerifyOptions {
        VerifyOptions {
            mode: self.mode.mode(),
            budget: self.budget.unwrap_or_else(default_budget),
            suite_seed: self.seed,
            suite_size: self.suite_size,
            cocycle_fault: self.cocycle_fault,
        }
    }

    pub fn env(&self) -> ParamEnv {
        self.params.iter().map(|(k, &v)| (k.clone(), v)).collect()
    }

    pub fn kappa_formula(&self) -> Result<Formula, SpecError> {
        parse_formula(&self.kappa).map_err(SpecError::Kappa)
    }

    pub fn group_table(&self) -> Result<GroupTable, SpecError> {
        load_group(&self.group)
    }
}

/// Verifies one instance.
pub fn run_instance(spec: &InstanceSpec) -> Result<VerificationReport, SpecError> {
    let g = Arc::new(spec.group_table()?);
    let kappa = spec.kappa_formula()?;
    verify_biinterpretation(&spec.name, g, &kappa, &spec.env(), &spec.options()).map_err(SpecError::Verify)
}

/// The bundled instances, sorted by name.
pub fn bundled_corpus() -> Vec<InstanceSpec> {
    let squares = "exists y. y*y = x";
    let mut v = vec![
        InstanceSpec::new(
            "C2xC2xC2/C2xC2",
            "product:cyclic:2,cyclic:2,cyclic:2",
            "x = 1 | x = @a | x = @b | x = @a*@b",
        )
        .with_param("a", 1)
        .with_param("b", 2),
        InstanceSpec::new("C4/C2", "cyclic:4", squares),
        InstanceSpec::new("C6/C3", "cyclic:6", squares),
        InstanceSpec::new("D4/C4", "dihedral:4", "x*@r = @r*x").with_param("r", 1),
        InstanceSpec::new("Q8/Z(Q8)", "quaternion8", "forall y. x*y = y*x"),
        InstanceSpec::new("S3/A3", "dihedral:3", squares),
        InstanceSpec::new("S4/A4", "symmetric:4", squares),
        InstanceSpec::new("S4/V4", "symmetric:4", "x*x = 1 & exists y. y*y = x"),
    ];
    v.sort_by(|a, b| a.name.cmp(&b.name));
    v
}

/// Outcome of one corpus row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRow {
    pub instance: String,
    pub verdict: String,
    /// first failing step, or the error for instances that could not run
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<VerificationReport>,
}

/// Runs each instance and returns rows ordered by instance name.
pub fn run_corpus(specs: &[InstanceSpec]) -> Vec<CorpusRow> {
    let mut rows: Vec<CorpusRow> = specs
        .iter()
        .map(|spec| match run_instance(spec) {
            Ok(report) => CorpusRow {
                instance: spec.name.clone(),
                verdict: report.verdict.clone(),
                failure: report.first_failure().map(|s| s.name.clone()),
                report: Some(report),
            },
            Err(e) => CorpusRow {
                instance: spec.name.clone(),
                verdict: crate::report::VERDICT_FAILED.to_string(),
                failure: Some(e.to_string()),
                report: e.partial_report().cloned(),
            },
        })
        .collect();
    rows.sort_by(|a, b| a.instance.cmp(&b.instance));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_sorted_and_parses() {
        let c = bundled_corpus();
        assert_eq!(c.len(), 8);
        assert!(c.windows(2).all(|w| w[0].name < w[1].name));
        for spec in &c {
            spec.kappa_formula().unwrap();
            spec.group_table().unwrap();
        }
    }

    #[test]
    fn spec_json_defaults() {
        let spec: InstanceSpec =
            serde_json::from_str(r#"{"name":"a","group":"cyclic:4","kappa":"exists y. y*y = x"}"#).unwrap();
        assert_eq!(spec.mode, ModeChoice::Auto);
        assert_eq!(spec.suite_size, 0);
        assert!(
            serde_json::from_str::<InstanceSpec>(r#"{"name":"a","group":"cyclic:4","kappa":"x=x","bogus":1}"#).is_err()
        );
    }

    #[test]
    fn small_instances_pass() {
        for spec in bundled_corpus().iter().filter(|s| !s.name.starts_with("S4")) {
            let r = run_instance(spec).unwrap();
            assert!(r.passed(), "{}", r.to_json());
        }
    }
}
