use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{ConfusionMatrix, Prf};
use crate::corpus::ExperimentKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Identification,
    Classification,
    Pipeline,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Identification => "identification",
            Experiment::Classification => "classification",
            Experiment::Pipeline => "pipeline",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub label: String,
    #[serde(flatten)]
    pub prf: Prf,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    #[serde(rename = "macro")]
    pub macro_avg: Prf,
    pub accuracy: f64,
    pub mentions: usize,
    pub classes: Vec<ClassReport>,
    pub confusion: ConfusionMatrix,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped_folds: Vec<usize>,
    /// Gold event types with no training ED; their mentions cannot be recovered.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unseen_types: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemReport {
    pub name: String,
    pub protocol: ExperimentKind,
    /// Mean over scenarios of the per-scenario averages.
    #[serde(rename = "macro")]
    pub macro_avg: Prf,
    pub micro_accuracy: f64,
    pub mentions: usize,
    pub scenarios: Vec<ScenarioReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub experiment: Experiment,
    pub seed: u64,
    pub folds: usize,
    /// Effective configuration of the run.
    pub config: serde_json::Value,
    pub systems: Vec<SystemReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn system(&self, name: &str) -> Option<&SystemReport> {
        self.systems.iter().find(|s| s.name == name)
    }

    /// One row per system with macro P, R and F1.
    pub fn to_table(&self) -> String {
        let width = self.systems.iter().map(|s| s.name.len()).max().unwrap_or(0).max(6);
        let mut out = String::new();
        writeln!(out, "{:<width$}  {:>6}  {:>6}  {:>6}", "System", "P", "R", "F1").unwrap();
        for s in &self.systems {
            let m = s.macro_avg;
            writeln!(
                out,
                "{:<width$}  {:>6.3}  {:>6.3}  {:>6.3}",
                s.name, m.precision, m.recall, m.f1
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_aligned() {
        let sys = |name: &str, p, r| SystemReport {
            name: name.into(),
            protocol: ExperimentKind::DescriptToInscript,
            macro_avg: Prf::from_pr(p, r),
            micro_accuracy: 0.0,
            mentions: 0,
            scenarios: vec![],
        };
        let report = EvalReport {
            experiment: Experiment::Classification,
            seed: 42,
            folds: 0,
            config: serde_json::Value::Null,
            systems: vec![sys("Lemma", 0.25, 0.5), sys("CRF, no seq.", 1.0, 1.0)],
            warnings: vec![],
        };
        assert_eq!(
            report.to_table(),
            "System             P       R      F1\n\
             Lemma          0.250   0.500   0.333\n\
             CRF, no seq.   1.000   1.000   1.000\n"
        );
        let back: EvalReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }
}
