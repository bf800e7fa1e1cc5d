//! Train/test partitions for the three experiment protocols.

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FoldError {
    #[error("need at least 2 folds, got {0}")]
    TooFewFolds(usize),
    #[error("cannot split {docs} documents into {k} folds")]
    TooFewDocuments { docs: usize, k: usize },
    #[error("leave-one-scenario-out needs at least 2 non-empty scenarios, got {0}")]
    TooFewScenarios(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[serde(rename = "within_scenario_10fold")]
    WithinScenario10Fold,
    LeaveOneScenarioOut,
    DescriptToInscript,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    /// Every document that appears in some test fold.
    pub fn test_documents(&self) -> impl Iterator<Item = &String> {
        self.folds.iter().flat_map(|f| f.test.iter())
    }
}

/// Seeded k-fold split. Documents are shuffled and dealt round-robin, so fold
/// sizes differ by at most one; within each fold the input order is kept.
pub fn split_folds(docs: &[String], k: usize, seed: u64) -> Result<FoldPlan, FoldError> {
    if k < 2 {
        return Err(FoldError::TooFewFolds(k));
    }
    if docs.len() < k {
        return Err(FoldError::TooFewDocuments { docs: docs.len(), k });
    }
    let mut order: Vec<usize> = (0..docs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0; docs.len()];
    for (rank, &doc) in order.iter().enumerate() {
        assignment[doc] = rank % k;
    }
    let folds = (0..k)
        .map(|f| {
            let (test, train): (Vec<_>, Vec<_>) = docs
                .iter()
                .zip(&assignment)
                .partition(|(_, &a)| a == f);
            Fold {
                train: train.into_iter().map(|(d, _)| d.clone()).collect(),
                test: test.into_iter().map(|(d, _)| d.clone()).collect(),
            }
        })
        .collect();
    Ok(FoldPlan {
        kind: ExperimentKind::WithinScenario10Fold,
        seed,
        folds,
    })
}

/// One fold per scenario: test on all of its documents, train on the rest.
/// Scenarios without documents are dropped with a warning.
pub fn leave_one_scenario_out(groups: &[(String, Vec<String>)]) -> Result<FoldPlan, FoldError> {
    let groups: Vec<&(String, Vec<String>)> = groups
        .iter()
        .filter(|(scenario, docs)| {
            if docs.is_empty() {
                warn!("scenario `{scenario}` has no documents; excluded from leave-one-scenario-out");
            }
            !docs.is_empty()
        })
        .collect();
    if groups.len() < 2 {
        return Err(FoldError::TooFewScenarios(groups.len()));
    }
    let folds = (0..groups.len())
        .map(|held_out| Fold {
            train: groups
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != held_out)
                .flat_map(|(_, (_, docs))| docs.iter().cloned())
                .collect(),
            test: groups[held_out].1.clone(),
        })
        .collect();
    Ok(FoldPlan {
        kind: ExperimentKind::LeaveOneScenarioOut,
        seed: 0,
        folds,
    })
}

/// Single fold: train on ESDs, test on stories.
pub fn descript_to_inscript(esds: &[String], stories: &[String]) -> FoldPlan {
    FoldPlan {
        kind: ExperimentKind::DescriptToInscript,
        seed: 0,
        folds: vec![Fold {
            train: esds.to_vec(),
            test: stories.to_vec(),
        }],
    }
}
