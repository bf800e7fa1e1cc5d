//! Linear-chain conditional random field over nominal observation columns.
//!
//! Two feature families are used:
//!
//! * emission indicators, one per (column, observed value, label), and
//! * transition indicators, one per ordered label pair plus one per label
//!   following a virtual start state.
//!
//! Transitions can be switched off as a whole, which turns the model into
//! independent per-item classifiers sharing one weight vector.

mod inference;
mod io;
mod lbfgs;
mod train;

use std::collections::HashMap;

use thiserror::Error;

use crate::features::ObservationItem;

pub use inference::{Lattice, Marginals};
pub use io::MODEL_VERSION;
pub use train::{objective_and_gradient, train, train_with_trace, TrainConfig, TrainTrace};

#[derive(Debug, Error)]
pub enum CrfError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("label `{0}` is not in the label set")]
    UnknownLabel(String),
    #[error("item has {found} columns, expected {expected}")]
    ColumnMismatch { expected: usize, found: usize },
    #[error("sequence has {items} items but {labels} labels")]
    LengthMismatch { items: usize, labels: usize },
    #[error("invalid training configuration: {0}")]
    BadConfig(String),
    #[error("non-finite objective or gradient at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("objective decreased at iteration {iteration}; trace: {trace:?}")]
    Diverged { iteration: usize, trace: Vec<f64> },
    #[error("model version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupted model: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CrfError {
    /// Errors that come from numerical trouble rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, CrfError::NonFinite { .. } | CrfError::Diverged { .. })
    }
}

/// A labeled training sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub items: Vec<ObservationItem>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelSet {
    pub fn new(labels: Vec<String>) -> Result<Self, CrfError> {
        if labels.is_empty() {
            return Err(CrfError::EmptyLabelSet);
        }
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(CrfError::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self { labels, index })
    }

    /// Labels in order of first appearance.
    pub fn from_sequences<'a>(seqs: impl IntoIterator<Item = &'a [String]>) -> Self {
        let mut labels = Vec::new();
        let mut index = HashMap::new();
        for l in seqs.into_iter().flatten() {
            if !index.contains_key(l) {
                index.insert(l.clone(), labels.len());
                labels.push(l.clone());
            }
        }
        Self { labels, index }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }
}

/// Maps feature keys to weight positions.
///
/// Emission features for attribute `a` (a column/value pair) occupy
/// `a·L .. a·L + L`; transition features follow, `(L + 1)·L` of them, with
/// the start state as the last source row.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureIndex {
    n_labels: usize,
    n_columns: usize,
    attributes: Vec<HashMap<String, usize>>,
    attribute_list: Vec<(usize, String)>,
    use_transitions: bool,
}

impl FeatureIndex {
    fn empty(n_labels: usize, n_columns: usize, use_transitions: bool) -> Self {
        Self {
            n_labels,
            n_columns,
            attributes: vec![HashMap::new(); n_columns],
            attribute_list: Vec::new(),
            use_transitions,
        }
    }

    fn add_attribute(&mut self, column: usize, value: &str) -> usize {
        if let Some(&a) = self.attributes[column].get(value) {
            return a;
        }
        let a = self.attribute_list.len();
        self.attributes[column].insert(value.to_string(), a);
        self.attribute_list.push((column, value.to_string()));
        a
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn n_columns(&self) -> usize {
        self.n_columns
    }

    pub fn n_attributes(&self) -> usize {
        self.attribute_list.len()
    }

    pub fn use_transitions(&self) -> bool {
        self.use_transitions
    }

    /// Total number of features F.
    pub fn len(&self) -> usize {
        let l = self.n_labels;
        let transitions = if self.use_transitions { (l + 1) * l } else { 0 };
        self.attribute_list.len() * l + transitions
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Registered (column, value) pairs in index order.
    pub fn attribute_list(&self) -> &[(usize, String)] {
        &self.attribute_list
    }

    pub fn attribute(&self, column: usize, value: &str) -> Option<usize> {
        self.attributes.get(column)?.get(value).copied()
    }

    pub fn emission_feature(&self, column: usize, value: &str, label: usize) -> Option<usize> {
        (label < self.n_labels)
            .then(|| self.attribute(column, value))
            .flatten()
            .map(|a| a * self.n_labels + label)
    }

    /// `prev = None` is the start state.
    pub fn transition_feature(&self, prev: Option<usize>, label: usize) -> Option<usize> {
        let l = self.n_labels;
        if !self.use_transitions || label >= l || prev.is_some_and(|p| p >= l) {
            return None;
        }
        let row = prev.unwrap_or(l);
        Some(self.attribute_list.len() * l + row * l + label)
    }

    /// Attribute ids of every item; values never seen in training are dropped.
    pub fn encode(&self, items: &[ObservationItem]) -> Vec<Vec<usize>> {
        items
            .iter()
            .map(|item| {
                item.columns
                    .iter()
                    .enumerate()
                    .filter_map(|(c, v)| self.attribute(c, v))
                    .collect()
            })
            .collect()
    }
}

/// Registers one emission attribute per (column, value) seen in `train`, in
/// order of first appearance, plus the transition block when enabled.
pub fn index_features(
    train: &[Sequence],
    labels: &LabelSet,
    use_transitions: bool,
) -> Result<FeatureIndex, CrfError> {
    let first = train
        .iter()
        .flat_map(|s| s.items.first())
        .next()
        .ok_or(CrfError::EmptyTrainingSet)?;
    if labels.is_empty() {
        return Err(CrfError::EmptyLabelSet);
    }
    let n_columns = first.columns.len();
    let mut index = FeatureIndex::empty(labels.len(), n_columns, use_transitions);
    for seq in train {
        if seq.items.len() != seq.labels.len() {
            return Err(CrfError::LengthMismatch {
                items: seq.items.len(),
                labels: seq.labels.len(),
            });
        }
        if let Some(bad) = seq.labels.iter().find(|l| !labels.contains(l)) {
            return Err(CrfError::UnknownLabel(bad.clone()));
        }
        for item in &seq.items {
            if item.columns.len() != n_columns {
                return Err(CrfError::ColumnMismatch {
                    expected: n_columns,
                    found: item.columns.len(),
                });
            }
            for (c, v) in item.columns.iter().enumerate() {
                index.add_attribute(c, v);
            }
        }
    }
    Ok(index)
}

/// Settings recorded alongside a model so that decoding can rebuild the
/// observations it was trained on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelMeta {
    pub scenario: Option<String>,
    pub epsilon: Option<f64>,
    pub dimension: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    labels: LabelSet,
    index: FeatureIndex,
    weights: Vec<f64>,
    pub meta: ModelMeta,
}

impl CrfModel {
    pub fn new(labels: LabelSet, index: FeatureIndex, weights: Vec<f64>) -> Result<Self, CrfError> {
        if index.n_labels() != labels.len() {
            return Err(CrfError::Corrupt(format!(
                "feature index built for {} labels, label set has {}",
                index.n_labels(),
                labels.len()
            )));
        }
        if weights.len() != index.len() {
            return Err(CrfError::Corrupt(format!(
                "expected {} weights, got {}",
                index.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(CrfError::Corrupt("non-finite weight".into()));
        }
        Ok(Self {
            labels,
            index,
            weights,
            meta: ModelMeta::default(),
        })
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn index(&self) -> &FeatureIndex {
        &self.index
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn use_transitions(&self) -> bool {
        self.index.use_transitions()
    }

    pub(crate) fn lattice_for(index: &FeatureIndex, weights: &[f64], attrs: &[Vec<usize>]) -> Lattice {
        let l = index.n_labels();
        let mut emission = vec![0.0; attrs.len() * l];
        for (t, item) in attrs.iter().enumerate() {
            let row = &mut emission[t * l..(t + 1) * l];
            for &a in item {
                for (y, e) in row.iter_mut().enumerate() {
                    *e += weights[a * l + y];
                }
            }
        }
        let transition = if index.use_transitions() {
            let base = index.n_attributes() * l;
            weights[base..base + (l + 1) * l].to_vec()
        } else {
            vec![0.0; (l + 1) * l]
        };
        Lattice::new(attrs.len(), l, emission, transition)
    }

    pub fn lattice(&self, items: &[ObservationItem]) -> Lattice {
        Self::lattice_for(&self.index, &self.weights, &self.index.encode(items))
    }

    pub fn log_partition(&self, items: &[ObservationItem]) -> f64 {
        self.lattice(items).log_partition()
    }

    pub fn marginals(&self, items: &[ObservationItem]) -> Marginals {
        self.lattice(items).marginals()
    }

    /// Best label indices and their score.
    pub fn viterbi(&self, items: &[ObservationItem]) -> (Vec<usize>, f64) {
        self.lattice(items).viterbi()
    }

    /// Best label sequence, as label names.
    pub fn decode(&self, items: &[ObservationItem]) -> Vec<String> {
        self.viterbi(items)
            .0
            .into_iter()
            .map(|y| self.labels.name(y).to_string())
            .collect()
    }
}
