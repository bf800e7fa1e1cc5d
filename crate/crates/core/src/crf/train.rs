//! L2-regularized conditional log-likelihood and its maximization.

use serde::{Deserialize, Serialize};

use super::lbfgs::{self, Settings};
use super::{index_features, CrfError, CrfModel, FeatureIndex, LabelSet, Sequence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// λ in `loglik − λ‖w‖²/2`.
    pub l2: f64,
    pub max_iterations: usize,
    /// Stop when the relative objective change falls below this.
    pub tolerance: f64,
    /// Number of correction pairs kept by L-BFGS.
    pub memory: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            l2: 1.0,
            max_iterations: 200,
            tolerance: 1e-6,
            memory: 7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), CrfError> {
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(CrfError::BadConfig(format!("l2 must be ≥ 0, got {}", self.l2)));
        }
        if self.max_iterations == 0 {
            return Err(CrfError::BadConfig("max_iterations must be ≥ 1".into()));
        }
        if self.memory == 0 {
            return Err(CrfError::BadConfig("memory must be ≥ 1".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(CrfError::BadConfig(format!("bad tolerance {}", self.tolerance)));
        }
        Ok(())
    }
}

/// Objective value (regularized log-likelihood) after each accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTrace {
    pub objective: Vec<f64>,
    pub converged: bool,
}

struct Encoded {
    attrs: Vec<Vec<usize>>,
    labels: Vec<usize>,
}

struct Objective<'a> {
    index: &'a FeatureIndex,
    data: Vec<Encoded>,
    empirical: Vec<f64>,
    l2: f64,
}

impl<'a> Objective<'a> {
    fn new(index: &'a FeatureIndex, labels: &LabelSet, train: &[Sequence], l2: f64) -> Result<Self, CrfError> {
        let mut data = Vec::with_capacity(train.len());
        let mut empirical = vec![0.0; index.len()];
        let l = index.n_labels();
        for seq in train {
            if seq.items.len() != seq.labels.len() {
                return Err(CrfError::LengthMismatch {
                    items: seq.items.len(),
                    labels: seq.labels.len(),
                });
            }
            if seq.items.is_empty() {
                continue;
            }
            let ys = seq
                .labels
                .iter()
                .map(|name| labels.get(name).ok_or_else(|| CrfError::UnknownLabel(name.clone())))
                .collect::<Result<Vec<_>, _>>()?;
            let attrs = index.encode(&seq.items);
            let mut prev = None;
            for (item, &y) in attrs.iter().zip(&ys) {
                for &a in item {
                    empirical[a * l + y] += 1.0;
                }
                if let Some(f) = index.transition_feature(prev, y) {
                    empirical[f] += 1.0;
                }
                prev = Some(y);
            }
            data.push(Encoded { attrs, labels: ys });
        }
        Ok(Self {
            index,
            data,
            empirical,
            l2,
        })
    }

    /// Sequences are visited in input order so the sum is reproducible.
    fn evaluate(&self, w: &[f64], iteration: usize) -> Result<(f64, Vec<f64>), CrfError> {
        let l = self.index.n_labels();
        let mut loglik = 0.0;
        let mut grad = self.empirical.clone();
        for seq in &self.data {
            let lattice = CrfModel::lattice_for(self.index, w, &seq.attrs);
            let m = lattice.marginals();
            loglik += lattice.score(&seq.labels) - lattice.log_partition();
            for (t, item) in seq.attrs.iter().enumerate() {
                for &a in item {
                    for y in 0..l {
                        grad[a * l + y] -= m.node(t, y);
                    }
                }
            }
            if self.index.use_transitions() {
                for y in 0..l {
                    let f = self.index.transition_feature(None, y).expect("transitions enabled");
                    grad[f] -= m.node(0, y);
                }
                for t in 1..seq.attrs.len() {
                    for p in 0..l {
                        for y in 0..l {
                            let f = self.index.transition_feature(Some(p), y).expect("transitions enabled");
                            grad[f] -= m.edge(t, p, y);
                        }
                    }
                }
            }
        }
        let norm2: f64 = w.iter().map(|v| v * v).sum();
        let objective = loglik - 0.5 * self.l2 * norm2;
        grad.iter_mut().zip(w).for_each(|(g, wi)| *g -= self.l2 * wi);
        if !objective.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(CrfError::NonFinite { iteration });
        }
        Ok((objective, grad))
    }
}

/// Regularized log-likelihood of `train` under the model's weights, and its
/// gradient with respect to them.
pub fn objective_and_gradient(
    model: &CrfModel,
    train: &[Sequence],
    l2: f64,
) -> Result<(f64, Vec<f64>), CrfError> {
    Objective::new(model.index(), model.labels(), train, l2)?.evaluate(model.weights(), 0)
}

pub fn train(
    train: &[Sequence],
    labels: &LabelSet,
    cfg: &TrainConfig,
    use_transitions: bool,
) -> Result<CrfModel, CrfError> {
    train_with_trace(train, labels, cfg, use_transitions).map(|(m, _)| m)
}

/// Trains from zero weights with L-BFGS. Deterministic for fixed inputs.
pub fn train_with_trace(
    train: &[Sequence],
    labels: &LabelSet,
    cfg: &TrainConfig,
    use_transitions: bool,
) -> Result<(CrfModel, TrainTrace), CrfError> {
    cfg.validate()?;
    let index = index_features(train, labels, use_transitions)?;
    let objective = Objective::new(&index, labels, train, cfg.l2)?;
    let settings = Settings {
        memory: cfg.memory,
        max_iterations: cfg.max_iterations,
        tolerance: cfg.tolerance,
    };
    let result = lbfgs::minimize(vec![0.0; index.len()], &settings, |w, it| {
        let (f, g) = objective.evaluate(w, it)?;
        Ok((-f, g.into_iter().map(|v| -v).collect()))
    })
    .map_err(|e| match e {
        CrfError::Diverged { iteration, trace } => CrfError::Diverged {
            iteration,
            trace: trace.into_iter().map(|v| -v).collect(),
        },
        other => other,
    })?;
    let trace = TrainTrace {
        objective: result.trace.iter().map(|v| -v).collect(),
        converged: result.converged,
    };
    log::debug!(
        "crf trained: {} features, {} steps, objective {:.6}",
        index.len(),
        trace.objective.len() - 1,
        trace.objective.last().copied().unwrap_or_default()
    );
    let model = CrfModel::new(labels.clone(), index, result.x)?;
    Ok((model, trace))
}
