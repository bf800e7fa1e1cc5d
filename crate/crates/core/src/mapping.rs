//! Per-scenario event-type labeling: a CRF trained on the scenario's ESDs,
//! applied to the verb mentions of a story in text order.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{EsdDocument, VerbMention};
use crate::crf::{self, CrfError, CrfModel, LabelSet, Sequence, TrainConfig};
use crate::embed::{
    tune_epsilon, DiscretizationConfig, EmbedError, EmbeddingTable, EpsilonChoice, RawSequence,
    DEFAULT_EPSILON_GRID,
};
use crate::features::{observe, raw_from_ed, raw_from_mention, RawItem};

#[derive(Debug, Error)]
pub enum MapError {
    #[error("scenario `{0}` has no usable event descriptions")]
    NoTrainingData(String),
    #[error("tuning ε for `{0}` needs at least 2 ESDs")]
    TooFewForDev(String),
    #[error("model has no ε; it was not trained by this tool")]
    MissingEpsilon,
    #[error("model expects {model}-dimensional embeddings, table has {table}")]
    DimensionMismatch { model: usize, table: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Crf(#[from] CrfError),
}

impl MapError {
    pub fn is_numeric(&self) -> bool {
        match self {
            MapError::Crf(e) => e.is_numeric(),
            MapError::Embed(EmbedError::Crf(e)) => e.is_numeric(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonSetting {
    Fixed(f64),
    /// Chosen per scenario on a held-out slice of the ESDs.
    Tune(Vec<f64>),
}

impl Default for EpsilonSetting {
    fn default() -> Self {
        EpsilonSetting::Tune(DEFAULT_EPSILON_GRID.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapConfig {
    pub epsilon: EpsilonSetting,
    pub crf: TrainConfig,
    pub use_transitions: bool,
    /// Share of a scenario's ESDs held out for ε tuning.
    pub dev_fraction: f64,
    pub seed: u64,
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            epsilon: EpsilonSetting::default(),
            crf: TrainConfig::default(),
            use_transitions: true,
            dev_fraction: 0.1,
            seed: 42,
        }
    }
}

/// One raw sequence per ESD, over its script-event EDs. EDs without a verb
/// are dropped with a warning.
pub fn esd_sequences<'a>(
    esds: impl IntoIterator<Item = &'a EsdDocument>,
    table: &EmbeddingTable,
) -> Vec<RawSequence> {
    let mut out = Vec::new();
    for doc in esds {
        let mut seq = RawSequence {
            items: Vec::new(),
            labels: Vec::new(),
        };
        for ed in doc.training_eds() {
            match raw_from_ed(ed, table) {
                Ok(item) => {
                    seq.items.push(item);
                    seq.labels.push(ed.event_type.as_str().to_string());
                }
                Err(e) => log::warn!("{}: skipping ED: {e}", doc.id),
            }
        }
        if !seq.items.is_empty() {
            out.push(seq);
        }
    }
    out
}

fn discretize_all(seqs: &[RawSequence], dim: usize, cfg: &DiscretizationConfig) -> Vec<Sequence> {
    seqs.iter()
        .map(|s| Sequence {
            items: s.items.iter().map(|r| observe(r, dim, cfg)).collect(),
            labels: s.labels.clone(),
        })
        .collect()
}

fn tune_on_split(
    scenario: &str,
    seqs: &[RawSequence],
    grid: &[f64],
    dim: usize,
    cfg: &MapConfig,
) -> Result<EpsilonChoice, MapError> {
    if seqs.len() < 2 {
        return Err(MapError::TooFewForDev(scenario.to_string()));
    }
    let mut order: Vec<usize> = (0..seqs.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let n_dev = ((seqs.len() as f64 * cfg.dev_fraction).ceil() as usize).clamp(1, seqs.len() - 1);
    let dev: Vec<RawSequence> = order[..n_dev].iter().map(|&i| seqs[i].clone()).collect();
    let train: Vec<RawSequence> = order[n_dev..].iter().map(|&i| seqs[i].clone()).collect();
    let choice = tune_epsilon(&train, &dev, grid, dim, &cfg.crf, cfg.use_transitions)?;
    log::info!("{scenario}: chose ε = {} from {:?}", choice.epsilon, choice.scores);
    Ok(choice)
}

/// Tunes ε for one scenario on a held-out slice of its ESDs.
pub fn tune_scenario_epsilon(
    scenario: &str,
    esds: &[&EsdDocument],
    table: &EmbeddingTable,
    grid: &[f64],
    cfg: &MapConfig,
) -> Result<EpsilonChoice, MapError> {
    let seqs = esd_sequences(esds.iter().copied(), table);
    if seqs.is_empty() {
        return Err(MapError::NoTrainingData(scenario.to_string()));
    }
    tune_on_split(scenario, &seqs, grid, table.dim(), cfg)
}

/// Trains the CRF of one scenario on all of its ESDs; also returns the
/// tuning outcome when ε was tuned.
pub fn train_scenario_model(
    scenario: &str,
    esds: &[&EsdDocument],
    table: &EmbeddingTable,
    cfg: &MapConfig,
) -> Result<(CrfModel, Option<EpsilonChoice>), MapError> {
    let seqs = esd_sequences(esds.iter().copied(), table);
    if seqs.is_empty() {
        return Err(MapError::NoTrainingData(scenario.to_string()));
    }
    let dim = table.dim();
    let (epsilon, choice) = match &cfg.epsilon {
        EpsilonSetting::Fixed(e) => (*e, None),
        EpsilonSetting::Tune(grid) => {
            let choice = tune_on_split(scenario, &seqs, grid, dim, cfg)?;
            (choice.epsilon, Some(choice))
        }
    };
    let disc = DiscretizationConfig::new(epsilon)?;
    let train = discretize_all(&seqs, dim, &disc);
    let labels = LabelSet::from_sequences(train.iter().map(|s| s.labels.as_slice()));
    let mut model = crf::train(&train, &labels, &cfg.crf, cfg.use_transitions)?;
    model.meta.scenario = Some(scenario.to_string());
    model.meta.epsilon = Some(epsilon);
    model.meta.dimension = Some(dim);
    Ok((model, choice))
}

/// Raw items of mentions, in the order given.
pub fn mention_items(mentions: &[&VerbMention], table: &EmbeddingTable) -> Vec<RawItem> {
    mentions.iter().map(|m| raw_from_mention(m, table)).collect()
}

/// Event type of each mention, decoded jointly as one sequence.
pub fn label_mentions(
    model: &CrfModel,
    mentions: &[&VerbMention],
    table: &EmbeddingTable,
) -> Result<Vec<String>, MapError> {
    let epsilon = model.meta.epsilon.ok_or(MapError::MissingEpsilon)?;
    let dim = model.meta.dimension.unwrap_or(table.dim());
    if dim != table.dim() {
        return Err(MapError::DimensionMismatch {
            model: dim,
            table: table.dim(),
        });
    }
    let disc = DiscretizationConfig::new(epsilon)?;
    let items: Vec<_> = mention_items(mentions, table)
        .iter()
        .map(|r| observe(r, dim, &disc))
        .collect();
    Ok(model.decode(&items))
}
