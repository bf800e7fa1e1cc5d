//! Word vectors: loading, mention averaging, cosine similarity and
//! ε-discretization into three nominal bins.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crf::{self, LabelSet, Sequence, TrainConfig};
use crate::features::{observe, RawItem};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: expected {expected} values, found {found}")]
    Dimension {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("epsilon must be finite and non-negative, got {0}")]
    BadEpsilon(f64),
    #[error("no epsilon candidates given")]
    NoCandidates,
    #[error("development set is empty")]
    EmptyDev,
    #[error(transparent)]
    Crf(#[from] crf::CrfError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Word-to-vector store with a fixed dimension.
///
/// Vectors are kept in single precision; arithmetic on them is done in `f64`.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    entries: HashMap<String, Box<[f32]>>,
    lowercase: bool,
    duplicates: Vec<String>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            entries: HashMap::new(),
            lowercase: true,
            duplicates: Vec::new(),
        }
    }

    /// Reads the text format: a `<count> <dimension>` header followed by one
    /// `<word> <v1> ... <vd>` line per entry.
    pub fn load<R: BufRead>(reader: R) -> Result<Self, EmbedError> {
        Self::load_filtered(reader, None)
    }

    /// Like [`load`](Self::load), but only keeps words in `keep` (compared
    /// after lowercasing as well as verbatim). Large pretrained tables are
    /// mostly irrelevant to a given corpus.
    pub fn load_filtered<R: BufRead>(
        reader: R,
        keep: Option<&HashSet<String>>,
    ) -> Result<Self, EmbedError> {
        let mut lines = reader.lines();
        let header = lines.next().transpose()?.ok_or_else(|| EmbedError::Format {
            line: 1,
            message: "missing `<count> <dimension>` header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            [c, d] => c.parse::<usize>().ok().zip(d.parse::<usize>().ok()),
            _ => None,
        };
        let Some((count, dim)) = parsed.filter(|&(_, d)| d > 0) else {
            return Err(EmbedError::Format {
                line: 1,
                message: format!("bad header `{header}`"),
            });
        };
        let mut table = EmbeddingTable::new(dim);
        let mut seen = 0usize;
        let mut words = HashSet::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let no = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            seen += 1;
            let mut parts = line.split_whitespace();
            let word = parts.next().unwrap_or_default();
            let values: Vec<&str> = parts.collect();
            if values.len() != dim {
                return Err(EmbedError::Dimension {
                    line: no,
                    expected: dim,
                    found: values.len(),
                });
            }
            if !words.insert(word.to_string()) {
                warn!("line {no}: duplicate word `{word}`; keeping the first vector");
                table.duplicates.push(word.to_string());
                continue;
            }
            if let Some(keep) = keep {
                if !keep.contains(word) && !keep.contains(&word.to_lowercase()) {
                    continue;
                }
            }
            let vector = values
                .iter()
                .map(|v| v.parse::<f32>())
                .collect::<Result<Box<[f32]>, _>>()
                .map_err(|e| EmbedError::Format {
                    line: no,
                    message: format!("bad value: {e}"),
                })?;
            table.entries.insert(word.to_string(), vector);
        }
        if seen != count {
            warn!("embedding header declares {count} entries, file has {seen}");
        }
        Ok(table)
    }

    /// Adds a vector; returns `false` (and keeps the old one) if the word exists.
    pub fn insert(&mut self, word: &str, vector: &[f32]) -> Result<bool, EmbedError> {
        if vector.len() != self.dim {
            return Err(EmbedError::LengthMismatch(vector.len(), self.dim));
        }
        if self.entries.contains_key(word) {
            self.duplicates.push(word.to_string());
            return Ok(false);
        }
        self.entries.insert(word.to_string(), vector.into());
        Ok(true)
    }

    pub fn set_lowercase(&mut self, lowercase: bool) {
        self.lowercase = lowercase;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Words rejected as duplicates while loading or inserting.
    pub fn duplicates(&self) -> &[String] {
        &self.duplicates
    }

    /// Lowercased lookup first (when enabled), then the word as given.
    pub fn get(&self, word: &str) -> Option<&[f32]> {
        if self.lowercase {
            let lower = word.to_lowercase();
            if let Some(v) = self.entries.get(&lower) {
                return Some(v);
            }
        }
        self.entries.get(word).map(|v| &**v)
    }
}

/// Average of the verb vector (counted twice) and one vector per other word.
/// Words missing from the table are skipped; `None` if nothing was found.
///
/// The other words are summed in sorted order, so the result does not depend
/// on the order they are given in.
pub fn mention_vector<'a>(
    verb: &str,
    others: impl IntoIterator<Item = &'a str>,
    table: &EmbeddingTable,
) -> Option<Vec<f64>> {
    let mut others: Vec<&str> = others.into_iter().collect();
    others.sort_unstable();
    let mut sum = vec![0.0f64; table.dim()];
    let mut n = 0usize;
    let verb_vec = table.get(verb);
    let words = verb_vec
        .into_iter()
        .chain(verb_vec)
        .chain(others.iter().filter_map(|w| table.get(w)));
    for v in words {
        for (s, x) in sum.iter_mut().zip(v.iter()) {
            *s += f64::from(*x);
        }
        n += 1;
    }
    if n == 0 {
        return None;
    }
    let n = n as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Some(sum)
}

/// Cosine similarity; 0 when either vector is all zeros.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbedError> {
    if u.len() != v.len() {
        return Err(EmbedError::LengthMismatch(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bin {
    Low,
    Mid,
    High,
}

impl Bin {
    pub fn as_str(self) -> &'static str {
        match self {
            Bin::Low => "low",
            Bin::Mid => "mid",
            Bin::High => "high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationConfig {
    epsilon: f64,
}

impl DiscretizationConfig {
    pub fn new(epsilon: f64) -> Result<Self, EmbedError> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(EmbedError::BadEpsilon(epsilon));
        }
        Ok(Self { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// Below −ε is low, above ε is high, and the closed interval [−ε, ε] is mid.
pub fn discretize(v: &[f64], cfg: &DiscretizationConfig) -> Vec<Bin> {
    let eps = cfg.epsilon;
    v.iter()
        .map(|&x| {
            if x < -eps {
                Bin::Low
            } else if x > eps {
                Bin::High
            } else {
                Bin::Mid
            }
        })
        .collect()
}

pub const DEFAULT_EPSILON_GRID: [f64; 5] = [0.01, 0.02, 0.05, 0.1, 0.2];

/// A labeled sequence of undiscretized items.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSequence {
    pub items: Vec<RawItem>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonChoice {
    pub epsilon: f64,
    /// Dev accuracy for every candidate, in the order given.
    pub scores: Vec<(f64, f64)>,
}

/// Picks the ε whose CRF, trained on `train`, decodes `dev` with the highest
/// micro accuracy. Ties go to the smallest ε.
pub fn tune_epsilon(
    train: &[RawSequence],
    dev: &[RawSequence],
    candidates: &[f64],
    dim: usize,
    crf_config: &TrainConfig,
    use_transitions: bool,
) -> Result<EpsilonChoice, EmbedError> {
    if candidates.is_empty() {
        return Err(EmbedError::NoCandidates);
    }
    let dev_items: usize = dev.iter().map(|s| s.items.len()).sum();
    if dev_items == 0 {
        return Err(EmbedError::EmptyDev);
    }
    let labels = LabelSet::from_sequences(train.iter().map(|s| s.labels.as_slice()));
    let mut scores = Vec::with_capacity(candidates.len());
    for &eps in candidates {
        let cfg = DiscretizationConfig::new(eps)?;
        let discretized = |seqs: &[RawSequence]| -> Vec<Sequence> {
            seqs.iter()
                .map(|s| Sequence {
                    items: s.items.iter().map(|r| observe(r, dim, &cfg)).collect(),
                    labels: s.labels.clone(),
                })
                .collect()
        };
        let model = crf::train(&discretized(train), &labels, crf_config, use_transitions)?;
        let mut correct = 0usize;
        for seq in discretized(dev) {
            if seq.items.is_empty() {
                continue;
            }
            let predicted = model.decode(&seq.items);
            correct += predicted
                .iter()
                .zip(&seq.labels)
                .filter(|(p, g)| p.as_str() == g.as_str())
                .count();
        }
        scores.push((eps, correct as f64 / dev_items as f64));
    }
    let best = scores
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.total_cmp(&a.0)))
        .expect("candidates are non-empty");
    Ok(EpsilonChoice {
        epsilon: best.0,
        scores,
    })
}
