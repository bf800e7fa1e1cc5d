//! Run configuration: defaults, then a config file, then command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::baselines::BaselineConfig;
use crate::crf::TrainConfig;
use crate::embed::DEFAULT_EPSILON_GRID;
use crate::eval::EvalConfig;
use crate::identify::TreeConfig;
use crate::mapping::{EpsilonSetting, MapConfig};

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub descript: Option<PathBuf>,
    pub inscript: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    /// Non-action verb list; the built-in list when absent.
    pub nonaction: Option<PathBuf>,
    /// Trained identifier (input of `identify`, optional filter for `map`).
    pub tree_model: Option<PathBuf>,
    /// Directory of `<scenario>.crf.json` files.
    pub crf_models: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Text table of an evaluation; standard output when absent.
    pub table: Option<PathBuf>,
    /// Directory receiving per-scenario confusion matrices.
    pub confusion_dir: Option<PathBuf>,
    /// Only these scenarios; all when empty.
    pub scenarios: Vec<String>,
    pub seed: u64,
    /// Fixed ε; tuned over `tune_grid` when absent.
    pub epsilon: Option<f64>,
    pub tune_grid: Vec<f64>,
    pub dev_fraction: f64,
    pub folds: usize,
    pub crf: TrainConfig,
    pub tree: TreeConfig,
    pub no_seq: bool,
    pub scenario_independent: bool,
    /// Systems to evaluate; a per-experiment default when empty.
    pub systems: Vec<String>,
    /// Identifier of the pipeline experiment.
    pub identifier: Option<String>,
    pub remove_stopwords: bool,
    pub resolve_pronouns: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            descript: None,
            inscript: None,
            embeddings: None,
            nonaction: None,
            tree_model: None,
            crf_models: None,
            out: None,
            table: None,
            confusion_dir: None,
            scenarios: Vec::new(),
            seed: 42,
            epsilon: None,
            tune_grid: DEFAULT_EPSILON_GRID.to_vec(),
            dev_fraction: 0.1,
            folds: 10,
            crf: TrainConfig::default(),
            tree: TreeConfig::default(),
            no_seq: false,
            scenario_independent: false,
            systems: Vec::new(),
            identifier: None,
            remove_stopwords: false,
            resolve_pronouns: true,
        }
    }
}

const LIST_KEYS: [&str; 3] = ["scenarios", "tune_grid", "systems"];

fn scalar(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn insert_dotted(root: &mut Map<String, Value>, key: &str, value: Value) -> Result<(), CliError> {
    let mut parts = key.split('.').peekable();
    let mut node = root;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            node.insert(part.to_string(), value);
            return Ok(());
        }
        node = node
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Map::new()))
            .as_object_mut()
            .ok_or_else(|| CliError::Usage(format!("config key `{key}` conflicts with `{part}`")))?;
    }
    Ok(())
}

/// Parses `key = value` lines into a JSON object. Dotted keys address nested
/// sections (`crf.l2 = 0.5`); list keys take comma-separated values.
pub fn parse_key_values(text: &str) -> Result<Value, CliError> {
    let mut root = Map::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, raw) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", no + 1)))?;
        let (key, raw) = (key.trim(), raw.trim());
        let value = if LIST_KEYS.contains(&key) && !raw.starts_with('[') {
            Value::Array(
                raw.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(scalar)
                    .collect(),
            )
        } else {
            scalar(raw)
        };
        insert_dotted(&mut root, key, value)?;
    }
    Ok(Value::Object(root))
}

impl RunConfig {
    /// Reads a JSON document or key=value file.
    pub fn from_file(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_text(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn from_text(text: &str) -> Result<RunConfig, CliError> {
        let value = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| CliError::Usage(e.to_string()))?
        } else {
            parse_key_values(text)?
        };
        serde_json::from_value(value).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.crf.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        self.tree.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(e) = self.epsilon {
            if !(e.is_finite() && e >= 0.0) {
                return Err(CliError::Usage(format!("epsilon must be ≥ 0, got {e}")));
            }
        } else if self.tune_grid.is_empty() {
            return Err(CliError::Usage("tune_grid is empty and no epsilon is set".into()));
        }
        if !(self.dev_fraction > 0.0 && self.dev_fraction < 1.0) {
            return Err(CliError::Usage(format!("dev_fraction must lie in (0, 1), got {}", self.dev_fraction)));
        }
        if self.folds < 2 {
            return Err(CliError::Usage(format!("folds must be ≥ 2, got {}", self.folds)));
        }
        Ok(())
    }

    pub fn map_config(&self) -> MapConfig {
        MapConfig {
            epsilon: match self.epsilon {
                Some(e) => EpsilonSetting::Fixed(e),
                None => EpsilonSetting::Tune(self.tune_grid.clone()),
            },
            crf: self.crf.clone(),
            use_transitions: !self.no_seq,
            dev_fraction: self.dev_fraction,
            seed: self.seed,
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            seed: self.seed,
            folds: self.folds,
            tree: self.tree.clone(),
            map: self.map_config(),
            baseline: BaselineConfig {
                remove_stopwords: self.remove_stopwords,
            },
        }
    }
}
