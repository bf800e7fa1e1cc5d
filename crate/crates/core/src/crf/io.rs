//! Versioned JSON model files. Weights (and ε) are written as shortest
//! round-trip decimal strings so that a reload is bit-identical.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{CrfError, CrfModel, FeatureIndex, LabelSet, ModelMeta};

pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dimension: Option<usize>,
    labels: Vec<String>,
    columns: usize,
    use_transitions: bool,
    /// Emission attributes as `[column, value]`, in index order.
    attributes: Vec<(usize, String)>,
    weights: Vec<String>,
}

fn parse_f64(s: &str) -> Result<f64, CrfError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CrfError::Corrupt(format!("bad number `{s}`")))
}

impl CrfModel {
    pub fn save<W: Write>(&self, mut writer: W) -> Result<(), CrfError> {
        let file = ModelFile {
            version: MODEL_VERSION,
            scenario: self.meta.scenario.clone(),
            epsilon: self.meta.epsilon.map(|e| e.to_string()),
            dimension: self.meta.dimension,
            labels: self.labels.labels().to_vec(),
            columns: self.index.n_columns(),
            use_transitions: self.index.use_transitions(),
            attributes: self.index.attribute_list().to_vec(),
            weights: self.weights.iter().map(|w| w.to_string()).collect(),
        };
        serde_json::to_writer_pretty(&mut writer, &file)
            .map_err(|e| CrfError::Corrupt(e.to_string()))?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        self.save(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn load<R: Read>(reader: R) -> Result<CrfModel, CrfError> {
        let value: serde_json::Value =
            serde_json::from_reader(reader).map_err(|e| CrfError::Corrupt(e.to_string()))?;
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| CrfError::Corrupt("missing version".into()))?;
        if version != u64::from(MODEL_VERSION) {
            return Err(CrfError::VersionMismatch {
                found: version as u32,
                expected: MODEL_VERSION,
            });
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| CrfError::Corrupt(e.to_string()))?;
        let labels = LabelSet::new(file.labels)?;
        let mut index = FeatureIndex::empty(labels.len(), file.columns, file.use_transitions);
        let mut seen = HashSet::new();
        for (column, value) in &file.attributes {
            if *column >= file.columns {
                return Err(CrfError::Corrupt(format!("attribute column {column} out of range")));
            }
            if !seen.insert((*column, value.clone())) {
                return Err(CrfError::Corrupt(format!("duplicate attribute ({column}, {value})")));
            }
            index.add_attribute(*column, value);
        }
        let weights = file
            .weights
            .iter()
            .map(|w| parse_f64(w))
            .collect::<Result<Vec<_>, _>>()?;
        let mut model = CrfModel::new(labels, index, weights)?;
        model.meta = ModelMeta {
            scenario: file.scenario,
            epsilon: file.epsilon.as_deref().map(parse_f64).transpose()?,
            dimension: file.dimension,
        };
        Ok(model)
    }
}
