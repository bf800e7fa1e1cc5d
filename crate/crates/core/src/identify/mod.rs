//! Identification of script-relevant verbs.
//!
//! Each verb mention becomes an [`IdentifierRow`] of syntactic, script and
//! frame attributes. A decision tree is trained on four classes (script
//! event plus the three non-script kinds) and its output is collapsed to
//! event / non-script for evaluation.

pub mod tree;

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{pos, Binary, GoldLabel, NonScriptKind, Story, VerbMention, ABSENT};
use crate::features::ScenarioStats;

pub use tree::{
    added_errors, gain_ratio, AttrKind, Attribute, DecisionTree, Instance, Node, Schema, TreeConfig,
    UnknownValuePolicy, Value,
};

pub const TREE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IdentifyError {
    #[error("no training rows")]
    EmptyTrainingSet,
    #[error("training rows mix scenario-specific and scenario-independent features")]
    MixedModes,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid tree configuration: {0}")]
    BadConfig(String),
    #[error("tree file version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt tree file: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Training classes of the identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FourClass {
    Event,
    NonScriptEvent,
    ScriptRelated,
    ScriptEvoking,
}

impl FourClass {
    pub const ALL: [FourClass; 4] = [
        FourClass::Event,
        FourClass::NonScriptEvent,
        FourClass::ScriptRelated,
        FourClass::ScriptEvoking,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FourClass::Event => "event",
            FourClass::NonScriptEvent => NonScriptKind::NonScriptEvent.as_str(),
            FourClass::ScriptRelated => NonScriptKind::ScriptRelated.as_str(),
            FourClass::ScriptEvoking => NonScriptKind::ScriptEvoking.as_str(),
        }
    }

    pub fn from_gold(label: &GoldLabel) -> FourClass {
        match label {
            GoldLabel::Event(_) => FourClass::Event,
            GoldLabel::NonScript(NonScriptKind::NonScriptEvent) => FourClass::NonScriptEvent,
            GoldLabel::NonScript(NonScriptKind::ScriptRelated) => FourClass::ScriptRelated,
            GoldLabel::NonScript(NonScriptKind::ScriptEvoking) => FourClass::ScriptEvoking,
        }
    }

    pub fn to_binary(self) -> Binary {
        if self == FourClass::Event {
            Binary::Event
        } else {
            Binary::NonScript
        }
    }

    fn index(self) -> usize {
        FourClass::ALL.iter().position(|&c| c == self).expect("listed")
    }
}

/// Features only available when the scenario is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptFeatures {
    pub lemma_in_scenario_esds: bool,
    pub tfidf_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifierRow {
    pub is_auxiliary: bool,
    pub governs_adverbial_clause: bool,
    pub n_direct_objects: usize,
    pub n_indirect_objects: usize,
    pub in_nonaction_list: bool,
    /// Absent in scenario-independent mode.
    pub script: Option<ScriptFeatures>,
    /// Frame label, or `_`.
    pub frame: String,
    pub class: FourClass,
}

fn flag(b: bool) -> Value {
    Value::Nominal(if b { "true" } else { "false" }.into())
}

impl IdentifierRow {
    pub fn scenario_specific(&self) -> bool {
        self.script.is_some()
    }

    pub fn values(&self) -> Vec<Value> {
        let mut v = vec![
            flag(self.is_auxiliary),
            flag(self.governs_adverbial_clause),
            Value::Numeric(self.n_direct_objects as f64),
            Value::Numeric(self.n_indirect_objects as f64),
            flag(self.in_nonaction_list),
        ];
        if let Some(s) = &self.script {
            v.push(flag(s.lemma_in_scenario_esds));
            v.push(Value::Numeric(s.tfidf_score));
        }
        v.push(Value::Nominal(self.frame.clone()));
        v
    }

    pub fn instance(&self) -> Instance {
        Instance {
            values: self.values(),
            class: self.class.index(),
        }
    }
}

/// Attribute layout of identifier rows for the given mode.
pub fn identifier_schema(scenario_specific: bool) -> Schema {
    let attr = |name: &str, kind| Attribute {
        name: name.into(),
        kind,
    };
    let mut attributes = vec![
        attr("is_auxiliary", AttrKind::Nominal),
        attr("governs_adverbial_clause", AttrKind::Nominal),
        attr("n_direct_objects", AttrKind::Numeric),
        attr("n_indirect_objects", AttrKind::Numeric),
        attr("in_nonaction_list", AttrKind::Nominal),
    ];
    if scenario_specific {
        attributes.push(attr("lemma_in_scenario_esds", AttrKind::Nominal));
        attributes.push(attr("tfidf_score", AttrKind::Numeric));
    }
    attributes.push(attr("frame", AttrKind::Nominal));
    Schema {
        attributes,
        classes: FourClass::ALL.iter().map(|c| c.as_str().to_string()).collect(),
    }
}

/// Lemmas of verbs that rarely denote actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonActionList {
    lemmas: BTreeSet<String>,
}

pub const DEFAULT_NONACTION: [&str; 20] = [
    "be", "have", "do", "will", "would", "can", "could", "may", "might", "shall", "should", "must",
    "want", "know", "think", "like", "need", "say", "see", "feel",
];

impl Default for NonActionList {
    fn default() -> Self {
        Self::from_lemmas(DEFAULT_NONACTION)
    }
}

impl NonActionList {
    pub fn from_lemmas<S: AsRef<str>>(lemmas: impl IntoIterator<Item = S>) -> Self {
        Self {
            lemmas: lemmas.into_iter().map(|l| l.as_ref().to_lowercase()).collect(),
        }
    }

    /// One lemma per line; `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        Self::from_lemmas(
            text.lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty()),
        )
    }

    pub fn load(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.lemmas.contains(&lemma.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}

/// Attribute row of a mention. `stats` selects scenario-specific mode.
pub fn extract_row(
    m: &VerbMention,
    story: &Story,
    stats: Option<&ScenarioStats>,
    nonaction: &NonActionList,
) -> IdentifierRow {
    let verb = story.token(m.sentence, m.token);
    let is_auxiliary = verb.is_some_and(|t| {
        matches!(pos::base_relation(&t.deprel), "aux" | "auxpass" | "cop") || pos::is_modal(&t.pos)
    });
    let mut governs_adverbial_clause = false;
    let mut n_direct_objects = 0;
    let mut n_indirect_objects = 0;
    for child in story.children(m.sentence, m.token) {
        match pos::base_relation(&child.deprel) {
            "advcl" => governs_adverbial_clause = true,
            "dobj" | "obj" => n_direct_objects += 1,
            "iobj" => n_indirect_objects += 1,
            _ => {}
        }
    }
    let script = stats.map(|s| ScriptFeatures {
        lemma_in_scenario_esds: s.verb_lemmas.contains(&m.lemma),
        tfidf_score: s.tfidf(std::iter::once(m.lemma.as_str()).chain(m.dependent_lemmas())),
    });
    IdentifierRow {
        is_auxiliary,
        governs_adverbial_clause,
        n_direct_objects,
        n_indirect_objects,
        in_nonaction_list: nonaction.contains(&m.lemma),
        script,
        frame: m.frame.clone().unwrap_or_else(|| ABSENT.to_string()),
        class: FourClass::from_gold(&m.gold),
    }
}

/// Rows for every labeled verb of the given stories.
pub fn extract_rows<'a>(
    stories: impl IntoIterator<Item = &'a Story>,
    stats: impl Fn(&str) -> Option<&'a ScenarioStats>,
    nonaction: &NonActionList,
) -> Vec<IdentifierRow> {
    stories
        .into_iter()
        .flat_map(|s| {
            let st = stats(&s.scenario);
            s.mentions.iter().map(move |m| extract_row(m, s, st, nonaction))
        })
        .collect()
}

/// A trained four-class identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Identifier {
    tree: DecisionTree,
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    version: u32,
    schema: Schema,
    nodes: Vec<Node>,
}

impl Identifier {
    pub fn train(rows: &[IdentifierRow], cfg: &TreeConfig) -> Result<Self, IdentifyError> {
        let first = rows.first().ok_or(IdentifyError::EmptyTrainingSet)?;
        let specific = first.scenario_specific();
        if rows.iter().any(|r| r.scenario_specific() != specific) {
            return Err(IdentifyError::MixedModes);
        }
        let instances: Vec<Instance> = rows.iter().map(IdentifierRow::instance).collect();
        let tree = DecisionTree::train(&identifier_schema(specific), &instances, cfg)?;
        Ok(Self { tree })
    }

    pub fn tree(&self) -> &DecisionTree {
        &self.tree
    }

    pub fn scenario_specific(&self) -> bool {
        self.tree.schema == identifier_schema(true)
    }

    pub fn classify(&self, row: &IdentifierRow) -> Result<FourClass, IdentifyError> {
        let class = self.tree.classify(&row.values())?;
        Ok(FourClass::ALL[class])
    }

    pub fn classify_binary(&self, row: &IdentifierRow) -> Result<Binary, IdentifyError> {
        self.classify(row).map(FourClass::to_binary)
    }

    pub fn save<W: Write>(&self, mut writer: W) -> Result<(), IdentifyError> {
        let file = TreeFile {
            version: TREE_VERSION,
            schema: self.tree.schema.clone(),
            nodes: self.tree.nodes.clone(),
        };
        serde_json::to_writer_pretty(&mut writer, &file).map_err(|e| IdentifyError::Corrupt(e.to_string()))?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut buf = Vec::new();
        self.save(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn load<R: Read>(reader: R) -> Result<Self, IdentifyError> {
        let value: serde_json::Value =
            serde_json::from_reader(reader).map_err(|e| IdentifyError::Corrupt(e.to_string()))?;
        let version = value
            .get("version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| IdentifyError::Corrupt("missing version".into()))?;
        if version != u64::from(TREE_VERSION) {
            return Err(IdentifyError::VersionMismatch {
                found: version as u32,
                expected: TREE_VERSION,
            });
        }
        let file: TreeFile = serde_json::from_value(value).map_err(|e| IdentifyError::Corrupt(e.to_string()))?;
        if file.schema != identifier_schema(true) && file.schema != identifier_schema(false) {
            return Err(IdentifyError::Corrupt("not an identifier schema".into()));
        }
        let tree = DecisionTree {
            schema: file.schema,
            nodes: file.nodes,
        };
        tree.validate()?;
        Ok(Self { tree })
    }
}
