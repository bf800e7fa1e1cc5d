//! Scenario-centred corpora: event sequence descriptions (ESDs) and stories.
//!
//! Both document kinds share one column format (see [`tsv`]). Stories carry
//! verb-level gold labels and yield [`VerbMention`]s; ESDs are ordered lists of
//! [`EventDescription`]s, each labeled with the event type it describes.

mod coref;
mod folds;
pub mod pos;
mod tsv;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use coref::{resolve_pronouns, CorefWarning};
pub use folds::{
    descript_to_inscript, leave_one_scenario_out, split_folds, ExperimentKind, Fold, FoldError,
    FoldPlan,
};
pub use tsv::{
    parse_corpus_file, parse_corpus_with, parse_esds, parse_stories, write_esds, write_stories,
    DocKind, Document,
};

/// Marker for an absent column value.
pub const ABSENT: &str = "_";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: head index {head} points outside a sentence of {len} tokens")]
    DanglingHead { line: usize, head: usize, len: usize },
    #[error("line {line}: duplicate document id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    /// Line number of the offending input line, if the error has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::Malformed { line, .. }
            | CorpusError::UnknownLabel { line, .. }
            | CorpusError::DanglingHead { line, .. }
            | CorpusError::DuplicateId { line, .. } => Some(*line),
            CorpusError::InFile { source, .. } => source.line(),
            CorpusError::Io { .. } => None,
        }
    }
}

/// The three InScript verb classes that do not instantiate a script event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonScriptKind {
    NonScriptEvent,
    ScriptRelated,
    ScriptEvoking,
}

impl NonScriptKind {
    pub const ALL: [NonScriptKind; 3] = [
        NonScriptKind::NonScriptEvent,
        NonScriptKind::ScriptRelated,
        NonScriptKind::ScriptEvoking,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NonScriptKind::NonScriptEvent => "non_script_event",
            NonScriptKind::ScriptRelated => "script_related",
            NonScriptKind::ScriptEvoking => "script_evoking",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

/// Gold annotation of a verb or event description.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GoldLabel {
    Event(String),
    NonScript(NonScriptKind),
}

impl GoldLabel {
    /// Parses a label string. Event-type labels are identifiers made of
    /// ASCII alphanumerics and `_ - . :`; anything else is rejected.
    pub fn parse(s: &str) -> Option<GoldLabel> {
        if let Some(kind) = NonScriptKind::from_label(s) {
            return Some(GoldLabel::NonScript(kind));
        }
        let valid = !s.is_empty()
            && s != ABSENT
            && s
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.' | ':'));
        valid.then(|| GoldLabel::Event(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        match self {
            GoldLabel::Event(t) => t,
            GoldLabel::NonScript(k) => k.as_str(),
        }
    }

    pub fn event_type(&self) -> Option<&str> {
        match self {
            GoldLabel::Event(t) => Some(t),
            GoldLabel::NonScript(_) => None,
        }
    }

    pub fn is_event(&self) -> bool {
        matches!(self, GoldLabel::Event(_))
    }
}

impl fmt::Display for GoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Evaluation-time class: event types merge into `Event`, the three
/// non-script kinds into `NonScript`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binary {
    Event,
    NonScript,
}

impl Binary {
    pub fn as_str(self) -> &'static str {
        match self {
            Binary::Event => "event",
            Binary::NonScript => "non_script",
        }
    }
}

pub fn collapse_label(label: &GoldLabel) -> Binary {
    match label {
        GoldLabel::Event(_) => Binary::Event,
        GoldLabel::NonScript(_) => Binary::NonScript,
    }
}

/// One row of the column format.
#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    /// 0 for the root, otherwise the 1-based index of the head token.
    pub head: usize,
    pub deprel: String,
    pub coref: Option<String>,
    pub label: Option<GoldLabel>,
    pub frame: Option<String>,
    /// System output column, written by the `identify` and `map` commands.
    pub predicted: Option<String>,
}

/// Relations whose nominal dependents count as event participants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependentConfig {
    pub relations: Vec<String>,
}

impl Default for DependentConfig {
    fn default() -> Self {
        Self {
            relations: ["dobj", "obj", "iobj", "nsubj", "nmod", "obl"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl DependentConfig {
    pub fn accepts(&self, deprel: &str) -> bool {
        let base = pos::base_relation(deprel);
        self.relations.iter().any(|r| r == deprel || r == base)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dependent {
    pub deprel: String,
    pub lemma: String,
    /// 1-based index of the dependent token within the mention's sentence.
    pub token: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerbMention {
    /// 0-based sentence number.
    pub sentence: usize,
    /// 1-based token index.
    pub token: usize,
    pub lemma: String,
    pub dependents: Vec<Dependent>,
    pub frame: Option<String>,
    pub gold: GoldLabel,
}

impl VerbMention {
    pub fn position(&self) -> (usize, usize) {
        (self.sentence, self.token)
    }

    /// First dependent with one of the given base relations, in token order.
    pub fn first_dependent(&self, relations: &[&str]) -> Option<&Dependent> {
        self.dependents
            .iter()
            .filter(|d| relations.contains(&pos::base_relation(&d.deprel)))
            .min_by_key(|d| d.token)
    }

    pub fn dependent_lemmas(&self) -> impl Iterator<Item = &str> {
        self.dependents.iter().map(|d| d.lemma.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventDescription {
    /// Position as written in the `#ed` header; EDs are in temporal order.
    pub index: usize,
    pub event_type: GoldLabel,
    pub tokens: Vec<Token>,
}

impl EventDescription {
    /// The root verb, or the first verbal token when the root is not a verb.
    pub fn main_verb(&self) -> Option<&Token> {
        self.tokens
            .iter()
            .find(|t| t.head == 0 && pos::is_verbal(&t.pos))
            .or_else(|| self.tokens.iter().find(|t| pos::is_verbal(&t.pos)))
    }

    /// Nominal tokens that head their phrase (compound modifiers excluded).
    pub fn head_nouns(&self) -> impl Iterator<Item = &Token> {
        self.tokens
            .iter()
            .filter(|t| pos::is_nominal(&t.pos) && pos::base_relation(&t.deprel) != "compound")
    }

    /// First dependent of the main verb with one of the given base relations.
    pub fn verb_dependent(&self, relations: &[&str]) -> Option<&Token> {
        let verb = self.main_verb()?;
        self.tokens
            .iter()
            .find(|t| t.head == verb.index && relations.contains(&pos::base_relation(&t.deprel)))
    }

    pub fn is_script_event(&self) -> bool {
        self.event_type.is_event()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsdDocument {
    pub scenario: String,
    pub id: String,
    pub eds: Vec<EventDescription>,
}

impl EsdDocument {
    /// EDs usable as training items: those labeled with an event type.
    pub fn training_eds(&self) -> impl Iterator<Item = &EventDescription> {
        self.eds.iter().filter(|ed| ed.is_script_event())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Story {
    pub scenario: String,
    pub id: String,
    pub sentences: Vec<Vec<Token>>,
    pub mentions: Vec<VerbMention>,
}

impl Story {
    pub fn token(&self, sentence: usize, index: usize) -> Option<&Token> {
        self.sentences.get(sentence)?.get(index.checked_sub(1)?)
    }

    /// Direct dependents of a token, in token order.
    pub fn children(&self, sentence: usize, index: usize) -> impl Iterator<Item = &Token> {
        self.sentences
            .get(sentence)
            .into_iter()
            .flatten()
            .filter(move |t| t.head == index)
    }

    /// Rebuilds `mentions` from the token columns.
    pub fn extract_mentions(&mut self, cfg: &DependentConfig) {
        self.mentions = extract_mentions(&self.sentences, cfg);
    }

    pub fn event_mentions(&self) -> impl Iterator<Item = &VerbMention> {
        self.mentions.iter().filter(|m| m.gold.is_event())
    }
}

pub(crate) fn extract_mentions(sentences: &[Vec<Token>], cfg: &DependentConfig) -> Vec<VerbMention> {
    let mut mentions = Vec::new();
    for (s, sentence) in sentences.iter().enumerate() {
        for tok in sentence {
            let Some(gold) = &tok.label else { continue };
            let dependents = sentence
                .iter()
                .filter(|d| {
                    d.head == tok.index
                        && cfg.accepts(&d.deprel)
                        && (pos::is_nominal(&d.pos) || pos::is_pronoun(&d.pos))
                })
                .map(|d| Dependent {
                    deprel: d.deprel.clone(),
                    lemma: d.lemma.clone(),
                    token: d.index,
                })
                .collect();
            mentions.push(VerbMention {
                sentence: s,
                token: tok.index,
                lemma: tok.lemma.clone(),
                dependents,
                frame: tok.frame.clone(),
                gold: gold.clone(),
            });
        }
    }
    mentions
}

/// A scenario and its event-type inventory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    /// Event types in order of first appearance: ESDs first, then stories.
    pub event_types: Vec<String>,
}

impl Scenario {
    pub fn collect<'a>(
        id: &str,
        esds: impl IntoIterator<Item = &'a EsdDocument>,
        stories: impl IntoIterator<Item = &'a Story>,
    ) -> Scenario {
        let mut seen = HashSet::new();
        let mut event_types = Vec::new();
        let mut push = |t: &str| {
            if seen.insert(t.to_string()) {
                event_types.push(t.to_string());
            }
        };
        for doc in esds.into_iter().filter(|d| d.scenario == id) {
            for ed in doc.training_eds() {
                push(ed.event_type.as_str());
            }
        }
        for story in stories.into_iter().filter(|d| d.scenario == id) {
            for m in story.event_mentions() {
                push(m.gold.as_str());
            }
        }
        Scenario {
            id: id.to_string(),
            event_types,
        }
    }
}

/// ESDs and stories loaded together, with globally unique document ids.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub esds: Vec<EsdDocument>,
    pub stories: Vec<Story>,
}

impl Corpus {
    /// Loads every `.tsv` file under each path (or the path itself when it is
    /// a file). Files are read in sorted order.
    pub fn load(descript: Option<&Path>, inscript: Option<&Path>) -> Result<Corpus, CorpusError> {
        let mut corpus = Corpus::default();
        let mut ids: HashSet<String> = HashSet::new();
        if let Some(path) = descript {
            for file in corpus_files(path)? {
                let text = read(&file)?;
                let docs = parse_esds(&text).map_err(|e| in_file(&file, e))?;
                for d in &docs {
                    check_unique(&mut ids, &d.id, &file, &text)?;
                }
                corpus.esds.extend(docs);
            }
        }
        if let Some(path) = inscript {
            for file in corpus_files(path)? {
                let text = read(&file)?;
                let docs = parse_stories(&text).map_err(|e| in_file(&file, e))?;
                for d in &docs {
                    check_unique(&mut ids, &d.id, &file, &text)?;
                }
                corpus.stories.extend(docs);
            }
        }
        Ok(corpus)
    }

    /// Scenario ids present in either document kind, sorted.
    pub fn scenario_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .esds
            .iter()
            .map(|d| d.scenario.clone())
            .chain(self.stories.iter().map(|d| d.scenario.clone()))
            .collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn scenario(&self, id: &str) -> Scenario {
        Scenario::collect(id, &self.esds, &self.stories)
    }

    pub fn esds_for<'a>(&'a self, scenario: &'a str) -> impl Iterator<Item = &'a EsdDocument> {
        self.esds.iter().filter(move |d| d.scenario == scenario)
    }

    pub fn stories_for<'a>(&'a self, scenario: &'a str) -> impl Iterator<Item = &'a Story> {
        self.stories.iter().filter(move |d| d.scenario == scenario)
    }

    /// Story ids grouped by scenario, in sorted scenario order.
    pub fn stories_by_scenario(&self) -> Vec<(String, Vec<String>)> {
        let mut groups: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for s in &self.stories {
            groups.entry(s.scenario.clone()).or_default().push(s.id.clone());
        }
        groups.into_iter().collect()
    }

    /// Keeps only the listed scenarios; an empty filter keeps everything.
    pub fn retain_scenarios(&mut self, keep: &[String]) {
        if keep.is_empty() {
            return;
        }
        self.esds.retain(|d| keep.contains(&d.scenario));
        self.stories.retain(|d| keep.contains(&d.scenario));
    }

    /// Substitutes pronoun dependents with their antecedents in every story.
    pub fn resolve_pronouns(&mut self) -> Vec<CorefWarning> {
        let mut warnings = Vec::new();
        for story in &mut self.stories {
            let (resolved, w) = resolve_pronouns(story);
            *story = resolved;
            warnings.extend(w);
        }
        warnings
    }
}

fn corpus_files(path: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(io_err)? {
        let p = entry.map_err(io_err)?.path();
        if p.is_file() && p.extension().is_some_and(|e| e == "tsv") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn in_file(path: &Path, e: CorpusError) -> CorpusError {
    CorpusError::InFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    }
}

fn check_unique(
    ids: &mut HashSet<String>,
    id: &str,
    file: &Path,
    text: &str,
) -> Result<(), CorpusError> {
    if ids.insert(id.to_string()) {
        return Ok(());
    }
    let line = text
        .lines()
        .position(|l| l.split_whitespace().eq(["#doc", id]))
        .map_or(0, |i| i + 1);
    Err(in_file(
        file,
        CorpusError::DuplicateId {
            line,
            id: id.to_string(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapse_is_total_and_surjective() {
        assert_eq!(
            collapse_label(&GoldLabel::Event("choose_recipe".into())),
            Binary::Event
        );
        for kind in NonScriptKind::ALL {
            assert_eq!(collapse_label(&GoldLabel::NonScript(kind)), Binary::NonScript);
        }
        assert_eq!(
            collapse_label(&GoldLabel::parse("script_evoking").unwrap()),
            Binary::NonScript
        );
        assert_eq!(
            collapse_label(&GoldLabel::parse("non_script_event").unwrap()),
            Binary::NonScript
        );
    }

    #[test]
    fn label_syntax() {
        assert_eq!(
            GoldLabel::parse("choose_recipe"),
            Some(GoldLabel::Event("choose_recipe".into()))
        );
        assert_eq!(GoldLabel::parse("_"), None);
        assert_eq!(GoldLabel::parse("two words"), None);
        assert_eq!(GoldLabel::parse(""), None);
    }

    #[test]
    fn dependent_config_matches_subtypes() {
        let cfg = DependentConfig::default();
        assert!(cfg.accepts("obj"));
        assert!(cfg.accepts("nmod:poss"));
        assert!(!cfg.accepts("advmod"));
        assert!(!cfg.accepts("det"));
    }
}
