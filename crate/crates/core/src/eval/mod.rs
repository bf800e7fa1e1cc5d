//! Metrics and the three experiment protocols: identification of
//! script-relevant verbs, event-type classification of gold event
//! mentions, and the two combined.
//!
//! Per-scenario scores come from confusion counts pooled over folds.
//! Classification scores are averaged over event types within a scenario,
//! then over scenarios.

mod metrics;
mod report;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use metrics::{f1, ConfusionMatrix, Prf};
pub use report::{ClassReport, EvalReport, Experiment, ScenarioReport, SystemReport};

use crate::baselines::{cosine_classify, lemma_identify, overlap_classify, BaselineConfig, EdIndex};
use crate::corpus::{
    collapse_label, leave_one_scenario_out, split_folds, Binary, Corpus, EsdDocument, ExperimentKind,
    FoldError, GoldLabel, Story, VerbMention, ABSENT,
};
use crate::crf::CrfModel;
use crate::embed::EmbeddingTable;
use crate::features::{build_scenario_stats, ScenarioStats};
use crate::identify::{extract_row, Identifier, IdentifierRow, IdentifyError, NonActionList, TreeConfig};
use crate::mapping::{label_mentions, train_scenario_model, MapConfig, MapError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{0} needs word embeddings")]
    MissingEmbeddings(&'static str),
    #[error("no stories to evaluate")]
    NoStories,
    #[error(transparent)]
    Fold(#[from] FoldError),
    #[error(transparent)]
    Identify(#[from] IdentifyError),
    #[error(transparent)]
    Map(#[from] MapError),
}

impl EvalError {
    pub fn is_numeric(&self) -> bool {
        matches!(self, EvalError::Map(e) if e.is_numeric())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub seed: u64,
    /// Folds of the within-scenario identification protocol.
    pub folds: usize,
    pub tree: TreeConfig,
    pub map: MapConfig,
    pub baseline: BaselineConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            folds: 10,
            tree: TreeConfig::default(),
            map: MapConfig::default(),
            baseline: BaselineConfig::default(),
        }
    }
}

/// Data shared by all experiments.
#[derive(Clone, Copy)]
pub struct EvalInputs<'a> {
    pub corpus: &'a Corpus,
    pub table: Option<&'a EmbeddingTable>,
    pub nonaction: &'a NonActionList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentSystem {
    /// Decision tree with script features, cross-validated within each scenario.
    Tree,
    /// Decision tree without script features, trained on the other scenarios.
    TreeIndependent,
    /// Event iff the verb lemma appears in the scenario's ESDs.
    Lemma,
    Gold,
    /// Always non-script.
    Majority,
}

impl IdentSystem {
    pub fn name(self) -> &'static str {
        match self {
            IdentSystem::Tree => "Decision tree",
            IdentSystem::TreeIndependent => "Decision tree (scen. indep.)",
            IdentSystem::Lemma => "Lemma",
            IdentSystem::Gold => "Gold",
            IdentSystem::Majority => "Majority",
        }
    }

    fn protocol(self) -> ExperimentKind {
        match self {
            IdentSystem::TreeIndependent => ExperimentKind::LeaveOneScenarioOut,
            _ => ExperimentKind::WithinScenario10Fold,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassSystem {
    /// Nearest ED by lemma overlap.
    Lemma,
    /// Nearest ED by embedding cosine.
    Cosine,
    Crf,
    CrfNoSeq,
    Gold,
}

impl ClassSystem {
    pub fn name(self) -> &'static str {
        match self {
            ClassSystem::Lemma => "Lemma",
            ClassSystem::Cosine => "Cosine",
            ClassSystem::Crf => "CRF",
            ClassSystem::CrfNoSeq => "CRF, no seq.",
            ClassSystem::Gold => "Gold",
        }
    }
}

/// Location of a mention: (index into `corpus.stories`, index into `mentions`).
type MentionKey = (usize, usize);

#[derive(Default)]
struct Identified {
    predictions: BTreeMap<MentionKey, Binary>,
    skipped: BTreeMap<String, Vec<usize>>,
}

struct Context<'a> {
    inputs: EvalInputs<'a>,
    cfg: &'a EvalConfig,
    stats: BTreeMap<String, ScenarioStats>,
    index: EdIndex,
    /// Story indices by scenario, in corpus order.
    stories: BTreeMap<String, Vec<usize>>,
    warnings: Vec<String>,
}

impl<'a> Context<'a> {
    fn new(inputs: EvalInputs<'a>, cfg: &'a EvalConfig) -> Result<Self, EvalError> {
        if inputs.corpus.stories.is_empty() {
            return Err(EvalError::NoStories);
        }
        let mut stories: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, s) in inputs.corpus.stories.iter().enumerate() {
            stories.entry(s.scenario.clone()).or_default().push(i);
        }
        Ok(Self {
            inputs,
            cfg,
            stats: build_scenario_stats(&inputs.corpus.esds),
            index: EdIndex::build(&inputs.corpus.esds, inputs.table, &cfg.baseline),
            stories,
            warnings: Vec::new(),
        })
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }

    fn story(&self, i: usize) -> &'a Story {
        &self.inputs.corpus.stories[i]
    }

    fn esds(&self, scenario: &str) -> Vec<&'a EsdDocument> {
        self.inputs.corpus.esds.iter().filter(|d| d.scenario == scenario).collect()
    }

    fn stats_for(&self, scenario: &str) -> ScenarioStats {
        self.stats.get(scenario).cloned().unwrap_or_else(|| ScenarioStats {
            scenario: scenario.to_string(),
            verb_lemmas: BTreeSet::new(),
            tf: HashMap::new(),
            df: self.stats.values().next().map_or_else(|| Arc::new(HashMap::new()), |s| Arc::clone(&s.df)),
            n_scenarios: self.stats.len(),
        })
    }

    fn rows(&self, stories: &[usize], stats: Option<&ScenarioStats>) -> Vec<IdentifierRow> {
        stories
            .iter()
            .flat_map(|&i| {
                let s = self.story(i);
                s.mentions.iter().map(move |m| extract_row(m, s, stats, self.inputs.nonaction))
            })
            .collect()
    }

    /// Trains on `train`, predicts every mention of `test`. `None` when the
    /// training rows hold fewer than two classes.
    fn tree_fold(
        &self,
        train: &[usize],
        test: &[usize],
        stats: Option<&ScenarioStats>,
        out: &mut BTreeMap<MentionKey, Binary>,
    ) -> Result<Option<()>, EvalError> {
        let rows = self.rows(train, stats);
        let classes: BTreeSet<_> = rows.iter().map(|r| r.class).collect();
        if classes.len() < 2 {
            return Ok(None);
        }
        let tree = Identifier::train(&rows, &self.cfg.tree)?;
        for &i in test {
            let s = self.story(i);
            for (j, m) in s.mentions.iter().enumerate() {
                let row = extract_row(m, s, stats, self.inputs.nonaction);
                out.insert((i, j), tree.classify_binary(&row)?);
            }
        }
        Ok(Some(()))
    }

    fn identify(&mut self, system: IdentSystem) -> Result<Identified, EvalError> {
        let mut result = Identified::default();
        match system {
            IdentSystem::Tree => {
                for (scenario, stories) in self.stories.clone() {
                    let ids: Vec<String> = stories.iter().map(|&i| self.story(i).id.clone()).collect();
                    if ids.len() < 2 {
                        self.warn(format!("{scenario}: fewer than 2 stories, not cross-validated"));
                        continue;
                    }
                    let k = self.cfg.folds.min(ids.len());
                    if k < self.cfg.folds {
                        self.warn(format!("{scenario}: only {} stories, using {k} folds", ids.len()));
                    }
                    let plan = split_folds(&ids, k, self.cfg.seed)?;
                    let by_id: HashMap<&str, usize> =
                        stories.iter().map(|&i| (self.story(i).id.as_str(), i)).collect();
                    let stats = self.stats_for(&scenario);
                    for (f, fold) in plan.folds.iter().enumerate() {
                        let train: Vec<usize> = fold.train.iter().map(|id| by_id[id.as_str()]).collect();
                        let test: Vec<usize> = fold.test.iter().map(|id| by_id[id.as_str()]).collect();
                        if self.tree_fold(&train, &test, Some(&stats), &mut result.predictions)?.is_none() {
                            self.warn(format!("{scenario}: fold {f} has a single training class, skipped"));
                            result.skipped.entry(scenario.clone()).or_default().push(f);
                        }
                    }
                }
            }
            IdentSystem::TreeIndependent => {
                let plan = leave_one_scenario_out(&self.inputs.corpus.stories_by_scenario())?;
                let index: HashMap<&str, usize> = self
                    .inputs
                    .corpus
                    .stories
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.id.as_str(), i))
                    .collect();
                for (f, fold) in plan.folds.iter().enumerate() {
                    let train: Vec<usize> = fold.train.iter().map(|id| index[id.as_str()]).collect();
                    let test: Vec<usize> = fold.test.iter().map(|id| index[id.as_str()]).collect();
                    if self.tree_fold(&train, &test, None, &mut result.predictions)?.is_none() {
                        let scenario = self.story(test[0]).scenario.clone();
                        self.warn(format!("{scenario}: training scenarios hold a single class, skipped"));
                        result.skipped.entry(scenario).or_default().push(f);
                    }
                }
            }
            IdentSystem::Lemma | IdentSystem::Gold | IdentSystem::Majority => {
                for (i, s) in self.inputs.corpus.stories.iter().enumerate() {
                    let idx = self.index.scenario(&s.scenario);
                    for (j, m) in s.mentions.iter().enumerate() {
                        let pred = match system {
                            IdentSystem::Lemma => lemma_identify(m, idx),
                            IdentSystem::Gold => collapse_label(&m.gold),
                            _ => Binary::NonScript,
                        };
                        result.predictions.insert((i, j), pred);
                    }
                }
            }
        }
        Ok(result)
    }

    fn crf_models(&mut self, use_transitions: bool) -> Result<BTreeMap<String, CrfModel>, EvalError> {
        let table = self.inputs.table.ok_or(EvalError::MissingEmbeddings("the CRF"))?;
        let cfg = MapConfig {
            use_transitions,
            seed: self.cfg.seed,
            ..self.cfg.map.clone()
        };
        let mut models = BTreeMap::new();
        for scenario in self.stories.keys().cloned().collect::<Vec<_>>() {
            match train_scenario_model(&scenario, &self.esds(&scenario), table, &cfg) {
                Ok((model, _)) => {
                    models.insert(scenario, model);
                }
                Err(MapError::NoTrainingData(_)) => {
                    self.warn(format!("{scenario}: no ESD training data, every mention is a miss"));
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok(models)
    }

    /// Event types assigned to `keys`, which all belong to one story and
    /// are in text order.
    fn classify_story(
        &self,
        system: ClassSystem,
        models: Option<&BTreeMap<String, CrfModel>>,
        story: usize,
        keys: &[usize],
    ) -> Result<Vec<String>, EvalError> {
        let s = self.story(story);
        let mentions: Vec<&VerbMention> = keys.iter().map(|&j| &s.mentions[j]).collect();
        let none = || ABSENT.to_string();
        let idx = self.index.scenario(&s.scenario);
        Ok(match system {
            ClassSystem::Crf | ClassSystem::CrfNoSeq => {
                let table = self.inputs.table.ok_or(EvalError::MissingEmbeddings("the CRF"))?;
                match models.and_then(|m| m.get(&s.scenario)) {
                    Some(model) if !mentions.is_empty() => label_mentions(model, &mentions, table)?,
                    _ => vec![none(); mentions.len()],
                }
            }
            ClassSystem::Lemma => mentions
                .iter()
                .map(|m| idx.and_then(|i| overlap_classify(m, i)).map_or_else(none, str::to_string))
                .collect(),
            ClassSystem::Cosine => {
                let table = self.inputs.table.ok_or(EvalError::MissingEmbeddings("the cosine baseline"))?;
                mentions
                    .iter()
                    .map(|m| idx.and_then(|i| cosine_classify(m, i, table)).map_or_else(none, str::to_string))
                    .collect()
            }
            ClassSystem::Gold => {
                let fallback = self.inputs.corpus.scenario(&s.scenario).event_types.into_iter().next();
                mentions
                    .iter()
                    .map(|m| match &m.gold {
                        GoldLabel::Event(t) => t.clone(),
                        GoldLabel::NonScript(_) => fallback.clone().unwrap_or_else(none),
                    })
                    .collect()
            }
        })
    }

    fn models_for(&mut self, system: ClassSystem) -> Result<Option<BTreeMap<String, CrfModel>>, EvalError> {
        Ok(match system {
            ClassSystem::Crf => Some(self.crf_models(true)?),
            ClassSystem::CrfNoSeq => Some(self.crf_models(false)?),
            _ => None,
        })
    }

    fn training_types(&self, scenario: &str) -> BTreeSet<String> {
        self.esds(scenario)
            .iter()
            .flat_map(|d| d.training_eds())
            .map(|ed| ed.event_type.as_str().to_string())
            .collect()
    }

    fn report(&self, experiment: Experiment, systems: Vec<SystemReport>) -> EvalReport {
        EvalReport {
            experiment,
            seed: self.cfg.seed,
            folds: self.cfg.folds,
            config: serde_json::to_value(self.cfg).expect("config serializes"),
            systems,
            warnings: self.warnings.clone(),
        }
    }
}

fn gold_type(m: &VerbMention) -> &str {
    m.gold.event_type().unwrap_or(ABSENT)
}

/// Per-type scores over every event type seen as gold or prediction.
fn typed_scenario(scenario: &str, cm: ConfusionMatrix, skipped: Vec<usize>, unseen: Vec<String>) -> ScenarioReport {
    let mut types: Vec<&String> = cm.labels().iter().filter(|l| l.as_str() != ABSENT).collect();
    types.sort();
    let classes: Vec<ClassReport> = types
        .into_iter()
        .map(|t| ClassReport {
            label: t.clone(),
            prf: cm.prf(t),
            support: cm.support(t),
        })
        .collect();
    ScenarioReport {
        scenario: scenario.to_string(),
        macro_avg: Prf::mean(classes.iter().map(|c| &c.prf)),
        accuracy: cm.accuracy(),
        mentions: cm.total(),
        classes,
        confusion: cm,
        skipped_folds: skipped,
        unseen_types: unseen,
    }
}

fn system_report(name: String, protocol: ExperimentKind, scenarios: Vec<ScenarioReport>) -> SystemReport {
    let scored: Vec<&ScenarioReport> = scenarios.iter().filter(|s| s.mentions > 0).collect();
    let mut pooled = ConfusionMatrix::new();
    for s in &scored {
        pooled.merge(&s.confusion);
    }
    SystemReport {
        name,
        protocol,
        macro_avg: Prf::mean(scored.iter().map(|s| &s.macro_avg)),
        micro_accuracy: pooled.accuracy(),
        mentions: pooled.total(),
        scenarios,
    }
}

/// Binary event-class scores of each identification system.
pub fn evaluate_identification(
    inputs: EvalInputs<'_>,
    systems: &[IdentSystem],
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    let mut ctx = Context::new(inputs, cfg)?;
    let mut reports = Vec::new();
    for &system in systems {
        let identified = ctx.identify(system)?;
        let mut per_scenario: BTreeMap<String, ConfusionMatrix> = ctx
            .stories
            .keys()
            .map(|s| (s.clone(), ConfusionMatrix::with_labels([Binary::Event.as_str(), Binary::NonScript.as_str()])))
            .collect();
        for (&(i, j), pred) in &identified.predictions {
            let s = ctx.story(i);
            let gold = collapse_label(&s.mentions[j].gold);
            per_scenario
                .get_mut(&s.scenario)
                .expect("every story scenario is listed")
                .add(gold.as_str(), pred.as_str());
        }
        let scenarios = per_scenario
            .into_iter()
            .map(|(scenario, cm)| {
                let event = Binary::Event.as_str();
                let prf = cm.prf(event);
                ScenarioReport {
                    classes: vec![ClassReport {
                        label: event.to_string(),
                        prf,
                        support: cm.support(event),
                    }],
                    macro_avg: prf,
                    accuracy: cm.accuracy(),
                    mentions: cm.total(),
                    skipped_folds: identified.skipped.get(&scenario).cloned().unwrap_or_default(),
                    unseen_types: vec![],
                    confusion: cm,
                    scenario,
                }
            })
            .collect();
        reports.push(system_report(system.name().to_string(), system.protocol(), scenarios));
    }
    Ok(ctx.report(Experiment::Identification, reports))
}

/// Event-type scores on gold event mentions; classifiers see only ESDs.
pub fn evaluate_classification(
    inputs: EvalInputs<'_>,
    systems: &[ClassSystem],
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    let mut ctx = Context::new(inputs, cfg)?;
    let mut reports = Vec::new();
    for &system in systems {
        let models = ctx.models_for(system)?;
        let mut scenarios = Vec::new();
        for (scenario, stories) in &ctx.stories {
            let mut cm = ConfusionMatrix::new();
            let known = ctx.training_types(scenario);
            let mut unseen = BTreeSet::new();
            for &i in stories {
                let s = ctx.story(i);
                let keys: Vec<usize> = (0..s.mentions.len()).filter(|&j| s.mentions[j].gold.is_event()).collect();
                let predicted = ctx.classify_story(system, models.as_ref(), i, &keys)?;
                for (&j, p) in keys.iter().zip(&predicted) {
                    let gold = gold_type(&s.mentions[j]);
                    if !known.contains(gold) {
                        unseen.insert(gold.to_string());
                    }
                    cm.add(gold, p);
                }
            }
            scenarios.push(typed_scenario(scenario, cm, vec![], unseen.into_iter().collect()));
        }
        reports.push(system_report(
            system.name().to_string(),
            ExperimentKind::DescriptToInscript,
            scenarios,
        ));
    }
    Ok(ctx.report(Experiment::Classification, reports))
}

/// Identification followed by classification of the identified verbs. A
/// mention counts for type t when it is gold t; it is predicted t when it
/// was identified as an event and labeled t.
pub fn evaluate_pipeline(
    inputs: EvalInputs<'_>,
    identifier: IdentSystem,
    classifiers: &[ClassSystem],
    cfg: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    let mut ctx = Context::new(inputs, cfg)?;
    let identified = ctx.identify(identifier)?;
    let mut reports = Vec::new();
    for &system in classifiers {
        let models = ctx.models_for(system)?;
        let mut scenarios = Vec::new();
        for (scenario, stories) in &ctx.stories {
            let mut cm = ConfusionMatrix::new();
            for &i in stories {
                let s = ctx.story(i);
                let evaluated: Vec<usize> = (0..s.mentions.len())
                    .filter(|&j| identified.predictions.contains_key(&(i, j)))
                    .collect();
                let events: Vec<usize> = evaluated
                    .iter()
                    .copied()
                    .filter(|&j| identified.predictions[&(i, j)] == Binary::Event)
                    .collect();
                let labels = ctx.classify_story(system, models.as_ref(), i, &events)?;
                let assigned: HashMap<usize, &String> = events.iter().copied().zip(&labels).collect();
                for j in evaluated {
                    let predicted = assigned.get(&j).map_or(ABSENT, |l| l.as_str());
                    cm.add(gold_type(&s.mentions[j]), predicted);
                }
            }
            let skipped = identified.skipped.get(scenario).cloned().unwrap_or_default();
            scenarios.push(typed_scenario(scenario, cm, skipped, vec![]));
        }
        reports.push(system_report(
            format!("{} + {}", identifier.name(), system.name()),
            identifier.protocol(),
            scenarios,
        ));
    }
    Ok(ctx.report(Experiment::Pipeline, reports))
}

#[cfg(test)]
mod tests;
