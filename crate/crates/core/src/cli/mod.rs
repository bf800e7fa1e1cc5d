//! The `scriptmap` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

mod config;

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{parse_key_values, RunConfig};

use crate::corpus::{write_stories, Binary, Corpus, CorpusError, EsdDocument, VerbMention};
use crate::crf::{CrfError, CrfModel};
use crate::embed::{EmbedError, EmbeddingTable};
use crate::eval::{
    evaluate_classification, evaluate_identification, evaluate_pipeline, ClassSystem, EvalError,
    EvalInputs, EvalReport, Experiment, IdentSystem,
};
use crate::features::build_scenario_stats;
use crate::identify::{extract_row, Identifier, IdentifyError, NonActionList};
use crate::mapping::{label_mentions, train_scenario_model, tune_scenario_epsilon, MapError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Crf(#[from] CrfError),
    #[error(transparent)]
    Identify(#[from] IdentifyError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let numeric = match self {
            CliError::Usage(_) => return 1,
            CliError::Crf(e) => e.is_numeric(),
            CliError::Embed(EmbedError::Crf(e)) => e.is_numeric(),
            CliError::Map(e) => e.is_numeric(),
            CliError::Eval(e) => e.is_numeric(),
            _ => false,
        };
        if numeric {
            3
        } else {
            2
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "scriptmap", version, about = "Map verb mentions in narrative texts to script event types")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse the corpus and print per-scenario statistics.
    Validate(Flags),
    /// Train the script-relevance decision tree on annotated stories.
    TrainIdentify(Flags),
    /// Mark each verb mention as event or non_script with a trained tree.
    Identify(Flags),
    /// Train one CRF per scenario on its ESDs.
    TrainMap(Flags),
    /// Label story verb mentions with event types.
    Map(Flags),
    /// Report dev accuracy of every ε candidate per scenario.
    TuneEpsilon(Flags),
    /// Run an evaluation protocol.
    Evaluate {
        #[command(subcommand)]
        experiment: EvalCommand,
    },
}

#[derive(Debug, Subcommand)]
enum EvalCommand {
    Identification(Flags),
    Classification(Flags),
    Pipeline(Flags),
}

/// Overrides of the configuration file, shared by every subcommand.
#[derive(Debug, Args)]
struct Flags {
    /// JSON or key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ESD corpus file or directory.
    #[arg(long)]
    descript: Option<PathBuf>,
    /// Story corpus file or directory.
    #[arg(long)]
    inscript: Option<PathBuf>,
    /// Word embeddings in text format.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Non-action verb list, one lemma per line.
    #[arg(long)]
    nonaction: Option<PathBuf>,
    /// Decision tree model file.
    #[arg(long)]
    tree_model: Option<PathBuf>,
    /// Directory of per-scenario CRF models.
    #[arg(long)]
    crf_models: Option<PathBuf>,
    /// Output file (or model directory for train-map).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Text table of an evaluation.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Directory for per-scenario confusion matrices.
    #[arg(long)]
    confusion_dir: Option<PathBuf>,
    /// Restrict to a scenario; repeatable.
    #[arg(long = "scenario")]
    scenarios: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed discretization threshold.
    #[arg(long, conflicts_with = "tune_epsilon")]
    epsilon: Option<f64>,
    /// Tune ε on held-out ESDs even if the config fixes it.
    #[arg(long)]
    tune_epsilon: bool,
    /// ε candidates, comma separated.
    #[arg(long, value_delimiter = ',')]
    tune_grid: Option<Vec<f64>>,
    #[arg(long)]
    dev_fraction: Option<f64>,
    #[arg(long)]
    folds: Option<usize>,
    /// CRF L2 penalty.
    #[arg(long)]
    l2: Option<f64>,
    /// CRF optimizer iteration cap.
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    /// Pruning confidence factor.
    #[arg(long)]
    confidence: Option<f64>,
    #[arg(long)]
    no_prune: bool,
    /// Train CRFs without transition features.
    #[arg(long)]
    no_seq: bool,
    /// Drop script features; evaluate leave-one-scenario-out.
    #[arg(long)]
    scenario_independent: bool,
    /// Systems to evaluate, comma separated.
    #[arg(long, value_delimiter = ',')]
    systems: Option<Vec<String>>,
    /// Identifier of the pipeline.
    #[arg(long)]
    identifier: Option<String>,
    #[arg(long)]
    remove_stopwords: bool,
    #[arg(long)]
    no_pronoun_resolution: bool,
}

impl Flags {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v.into(); })*
            };
        }
        set!(
            descript => c.descript,
            inscript => c.inscript,
            embeddings => c.embeddings,
            nonaction => c.nonaction,
            tree_model => c.tree_model,
            crf_models => c.crf_models,
            out => c.out,
            table => c.table,
            confusion_dir => c.confusion_dir,
            seed => c.seed,
            epsilon => c.epsilon,
            tune_grid => c.tune_grid,
            dev_fraction => c.dev_fraction,
            folds => c.folds,
            l2 => c.crf.l2,
            max_iterations => c.crf.max_iterations,
            min_leaf => c.tree.min_leaf,
            confidence => c.tree.confidence,
            systems => c.systems,
            identifier => c.identifier,
        );
        if !self.scenarios.is_empty() {
            c.scenarios = self.scenarios;
        }
        if self.tune_epsilon {
            c.epsilon = None;
        }
        c.tree.prune &= !self.no_prune;
        c.no_seq |= self.no_seq;
        c.scenario_independent |= self.scenario_independent;
        c.remove_stopwords |= self.remove_stopwords;
        c.resolve_pronouns &= !self.no_pronoun_resolution;
        c.validate()?;
        Ok(c)
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate(f) => cmd_validate(&f.resolve()?),
        Command::TrainIdentify(f) => cmd_train_identify(&f.resolve()?),
        Command::Identify(f) => cmd_identify(&f.resolve()?),
        Command::TrainMap(f) => cmd_train_map(&f.resolve()?),
        Command::Map(f) => cmd_map(&f.resolve()?),
        Command::TuneEpsilon(f) => cmd_tune_epsilon(&f.resolve()?),
        Command::Evaluate { experiment } => match experiment {
            EvalCommand::Identification(f) => cmd_evaluate(Experiment::Identification, &f.resolve()?),
            EvalCommand::Classification(f) => cmd_evaluate(Experiment::Classification, &f.resolve()?),
            EvalCommand::Pipeline(f) => cmd_evaluate(Experiment::Pipeline, &f.resolve()?),
        },
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    let path = path
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required")))?;
    if !path.exists() {
        return Err(CliError::Data(format!("{}: no such file or directory", path.display())));
    }
    Ok(path)
}

fn existing(path: &Option<PathBuf>) -> Result<Option<&Path>, CliError> {
    match path.as_deref() {
        Some(p) if !p.exists() => Err(CliError::Data(format!("{}: no such file or directory", p.display()))),
        other => Ok(other),
    }
}

/// Loads the corpus, applies the scenario filter and pronoun resolution.
fn load_corpus(c: &RunConfig, need_descript: bool, need_inscript: bool) -> Result<Corpus, CliError> {
    let descript = if need_descript {
        Some(required(&c.descript, "descript")?)
    } else {
        existing(&c.descript)?
    };
    let inscript = if need_inscript {
        Some(required(&c.inscript, "inscript")?)
    } else {
        existing(&c.inscript)?
    };
    let mut corpus = Corpus::load(descript, inscript)?;
    if !c.scenarios.is_empty() {
        let known = corpus.scenario_ids();
        if let Some(s) = c.scenarios.iter().find(|s| !known.contains(s)) {
            return Err(CliError::Data(format!("unknown scenario `{s}`")));
        }
        corpus.retain_scenarios(&c.scenarios);
    }
    if c.resolve_pronouns {
        for w in corpus.resolve_pronouns() {
            log::debug!("{w:?}");
        }
    }
    Ok(corpus)
}

fn vocabulary(corpus: &Corpus) -> HashSet<String> {
    let ed_tokens = corpus.esds.iter().flat_map(|d| d.eds.iter().flat_map(|e| e.tokens.iter()));
    let story_tokens = corpus.stories.iter().flat_map(|s| s.sentences.iter().flatten());
    ed_tokens
        .chain(story_tokens)
        .flat_map(|t| [t.lemma.to_lowercase(), t.surface.to_lowercase()])
        .collect()
}

fn load_embeddings(c: &RunConfig, corpus: &Corpus) -> Result<EmbeddingTable, CliError> {
    let path = required(&c.embeddings, "embeddings")?;
    let file = File::open(path).map_err(io_err(path))?;
    let table = EmbeddingTable::load_filtered(BufReader::new(file), Some(&vocabulary(corpus)))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    log::info!("loaded {} embeddings of dimension {}", table.len(), table.dim());
    Ok(table)
}

fn load_nonaction(c: &RunConfig) -> Result<NonActionList, CliError> {
    match existing(&c.nonaction)? {
        Some(path) => NonActionList::load(path).map_err(io_err(path)),
        None => Ok(NonActionList::default()),
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io_err(dir))?;
            }
            fs::write(p, text).map_err(io_err(p))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(io_err(Path::new("<stdout>")))
        }
    }
}

fn cmd_validate(c: &RunConfig) -> Result<(), CliError> {
    if c.descript.is_none() && c.inscript.is_none() {
        return Err(CliError::Usage("--descript or --inscript is required".into()));
    }
    let corpus = load_corpus(c, false, false)?;
    let mut out = String::from("scenario\tesds\teds\tstories\tmentions\tevent_mentions\tevent_types\n");
    for id in corpus.scenario_ids() {
        let esds: Vec<&EsdDocument> = corpus.esds_for(&id).collect();
        let eds: usize = esds.iter().map(|d| d.eds.len()).sum();
        let stories: Vec<_> = corpus.stories_for(&id).collect();
        let mentions: usize = stories.iter().map(|s| s.mentions.len()).sum();
        let events: usize = stories.iter().map(|s| s.event_mentions().count()).sum();
        let types = corpus.scenario(&id).event_types.len();
        out.push_str(&format!(
            "{id}\t{}\t{eds}\t{}\t{mentions}\t{events}\t{types}\n",
            esds.len(),
            stories.len()
        ));
    }
    out.push_str(&format!("{} scenarios\n", corpus.scenario_ids().len()));
    if c.embeddings.is_some() {
        let table = load_embeddings(c, &corpus)?;
        out.push_str(&format!("{} embeddings of dimension {}\n", table.len(), table.dim()));
    }
    write_output(None, &out)
}

fn cmd_train_identify(c: &RunConfig) -> Result<(), CliError> {
    let model_path = c
        .tree_model
        .clone()
        .or_else(|| c.out.clone())
        .ok_or_else(|| CliError::Usage("--tree-model is required".into()))?;
    let corpus = load_corpus(c, !c.scenario_independent, true)?;
    let nonaction = load_nonaction(c)?;
    let stats = build_scenario_stats(&corpus.esds);
    let mut rows = Vec::new();
    for story in &corpus.stories {
        let st = if c.scenario_independent {
            None
        } else {
            Some(stats.get(&story.scenario).ok_or_else(|| {
                CliError::Data(format!("scenario `{}` has stories but no ESDs", story.scenario))
            })?)
        };
        rows.extend(story.mentions.iter().map(|m| extract_row(m, story, st, &nonaction)));
    }
    let identifier = Identifier::train(&rows, &c.tree)?;
    write_output(Some(&model_path), &identifier.to_json())?;
    println!(
        "trained on {} mentions: {} leaves, depth {} -> {}",
        rows.len(),
        identifier.tree().n_leaves(),
        identifier.tree().depth(),
        model_path.display()
    );
    Ok(())
}

fn load_identifier(path: &Path) -> Result<Identifier, CliError> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(Identifier::load(BufReader::new(file))?)
}

/// Binary decision for every mention of every story, in corpus order.
fn identify_mentions(
    identifier: &Identifier,
    corpus: &Corpus,
    nonaction: &NonActionList,
) -> Result<Vec<Vec<Binary>>, CliError> {
    let stats = build_scenario_stats(&corpus.esds);
    corpus
        .stories
        .iter()
        .map(|story| {
            let st = if identifier.scenario_specific() {
                Some(stats.get(&story.scenario).ok_or_else(|| {
                    CliError::Data(format!("scenario `{}` has no ESDs for script features", story.scenario))
                })?)
            } else {
                None
            };
            story
                .mentions
                .iter()
                .map(|m| Ok(identifier.classify_binary(&extract_row(m, story, st, nonaction))?))
                .collect()
        })
        .collect()
}

fn set_predicted(corpus: &mut Corpus, predictions: &[Vec<String>]) {
    for (story, labels) in corpus.stories.iter_mut().zip(predictions) {
        for (m, label) in story.mentions.iter().zip(labels) {
            if let Some(t) = story
                .sentences
                .get_mut(m.sentence)
                .and_then(|s| s.get_mut(m.token - 1))
            {
                t.predicted = Some(label.clone());
            }
        }
    }
}

fn cmd_identify(c: &RunConfig) -> Result<(), CliError> {
    let identifier = load_identifier(required(&c.tree_model, "tree-model")?)?;
    let mut corpus = load_corpus(c, identifier.scenario_specific(), true)?;
    let nonaction = load_nonaction(c)?;
    let decisions = identify_mentions(&identifier, &corpus, &nonaction)?;
    let labels: Vec<Vec<String>> = decisions
        .iter()
        .map(|d| d.iter().map(|b| b.as_str().to_string()).collect())
        .collect();
    set_predicted(&mut corpus, &labels);
    write_output(c.out.as_deref(), &write_stories(&corpus.stories))
}

fn model_dir(c: &RunConfig) -> Result<PathBuf, CliError> {
    c.crf_models
        .clone()
        .or_else(|| c.out.clone())
        .ok_or_else(|| CliError::Usage("--crf-models is required".into()))
}

fn model_file(dir: &Path, scenario: &str) -> PathBuf {
    dir.join(format!("{scenario}.crf.json"))
}

fn esd_scenarios(corpus: &Corpus) -> Vec<String> {
    let mut ids: Vec<String> = corpus.esds.iter().map(|d| d.scenario.clone()).collect();
    ids.sort();
    ids.dedup();
    ids
}

fn cmd_train_map(c: &RunConfig) -> Result<(), CliError> {
    let dir = model_dir(c)?;
    let corpus = load_corpus(c, true, false)?;
    let table = load_embeddings(c, &corpus)?;
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let map_cfg = c.map_config();
    for scenario in esd_scenarios(&corpus) {
        let esds: Vec<&EsdDocument> = corpus.esds_for(&scenario).collect();
        let (model, choice) = train_scenario_model(&scenario, &esds, &table, &map_cfg)?;
        if let Some(choice) = &choice {
            log::info!("{scenario}: tuned ε = {}", choice.epsilon);
        }
        let path = model_file(&dir, &scenario);
        write_output(Some(&path), &model.to_json())?;
        println!(
            "{scenario}\tepsilon={}\tlabels={}\ttransitions={}\t{}",
            model.meta.epsilon.unwrap_or_default(),
            model.labels().len(),
            model.use_transitions(),
            path.display()
        );
    }
    Ok(())
}

fn cmd_map(c: &RunConfig) -> Result<(), CliError> {
    let dir = required(&c.crf_models, "crf-models")?.to_path_buf();
    let identifier = existing(&c.tree_model)?.map(load_identifier).transpose()?;
    let need_esds = identifier.as_ref().is_some_and(Identifier::scenario_specific);
    let mut corpus = load_corpus(c, need_esds, true)?;
    let table = load_embeddings(c, &corpus)?;
    let nonaction = load_nonaction(c)?;
    let decisions = match &identifier {
        Some(id) => Some(identify_mentions(id, &corpus, &nonaction)?),
        None => None,
    };
    let mut models: std::collections::BTreeMap<String, CrfModel> = Default::default();
    let mut predictions = Vec::with_capacity(corpus.stories.len());
    for (i, story) in corpus.stories.iter().enumerate() {
        if !models.contains_key(&story.scenario) {
            let path = model_file(&dir, &story.scenario);
            if !path.exists() {
                return Err(CliError::Data(format!(
                    "no model for scenario `{}` ({})",
                    story.scenario,
                    path.display()
                )));
            }
            let file = File::open(&path).map_err(io_err(&path))?;
            models.insert(story.scenario.clone(), CrfModel::load(BufReader::new(file))?);
        }
        let model = &models[&story.scenario];
        let selected: Vec<usize> = (0..story.mentions.len())
            .filter(|&j| decisions.as_ref().is_none_or(|d| d[i][j] == Binary::Event))
            .collect();
        let mentions: Vec<&VerbMention> = selected.iter().map(|&j| &story.mentions[j]).collect();
        let labels = label_mentions(model, &mentions, &table)?;
        let mut out = vec![Binary::NonScript.as_str().to_string(); story.mentions.len()];
        for (j, label) in selected.into_iter().zip(labels) {
            out[j] = label;
        }
        predictions.push(out);
    }
    set_predicted(&mut corpus, &predictions);
    write_output(c.out.as_deref(), &write_stories(&corpus.stories))
}

fn cmd_tune_epsilon(c: &RunConfig) -> Result<(), CliError> {
    let corpus = load_corpus(c, true, false)?;
    let table = load_embeddings(c, &corpus)?;
    let cfg = c.map_config();
    let mut text = String::from("scenario");
    for e in &c.tune_grid {
        text.push_str(&format!("\tε={e}"));
    }
    text.push_str("\tchosen\n");
    let mut json = serde_json::Map::new();
    for scenario in esd_scenarios(&corpus) {
        let esds: Vec<&EsdDocument> = corpus.esds_for(&scenario).collect();
        let choice = tune_scenario_epsilon(&scenario, &esds, &table, &c.tune_grid, &cfg)?;
        log::info!("{scenario}: chose ε = {}", choice.epsilon);
        text.push_str(&scenario);
        for (_, acc) in &choice.scores {
            text.push_str(&format!("\t{acc:.4}"));
        }
        text.push_str(&format!("\t{}\n", choice.epsilon));
        json.insert(scenario, serde_json::to_value(&choice).expect("choice serializes"));
    }
    print!("{text}");
    if let Some(out) = &c.out {
        let mut body = serde_json::to_string_pretty(&json).expect("map serializes");
        body.push('\n');
        write_output(Some(out), &body)?;
    }
    Ok(())
}

fn parse_system<T: serde::de::DeserializeOwned>(name: &str, kind: &str) -> Result<T, CliError> {
    let key = name.trim().to_lowercase().replace('-', "_");
    serde_json::from_value(serde_json::Value::String(key))
        .map_err(|_| CliError::Usage(format!("unknown {kind} system `{name}`")))
}

fn ident_systems(c: &RunConfig) -> Result<Vec<IdentSystem>, CliError> {
    if c.systems.is_empty() {
        return Ok(if c.scenario_independent {
            vec![IdentSystem::Lemma, IdentSystem::TreeIndependent]
        } else {
            vec![IdentSystem::Lemma, IdentSystem::Tree]
        });
    }
    let systems = c
        .systems
        .iter()
        .map(|s| parse_system::<IdentSystem>(s, "identification"))
        .collect::<Result<Vec<_>, _>>()?;
    check_independent(c, &systems)?;
    Ok(systems)
}

fn check_independent(c: &RunConfig, systems: &[IdentSystem]) -> Result<(), CliError> {
    if c.scenario_independent && systems.contains(&IdentSystem::Tree) {
        return Err(CliError::Usage(
            "the `tree` identifier uses script features; use `tree_independent` with --scenario-independent".into(),
        ));
    }
    Ok(())
}

fn class_systems(c: &RunConfig, default: &[ClassSystem]) -> Result<Vec<ClassSystem>, CliError> {
    if c.systems.is_empty() {
        return Ok(default.to_vec());
    }
    c.systems
        .iter()
        .map(|s| parse_system(s, "classification"))
        .collect()
}

fn slug(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|ch| if ch.is_ascii_alphanumeric() { ch.to_ascii_lowercase() } else { '_' })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s.trim_matches('_').to_string()
}

fn write_confusions(dir: &Path, report: &EvalReport) -> Result<(), CliError> {
    for system in &report.systems {
        let sub = dir.join(slug(&system.name));
        fs::create_dir_all(&sub).map_err(io_err(&sub))?;
        for s in &system.scenarios {
            let path = sub.join(format!("{}.tsv", s.scenario));
            fs::write(&path, s.confusion.to_tsv()).map_err(io_err(&path))?;
        }
    }
    Ok(())
}

/// Loads the inputs named by `c`, runs one experiment and returns its report
/// with `c` embedded as the effective configuration.
pub fn run_evaluation(experiment: Experiment, c: &RunConfig) -> Result<EvalReport, CliError> {
    let corpus = load_corpus(c, true, true)?;
    if corpus.stories.is_empty() {
        return Err(CliError::Data("no stories to evaluate".into()));
    }
    let table = match &c.embeddings {
        Some(_) => Some(load_embeddings(c, &corpus)?),
        None => None,
    };
    let nonaction = load_nonaction(c)?;
    let inputs = EvalInputs {
        corpus: &corpus,
        table: table.as_ref(),
        nonaction: &nonaction,
    };
    let cfg = c.eval_config();
    let mut report = match experiment {
        Experiment::Identification => evaluate_identification(inputs, &ident_systems(c)?, &cfg)?,
        Experiment::Classification => {
            let default = [ClassSystem::Lemma, ClassSystem::Cosine, ClassSystem::Crf, ClassSystem::CrfNoSeq];
            evaluate_classification(inputs, &class_systems(c, &default)?, &cfg)?
        }
        Experiment::Pipeline => {
            let identifier = match &c.identifier {
                Some(name) => parse_system::<IdentSystem>(name, "identification")?,
                None if c.scenario_independent => IdentSystem::TreeIndependent,
                None => IdentSystem::Tree,
            };
            check_independent(c, &[identifier])?;
            let default = [ClassSystem::Lemma, ClassSystem::Cosine, ClassSystem::Crf];
            evaluate_pipeline(inputs, identifier, &class_systems(c, &default)?, &cfg)?
        }
    };
    report.config = serde_json::to_value(c).expect("config serializes");
    for w in &report.warnings {
        log::warn!("{w}");
    }
    Ok(report)
}

fn cmd_evaluate(experiment: Experiment, c: &RunConfig) -> Result<(), CliError> {
    let report = run_evaluation(experiment, c)?;
    write_output(c.out.as_deref(), &report.to_json())?;
    if let Some(dir) = &c.confusion_dir {
        write_confusions(dir, &report)?;
    }
    match (&c.table, &c.out) {
        (Some(path), _) => write_output(Some(path), &report.to_table())?,
        (None, Some(_)) => write_output(None, &report.to_table())?,
        (None, None) => {}
    }
    Ok(())
}
