//! Python bindings: corpus loading, embeddings, the CRF, fold splitting,
//! metrics and the evaluation protocols.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use scriptmap_core::cli::{run_evaluation, CliError, RunConfig};
use scriptmap_core::corpus::{self, parse_esds, parse_stories, GoldLabel};
use scriptmap_core::crf::{self, CrfError, LabelSet, Sequence, TrainConfig};
use scriptmap_core::embed::{self, DiscretizationConfig, EmbedError};
use scriptmap_core::eval::{self, Experiment};
use scriptmap_core::features::ObservationItem;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn crf_err(e: CrfError) -> PyErr {
    match e {
        CrfError::Io(e) => PyIOError::new_err(e.to_string()),
        e if e.is_numeric() => PyRuntimeError::new_err(e.to_string()),
        e => value_err(e),
    }
}

fn embed_err(e: EmbedError) -> PyErr {
    match e {
        EmbedError::Io(e) => PyIOError::new_err(e.to_string()),
        e => value_err(e),
    }
}

fn items(seq: Vec<Vec<String>>) -> Vec<ObservationItem> {
    seq.into_iter().map(ObservationItem::new).collect()
}

/// Document and mention counts of a corpus file's text.
#[pyfunction]
fn parse_story_text(text: &str) -> PyResult<Vec<(String, String, usize)>> {
    let stories = parse_stories(text).map_err(value_err)?;
    Ok(stories
        .into_iter()
        .map(|s| (s.id, s.scenario, s.mentions.len()))
        .collect())
}

/// `(id, scenario, number of EDs)` per ESD.
#[pyfunction]
fn parse_esd_text(text: &str) -> PyResult<Vec<(String, String, usize)>> {
    let docs = parse_esds(text).map_err(value_err)?;
    Ok(docs.into_iter().map(|d| (d.id, d.scenario, d.eds.len())).collect())
}

/// `event` or `non_script` for a gold label string.
#[pyfunction]
fn collapse_label(label: &str) -> PyResult<&'static str> {
    let gold = GoldLabel::parse(label).ok_or_else(|| value_err(format!("invalid label `{label}`")))?;
    Ok(corpus::collapse_label(&gold).as_str())
}

/// Seeded k-fold split as a list of `(train, test)` id lists.
#[pyfunction]
#[pyo3(signature = (docs, k, seed = 42))]
fn split_folds(docs: Vec<String>, k: usize, seed: u64) -> PyResult<Vec<(Vec<String>, Vec<String>)>> {
    let plan = corpus::split_folds(&docs, k, seed).map_err(value_err)?;
    Ok(plan.folds.into_iter().map(|f| (f.train, f.test)).collect())
}

#[pyfunction]
fn cosine(u: Vec<f64>, v: Vec<f64>) -> PyResult<f64> {
    embed::cosine(&u, &v).map_err(embed_err)
}

/// `low`, `mid` or `high` per component.
#[pyfunction]
fn discretize(v: Vec<f64>, epsilon: f64) -> PyResult<Vec<&'static str>> {
    let cfg = DiscretizationConfig::new(epsilon).map_err(embed_err)?;
    Ok(embed::discretize(&v, &cfg).into_iter().map(|b| b.as_str()).collect())
}

/// `(precision, recall, f1)` from counts.
#[pyfunction]
fn prf(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let p = eval::Prf::from_counts(tp, fp, fn_);
    (p.precision, p.recall, p.f1)
}

#[pyfunction]
fn f1(precision: f64, recall: f64) -> f64 {
    eval::f1(precision, recall)
}

#[pyclass(name = "EmbeddingTable")]
struct PyEmbeddingTable {
    inner: embed::EmbeddingTable,
}

#[pymethods]
impl PyEmbeddingTable {
    #[new]
    fn new(dim: usize) -> Self {
        Self {
            inner: embed::EmbeddingTable::new(dim),
        }
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let file = File::open(&path).map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        let inner = embed::EmbeddingTable::load(BufReader::new(file)).map_err(embed_err)?;
        Ok(Self { inner })
    }

    /// Returns False (keeping the old vector) if the word exists.
    fn insert(&mut self, word: &str, vector: Vec<f32>) -> PyResult<bool> {
        self.inner.insert(word, &vector).map_err(embed_err)
    }

    fn get(&self, word: &str) -> Option<Vec<f32>> {
        self.inner.get(word).map(<[f32]>::to_vec)
    }

    /// Verb vector counted twice, averaged with the other words.
    fn mention_vector(&self, verb: &str, others: Vec<String>) -> Option<Vec<f64>> {
        embed::mention_vector(verb, others.iter().map(String::as_str), &self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "CrfModel")]
struct PyCrfModel {
    inner: crf::CrfModel,
}

#[pymethods]
impl PyCrfModel {
    /// Trains on sequences of items, each item a list of column values.
    #[staticmethod]
    #[pyo3(signature = (sequences, labels, l2 = 1.0, max_iterations = 200, use_transitions = true))]
    fn train(
        sequences: Vec<Vec<Vec<String>>>,
        labels: Vec<Vec<String>>,
        l2: f64,
        max_iterations: usize,
        use_transitions: bool,
    ) -> PyResult<Self> {
        if sequences.len() != labels.len() {
            return Err(value_err(format!(
                "{} sequences but {} label sequences",
                sequences.len(),
                labels.len()
            )));
        }
        let train: Vec<Sequence> = sequences
            .into_iter()
            .zip(labels)
            .map(|(s, l)| Sequence {
                items: items(s),
                labels: l,
            })
            .collect();
        let label_set = LabelSet::from_sequences(train.iter().map(|s| s.labels.as_slice()));
        let cfg = TrainConfig {
            l2,
            max_iterations,
            ..TrainConfig::default()
        };
        let inner = crf::train(&train, &label_set, &cfg, use_transitions).map_err(crf_err)?;
        Ok(Self { inner })
    }

    /// Best labeling and its score.
    fn viterbi(&self, sequence: Vec<Vec<String>>) -> (Vec<String>, f64) {
        let (path, score) = self.inner.viterbi(&items(sequence));
        let labels = self.inner.labels();
        (path.into_iter().map(|i| labels.name(i).to_string()).collect(), score)
    }

    fn log_partition(&self, sequence: Vec<Vec<String>>) -> f64 {
        self.inner.log_partition(&items(sequence))
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().labels().to_vec()
    }

    #[getter]
    fn use_transitions(&self) -> bool {
        self.inner.use_transitions()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        let file = File::create(&path).map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        self.inner.save(file).map_err(crf_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let file = File::open(&path).map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        let inner = crf::CrfModel::load(BufReader::new(file)).map_err(crf_err)?;
        Ok(Self { inner })
    }
}

/// Runs `identification`, `classification` or `pipeline` and returns the
/// JSON report.
#[pyfunction]
#[pyo3(signature = (
    experiment, descript, inscript, embeddings = None, systems = None, identifier = None,
    seed = 42, epsilon = None, folds = 10, scenario_independent = false,
))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    experiment: &str,
    descript: PathBuf,
    inscript: PathBuf,
    embeddings: Option<PathBuf>,
    systems: Option<Vec<String>>,
    identifier: Option<String>,
    seed: u64,
    epsilon: Option<f64>,
    folds: usize,
    scenario_independent: bool,
) -> PyResult<String> {
    let experiment = match experiment {
        "identification" => Experiment::Identification,
        "classification" => Experiment::Classification,
        "pipeline" => Experiment::Pipeline,
        other => return Err(value_err(format!("unknown experiment `{other}`"))),
    };
    let cfg = RunConfig {
        descript: Some(descript),
        inscript: Some(inscript),
        embeddings,
        systems: systems.unwrap_or_default(),
        identifier,
        seed,
        epsilon,
        folds,
        scenario_independent,
        ..RunConfig::default()
    };
    let result = cfg.validate().and_then(|_| run_evaluation(experiment, &cfg));
    match result {
        Ok(report) => Ok(report.to_json()),
        Err(e @ CliError::Io { .. }) => Err(PyIOError::new_err(e.to_string())),
        Err(e) if e.exit_code() == 3 => Err(PyRuntimeError::new_err(e.to_string())),
        Err(e) => Err(value_err(e)),
    }
}

#[pymodule]
fn scriptmap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEmbeddingTable>()?;
    m.add_class::<PyCrfModel>()?;
    m.add_function(wrap_pyfunction!(parse_story_text, m)?)?;
    m.add_function(wrap_pyfunction!(parse_esd_text, m)?)?;
    m.add_function(wrap_pyfunction!(collapse_label, m)?)?;
    m.add_function(wrap_pyfunction!(split_folds, m)?)?;
    m.add_function(wrap_pyfunction!(cosine, m)?)?;
    m.add_function(wrap_pyfunction!(discretize, m)?)?;
    m.add_function(wrap_pyfunction!(prf, m)?)?;
    m.add_function(wrap_pyfunction!(f1, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
