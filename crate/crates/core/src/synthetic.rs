//! Deterministic toy corpus: three scenarios with ESDs, annotated stories
//! and clustered word vectors. Used by tests and shipped under `data/`.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{parse_esds, parse_stories, Corpus, CorpusError};
use crate::embed::{EmbedError, EmbeddingTable};

struct EventSpec {
    event_type: &'static str,
    verbs: &'static [&'static str],
    /// Paraphrases used in stories but never in ESDs.
    story_verbs: &'static [&'static str],
    nouns: &'static [&'static str],
}

struct ScenarioSpec {
    id: &'static str,
    events: &'static [EventSpec],
}

const fn ev(
    event_type: &'static str,
    verbs: &'static [&'static str],
    story_verbs: &'static [&'static str],
    nouns: &'static [&'static str],
) -> EventSpec {
    EventSpec {
        event_type,
        verbs,
        story_verbs,
        nouns,
    }
}

const SCENARIOS: [ScenarioSpec; 3] = [
    ScenarioSpec {
        id: "baking_a_cake",
        events: &[
            ev("choose_recipe", &["choose", "pick"], &["select"], &["recipe"]),
            ev("get_ingredients", &["get", "gather", "buy"], &["fetch"], &["ingredient", "flour", "egg"]),
            ev("mix_ingredients", &["mix", "stir", "combine"], &["blend"], &["batter", "dough"]),
            ev("put_cake_oven", &["put", "place", "bake"], &["slide"], &["cake", "pan"]),
            ev("take_out_oven", &["take", "remove"], &["pull"], &["tray"]),
        ],
    },
    ScenarioSpec {
        id: "taking_a_bath",
        events: &[
            ev("turn_water_on", &["turn", "open"], &["start"], &["tap", "faucet"]),
            ev("fill_tub", &["fill"], &["flood"], &["tub", "bathtub"]),
            ev("undress", &["remove", "undress"], &["strip"], &["clothes", "shirt"]),
            ev("wash", &["wash", "scrub", "soap"], &["rinse"], &["body", "hair"]),
            ev("dry_off", &["dry", "towel"], &["pat"], &["skin", "towel"]),
        ],
    },
    ScenarioSpec {
        id: "planting_a_tree",
        events: &[
            ev("choose_spot", &["choose", "find", "pick"], &["locate"], &["spot", "place"]),
            ev("dig_hole", &["dig", "shovel"], &["excavate"], &["hole", "ground"]),
            ev("put_tree_in", &["put", "place", "plant"], &["set"], &["tree", "sapling"]),
            ev("cover_roots", &["cover", "fill"], &["bury"], &["root", "soil"]),
            ev("water_tree", &["water", "soak"], &["sprinkle"], &["tree", "soil"]),
        ],
    },
];

/// Non-script verbs and the adjectives used as their complements.
const FILLER_WORDS: [&str; 12] = [
    "be", "want", "decide", "wait", "like", "love", "get", "easy", "ready", "tired", "happy", "until",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub esds_per_scenario: usize,
    pub stories_per_scenario: usize,
    pub dim: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            esds_per_scenario: 12,
            stories_per_scenario: 10,
            dim: 8,
        }
    }
}

/// File contents of a generated corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    /// (scenario, TSV text)
    pub esds: Vec<(String, String)>,
    pub stories: Vec<(String, String)>,
    /// Word vectors in `count dim` text format.
    pub embeddings: String,
}

impl SyntheticData {
    pub fn corpus(&self) -> Result<Corpus, CorpusError> {
        let mut corpus = Corpus::default();
        for (_, text) in &self.esds {
            corpus.esds.extend(parse_esds(text)?);
        }
        for (_, text) in &self.stories {
            corpus.stories.extend(parse_stories(text)?);
        }
        Ok(corpus)
    }

    pub fn table(&self) -> Result<EmbeddingTable, EmbedError> {
        EmbeddingTable::load(self.embeddings.as_bytes())
    }

    /// Writes `descript/<scenario>.tsv`, `inscript/<scenario>.tsv` and
    /// `embeddings.txt` under `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        for (sub, files) in [("descript", &self.esds), ("inscript", &self.stories)] {
            let d = dir.join(sub);
            std::fs::create_dir_all(&d)?;
            for (scenario, text) in files {
                std::fs::write(d.join(format!("{scenario}.tsv")), text)?;
            }
        }
        std::fs::write(dir.join("embeddings.txt"), &self.embeddings)
    }
}

fn past(lemma: &str) -> String {
    match lemma {
        "be" => "was".into(),
        "get" => "got".into(),
        "take" => "took".into(),
        "dig" => "dug".into(),
        "find" => "found".into(),
        "choose" => "chose".into(),
        "buy" => "bought".into(),
        "put" | "set" => lemma.into(),
        _ if lemma.ends_with('e') => format!("{lemma}d"),
        _ => format!("{lemma}ed"),
    }
}

/// Builds sentences as TSV token lines.
struct Sentence {
    lines: Vec<String>,
}

impl Sentence {
    fn new() -> Self {
        Self { lines: Vec::new() }
    }

    #[allow(clippy::too_many_arguments)]
    fn tok(&mut self, surface: &str, lemma: &str, pos: &str, head: usize, deprel: &str, coref: &str, label: &str) {
        let i = self.lines.len() + 1;
        self.lines
            .push(format!("{i}\t{surface}\t{lemma}\t{pos}\t{head}\t{deprel}\t{coref}\t{label}"));
    }

    fn render(&self, out: &mut String) {
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out.push('\n');
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Irwin–Hall approximation; adequate for toy vectors.
    (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0
}

fn vectors(cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> String {
    let mut words: Vec<(String, Vec<f64>)> = Vec::new();
    let mut push = |word: &str, v: Vec<f64>| {
        if !words.iter().any(|(w, _)| w == word) {
            words.push((word.to_string(), v));
        }
    };
    let scale = 0.5;
    for sc in &SCENARIOS {
        for e in sc.events {
            let center: Vec<f64> = (0..cfg.dim).map(|_| gaussian(rng) * scale).collect();
            for w in e.verbs.iter().chain(e.story_verbs).chain(e.nouns) {
                let v = center.iter().map(|c| c + gaussian(rng) * scale * 0.3).collect();
                push(w, v);
            }
        }
    }
    for w in FILLER_WORDS {
        let v = (0..cfg.dim).map(|_| gaussian(rng) * scale).collect();
        push(w, v);
    }
    let mut out = format!("{} {}\n", words.len(), cfg.dim);
    for (w, v) in words {
        out.push_str(&w);
        for x in v {
            write!(out, " {x:.4}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn esd_file(sc: &ScenarioSpec, cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    for n in 0..cfg.esds_per_scenario {
        writeln!(out, "#doc {}_esd{n:02}\n#scenario {}\n#kind esd", sc.id, sc.id).unwrap();
        let mut idx = 1;
        for (k, e) in sc.events.iter().enumerate() {
            if k > 0 && rng.random_bool(0.15) {
                continue;
            }
            writeln!(out, "#ed {idx} {}", e.event_type).unwrap();
            let verb = e.verbs.choose(rng).unwrap();
            let noun = e.nouns.choose(rng).unwrap();
            let mut s = Sentence::new();
            s.tok(verb, verb, "VERB", 0, "root", "_", "_");
            if rng.random_bool(0.5) {
                s.tok("the", "the", "DET", 3, "det", "_", "_");
                s.tok(noun, noun, "NOUN", 1, "obj", "_", "_");
            } else {
                s.tok(noun, noun, "NOUN", 1, "obj", "_", "_");
            }
            s.render(&mut out);
            idx += 1;
            if rng.random_bool(0.08) {
                writeln!(out, "#ed {idx} non_script_event").unwrap();
                let mut s = Sentence::new();
                s.tok("wait", "wait", "VERB", 0, "root", "_", "_");
                s.render(&mut out);
                idx += 1;
            }
        }
    }
    out
}

fn filler(rng: &mut ChaCha8Rng, out: &mut String) {
    let mut s = Sentence::new();
    match rng.random_range(0..5) {
        0 => {
            s.tok("It", "it", "PRON", 3, "nsubj", "_", "_");
            s.tok("was", "be", "AUX", 3, "cop", "_", "non_script_event");
            s.tok("easy", "easy", "ADJ", 0, "root", "_", "_");
        }
        1 => {
            s.tok("I", "I", "PRON", 2, "nsubj", "_", "_");
            s.tok("waited", "wait", "VERB", 0, "root", "_", "non_script_event");
            s.tok("until", "until", "SCONJ", 6, "mark", "_", "_");
            s.tok("it", "it", "PRON", 6, "nsubj", "_", "_");
            s.tok("was", "be", "AUX", 6, "cop", "_", "non_script_event");
            s.tok("ready", "ready", "ADJ", 2, "advcl", "_", "_");
        }
        2 => {
            s.tok("I", "I", "PRON", 2, "nsubj", "_", "_");
            s.tok("got", "get", "VERB", 0, "root", "_", "non_script_event");
            s.tok("tired", "tired", "ADJ", 2, "xcomp", "_", "_");
        }
        3 => {
            s.tok("I", "I", "PRON", 2, "nsubj", "_", "_");
            s.tok("loved", "love", "VERB", 0, "root", "_", "script_related");
            s.tok("it", "it", "PRON", 2, "obj", "_", "_");
        }
        _ => {
            s.tok("I", "I", "PRON", 2, "nsubj", "_", "_");
            s.tok("was", "be", "AUX", 3, "cop", "_", "script_related");
            s.tok("happy", "happy", "ADJ", 0, "root", "_", "_");
        }
    }
    s.render(out);
}

fn story_file(sc: &ScenarioSpec, cfg: &SyntheticConfig, rng: &mut ChaCha8Rng) -> String {
    let mut out = String::new();
    for n in 0..cfg.stories_per_scenario {
        writeln!(out, "#doc {}_story{n:02}\n#scenario {}\n#kind story", sc.id, sc.id).unwrap();
        let mut chain = 0usize;
        if rng.random_bool(0.7) {
            let mut s = Sentence::new();
            s.tok("I", "I", "PRON", 2, "nsubj", "_", "_");
            s.tok("decided", "decide", "VERB", 0, "root", "_", "script_evoking");
            s.tok("to", "to", "PART", 4, "mark", "_", "_");
            s.tok("start", "start", "VERB", 2, "xcomp", "_", "_");
            s.render(&mut out);
        }
        let mut last_noun: Option<String> = None;
        for e in sc.events {
            if rng.random_bool(0.15) {
                continue;
            }
            let verb = if rng.random_bool(0.2) {
                e.story_verbs.choose(rng).unwrap()
            } else {
                e.verbs.choose(rng).unwrap()
            };
            let mut s = Sentence::new();
            s.tok("I", "I", "PRON", 2, "nsubj", "_", "_");
            s.tok(&past(verb), verb, "VERB", 0, "root", "_", e.event_type);
            match last_noun.take() {
                Some(coref) if rng.random_bool(0.25) => {
                    s.tok("it", "it", "PRON", 2, "obj", &coref, "_");
                }
                _ => {
                    chain += 1;
                    let noun = e.nouns.choose(rng).unwrap();
                    let id = format!("c{chain}");
                    s.tok("the", "the", "DET", 4, "det", "_", "_");
                    s.tok(noun, noun, "NOUN", 2, "obj", &id, "_");
                    last_noun = Some(id);
                }
            }
            s.tok(".", ".", "PUNCT", 2, "punct", "_", "_");
            s.render(&mut out);
            if rng.random_bool(0.35) {
                filler(rng, &mut out);
            }
        }
    }
    out
}

pub fn generate(cfg: &SyntheticConfig) -> SyntheticData {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let embeddings = vectors(cfg, &mut rng);
    let mut esds = Vec::new();
    let mut stories = Vec::new();
    for sc in &SCENARIOS {
        esds.push((sc.id.to_string(), esd_file(sc, cfg, &mut rng)));
        stories.push((sc.id.to_string(), story_file(sc, cfg, &mut rng)));
    }
    SyntheticData {
        esds,
        stories,
        embeddings,
    }
}
