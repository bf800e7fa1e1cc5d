//! Comparison systems: verb-lemma membership for identification, and
//! nearest-ED classification by lemma overlap or embedding cosine.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{pos, Binary, EsdDocument, VerbMention};
use crate::embed::{cosine, mention_vector, EmbeddingTable};

/// Function words dropped from lemma sets when stopword removal is on.
pub const STOPWORDS: [&str; 32] = [
    "a", "an", "the", "and", "or", "but", "of", "to", "in", "on", "at", "for", "with", "from", "by",
    "up", "out", "off", "into", "it", "i", "me", "my", "you", "your", "he", "she", "we", "they",
    "them", "this", "that",
];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig {
    pub remove_stopwords: bool,
}

impl BaselineConfig {
    fn keep(&self, lemma: &str) -> bool {
        !(self.remove_stopwords && STOPWORDS.contains(&lemma.to_lowercase().as_str()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdEntry {
    pub event_type: String,
    pub lemmas: BTreeSet<String>,
    /// Verb plus head nouns, averaged; absent when all words are unknown.
    pub vector: Option<Vec<f64>>,
}

/// Script-event EDs of one scenario in corpus order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioIndex {
    pub entries: Vec<EdEntry>,
    /// Lemmas of all verbal tokens in the scenario's ESDs.
    pub verb_lemmas: BTreeSet<String>,
    cfg: BaselineConfig,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EdIndex {
    scenarios: BTreeMap<String, ScenarioIndex>,
}

impl EdIndex {
    pub fn build<'a>(
        esds: impl IntoIterator<Item = &'a EsdDocument>,
        table: Option<&EmbeddingTable>,
        cfg: &BaselineConfig,
    ) -> EdIndex {
        let mut scenarios: BTreeMap<String, ScenarioIndex> = BTreeMap::new();
        for doc in esds {
            let idx = scenarios.entry(doc.scenario.clone()).or_insert_with(|| ScenarioIndex {
                cfg: cfg.clone(),
                ..ScenarioIndex::default()
            });
            for ed in &doc.eds {
                idx.verb_lemmas
                    .extend(ed.tokens.iter().filter(|t| pos::is_verbal(&t.pos)).map(|t| t.lemma.clone()));
                let Some(event_type) = ed.event_type.event_type() else { continue };
                let lemmas = ed
                    .tokens
                    .iter()
                    .filter(|t| !pos::is_punctuation(&t.pos) && cfg.keep(&t.lemma))
                    .map(|t| t.lemma.clone())
                    .collect();
                let vector = table.and_then(|table| {
                    let verb = ed.main_verb()?;
                    mention_vector(&verb.lemma, ed.head_nouns().map(|t| t.lemma.as_str()), table)
                });
                idx.entries.push(EdEntry {
                    event_type: event_type.to_string(),
                    lemmas,
                    vector,
                });
            }
        }
        EdIndex { scenarios }
    }

    pub fn scenario(&self, id: &str) -> Option<&ScenarioIndex> {
        self.scenarios.get(id)
    }

    pub fn scenarios(&self) -> impl Iterator<Item = (&str, &ScenarioIndex)> {
        self.scenarios.iter().map(|(k, v)| (k.as_str(), v))
    }
}

/// Event iff the verb lemma occurs as a verb in the scenario's ESDs.
pub fn lemma_identify(m: &VerbMention, idx: Option<&ScenarioIndex>) -> Binary {
    match idx {
        Some(idx) if idx.verb_lemmas.contains(&m.lemma) => Binary::Event,
        _ => Binary::NonScript,
    }
}

fn jaccard(a: &BTreeSet<&str>, b: &BTreeSet<String>) -> f64 {
    let inter = a.iter().filter(|x| b.contains(**x)).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Event type of the ED whose lemma set has the highest Jaccard similarity
/// with the verb and its dependents. `None` if the scenario has no EDs.
pub fn overlap_classify<'a>(m: &VerbMention, idx: &'a ScenarioIndex) -> Option<&'a str> {
    let words: BTreeSet<&str> = std::iter::once(m.lemma.as_str())
        .chain(m.dependent_lemmas())
        .filter(|l| idx.cfg.keep(l))
        .collect();
    let mut best: Option<(f64, &EdEntry)> = None;
    for e in &idx.entries {
        let sim = jaccard(&words, &e.lemmas);
        if best.is_none_or(|(b, _)| sim > b) {
            best = Some((sim, e));
        }
    }
    best.map(|(_, e)| e.event_type.as_str())
}

/// Event type of the ED vector closest in cosine to the mention vector.
/// Falls back to [`overlap_classify`] when either side has no vector.
pub fn cosine_classify<'a>(m: &VerbMention, idx: &'a ScenarioIndex, table: &EmbeddingTable) -> Option<&'a str> {
    let Some(v) = mention_vector(&m.lemma, m.dependent_lemmas(), table) else {
        return overlap_classify(m, idx);
    };
    let mut best: Option<(f64, &EdEntry)> = None;
    for e in &idx.entries {
        let Some(ev) = &e.vector else { continue };
        let Ok(sim) = cosine(&v, ev) else { continue };
        if best.is_none_or(|(b, _)| sim > b) {
            best = Some((sim, e));
        }
    }
    match best {
        Some((_, e)) => Some(e.event_type.as_str()),
        None => overlap_classify(m, idx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_esds, Dependent, GoldLabel};

    const ESDS: &str = "#doc e1\n#scenario baking_a_cake\n#kind esd\n\
#ed 1 choose_recipe\n\
1\tlook\tlook\tVERB\t0\troot\t_\t_\n\
2\tup\tup\tADP\t1\tcompound:prt\t_\t_\n\
3\trecipe\trecipe\tNOUN\t1\tobj\t_\t_\n\
\n\
#ed 2 mix_ingredients\n\
1\tmix\tmix\tVERB\t0\troot\t_\t_\n\
2\tingredients\tingredient\tNOUN\t1\tobj\t_\t_\n\
3\t.\t.\tPUNCT\t1\tpunct\t_\t_\n\
\n";

    fn mention(lemma: &str, deps: &[&str]) -> VerbMention {
        VerbMention {
            sentence: 0,
            token: 1,
            lemma: lemma.into(),
            dependents: deps
                .iter()
                .enumerate()
                .map(|(i, d)| Dependent {
                    deprel: "obj".into(),
                    lemma: d.to_string(),
                    token: i + 2,
                })
                .collect(),
            frame: None,
            gold: GoldLabel::Event("x".into()),
        }
    }

    fn index(table: Option<&EmbeddingTable>) -> EdIndex {
        EdIndex::build(&parse_esds(ESDS).unwrap(), table, &BaselineConfig::default())
    }

    #[test]
    fn lemma_membership() {
        let idx = index(None);
        let cake = idx.scenario("baking_a_cake");
        assert_eq!(lemma_identify(&mention("mix", &[]), cake), Binary::Event);
        assert_eq!(lemma_identify(&mention("decide", &[]), cake), Binary::NonScript);
        assert_eq!(lemma_identify(&mention("mix", &[]), None), Binary::NonScript);
        assert_eq!(lemma_identify(&mention("mix", &[]), Some(&ScenarioIndex::default())), Binary::NonScript);
    }

    #[test]
    fn punctuation_is_not_a_lemma() {
        let idx = index(None);
        let e = &idx.scenario("baking_a_cake").unwrap().entries[1];
        assert_eq!(e.lemmas, ["ingredient", "mix"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn overlap_picks_highest_jaccard() {
        let idx = index(None);
        let cake = idx.scenario("baking_a_cake").unwrap();
        // {look, recipe} vs {look, up, recipe}: 2/3; vs {mix, ingredient}: 0.
        assert_eq!(overlap_classify(&mention("look", &["recipe"]), cake), Some("choose_recipe"));
        assert_eq!(overlap_classify(&mention("mix", &["ingredient"]), cake), Some("mix_ingredients"));
        // All zero: first ED wins.
        assert_eq!(overlap_classify(&mention("swim", &[]), cake), Some("choose_recipe"));
        assert_eq!(overlap_classify(&mention("swim", &[]), &ScenarioIndex::default()), None);
    }

    #[test]
    fn stopwords_flag() {
        let cfg = BaselineConfig { remove_stopwords: true };
        let idx = EdIndex::build(&parse_esds(ESDS).unwrap(), None, &cfg);
        let e = &idx.scenario("baking_a_cake").unwrap().entries[0];
        assert!(!e.lemmas.contains("up"));
    }

    fn table() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(2);
        t.insert("look", &[1.0, 0.0]).unwrap();
        t.insert("recipe", &[1.0, 0.2]).unwrap();
        t.insert("mix", &[0.0, 1.0]).unwrap();
        t.insert("ingredient", &[0.1, 1.0]).unwrap();
        t.insert("stir", &[0.05, 1.0]).unwrap();
        t
    }

    #[test]
    fn cosine_nearest_ed() {
        let t = table();
        let idx = index(Some(&t));
        let cake = idx.scenario("baking_a_cake").unwrap();
        assert_eq!(cosine_classify(&mention("stir", &[]), cake, &t), Some("mix_ingredients"));
        // Exactly an ED's vector.
        assert_eq!(cosine_classify(&mention("look", &["recipe"]), cake, &t), Some("choose_recipe"));
        // Unknown words fall back to overlap.
        assert_eq!(cosine_classify(&mention("unknownverb", &["recipe"]), cake, &t), Some("choose_recipe"));
    }

    #[test]
    fn cosine_constructed_pair() {
        // ED vectors at angles with cos 0.9 and 0.1 to the mention's (1, 0).
        let mut t = EmbeddingTable::new(2);
        let s = |c: f64| (1.0 - c * c).sqrt();
        t.insert("probe", &[1.0, 0.0]).unwrap();
        t.insert("mix", &[0.1, s(0.1) as f32]).unwrap();
        t.insert("look", &[0.9, s(0.9) as f32]).unwrap();
        let mut idx = ScenarioIndex::default();
        for verb in ["mix", "look"] {
            idx.entries.push(EdEntry {
                event_type: format!("{verb}_type"),
                lemmas: BTreeSet::new(),
                vector: mention_vector(verb, std::iter::empty(), &t),
            });
        }
        let v = mention_vector("probe", std::iter::empty(), &t).unwrap();
        let sims: Vec<f64> = idx.entries.iter().map(|e| cosine(&v, e.vector.as_ref().unwrap()).unwrap()).collect();
        assert!((sims[0] - 0.1).abs() < 1e-6 && (sims[1] - 0.9).abs() < 1e-6);
        assert_eq!(cosine_classify(&mention("probe", &[]), &idx, &t), Some("look_type"));
    }

    #[test]
    fn cosine_invariant_to_rescaling() {
        let t = table();
        let mut scaled = EmbeddingTable::new(2);
        for w in ["look", "recipe", "mix", "ingredient", "stir"] {
            let v: Vec<f32> = t.get(w).unwrap().iter().map(|&x| x * 4.0).collect();
            scaled.insert(w, &v).unwrap();
        }
        let a = index(Some(&t));
        let b = index(Some(&scaled));
        for m in [mention("stir", &[]), mention("look", &["ingredient"]), mention("mix", &["recipe"])] {
            assert_eq!(
                cosine_classify(&m, a.scenario("baking_a_cake").unwrap(), &t),
                cosine_classify(&m, b.scenario("baking_a_cake").unwrap(), &scaled)
            );
        }
    }
}
