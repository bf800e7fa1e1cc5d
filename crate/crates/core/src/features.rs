//! Observation columns for the CRF and per-scenario lexical statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use log::warn;
use thiserror::Error;

use crate::corpus::{pos, EsdDocument, EventDescription, VerbMention, ABSENT};
use crate::embed::{discretize, mention_vector, DiscretizationConfig, EmbeddingTable};

pub const DOBJ_RELATIONS: [&str; 2] = ["dobj", "obj"];
pub const IOBJ_RELATIONS: [&str; 1] = ["iobj"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("event description {index} has no verb")]
    NoVerb { index: usize },
}

/// Lexical content of an event mention before ε-binning.
#[derive(Debug, Clone, PartialEq)]
pub struct RawItem {
    pub verb: String,
    pub dobj: Option<String>,
    pub iobj: Option<String>,
    pub vector: Option<Vec<f64>>,
}

/// Nominal feature columns: verb, direct object, indirect object, then one
/// bin per embedding dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservationItem {
    pub columns: Vec<String>,
}

impl ObservationItem {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
        }
    }
}

pub fn raw_from_ed(ed: &EventDescription, table: &EmbeddingTable) -> Result<RawItem, FeatureError> {
    let verb = ed
        .main_verb()
        .ok_or(FeatureError::NoVerb { index: ed.index })?;
    let nouns = ed.head_nouns().map(|t| t.lemma.as_str());
    Ok(RawItem {
        verb: verb.lemma.clone(),
        dobj: ed.verb_dependent(&DOBJ_RELATIONS).map(|t| t.lemma.clone()),
        iobj: ed.verb_dependent(&IOBJ_RELATIONS).map(|t| t.lemma.clone()),
        vector: mention_vector(&verb.lemma, nouns, table),
    })
}

pub fn raw_from_mention(m: &VerbMention, table: &EmbeddingTable) -> RawItem {
    RawItem {
        verb: m.lemma.clone(),
        dobj: m.first_dependent(&DOBJ_RELATIONS).map(|d| d.lemma.clone()),
        iobj: m.first_dependent(&IOBJ_RELATIONS).map(|d| d.lemma.clone()),
        vector: mention_vector(&m.lemma, m.dependent_lemmas(), table),
    }
}

pub fn observe(raw: &RawItem, dim: usize, cfg: &DiscretizationConfig) -> ObservationItem {
    let lexical = [
        raw.verb.clone(),
        raw.dobj.clone().unwrap_or_else(|| ABSENT.to_string()),
        raw.iobj.clone().unwrap_or_else(|| ABSENT.to_string()),
    ];
    let bins: Vec<String> = match &raw.vector {
        Some(v) => discretize(v, cfg).iter().map(|b| b.as_str().to_string()).collect(),
        None => vec![ABSENT.to_string(); dim],
    };
    ObservationItem {
        columns: lexical.into_iter().chain(bins).collect(),
    }
}

pub fn observe_ed(
    ed: &EventDescription,
    table: &EmbeddingTable,
    cfg: &DiscretizationConfig,
) -> Result<ObservationItem, FeatureError> {
    Ok(observe(&raw_from_ed(ed, table)?, table.dim(), cfg))
}

pub fn observe_mention(
    m: &VerbMention,
    table: &EmbeddingTable,
    cfg: &DiscretizationConfig,
) -> ObservationItem {
    observe(&raw_from_mention(m, table), table.dim(), cfg)
}

/// Term statistics of one scenario, with all of its ESDs treated as a
/// single document.
#[derive(Debug, Clone)]
pub struct ScenarioStats {
    pub scenario: String,
    /// Lemmas of verbal tokens in the scenario's ESDs.
    pub verb_lemmas: BTreeSet<String>,
    pub tf: HashMap<String, usize>,
    pub df: Arc<HashMap<String, usize>>,
    pub n_scenarios: usize,
}

impl ScenarioStats {
    pub fn tfidf<'a>(&self, lemmas: impl IntoIterator<Item = &'a str>) -> f64 {
        tfidf(lemmas, self)
    }

    pub fn is_empty(&self) -> bool {
        self.tf.is_empty()
    }
}

/// Counts lemmas over all ESDs of each scenario.
pub fn build_scenario_stats<'a>(
    descript: impl IntoIterator<Item = &'a EsdDocument>,
) -> BTreeMap<String, ScenarioStats> {
    let mut tf: BTreeMap<String, HashMap<String, usize>> = BTreeMap::new();
    let mut verbs: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for doc in descript {
        let counts = tf.entry(doc.scenario.clone()).or_default();
        let verb_set = verbs.entry(doc.scenario.clone()).or_default();
        for tok in doc.eds.iter().flat_map(|ed| &ed.tokens) {
            *counts.entry(tok.lemma.clone()).or_default() += 1;
            if pos::is_verbal(&tok.pos) {
                verb_set.insert(tok.lemma.clone());
            }
        }
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    for counts in tf.values() {
        for lemma in counts.keys() {
            *df.entry(lemma.clone()).or_default() += 1;
        }
    }
    let df = Arc::new(df);
    let n = tf.len();
    tf.into_iter()
        .map(|(scenario, counts)| {
            if counts.is_empty() {
                warn!("scenario `{scenario}` has no ESD tokens; its statistics are empty");
            }
            let stats = ScenarioStats {
                verb_lemmas: verbs.remove(&scenario).unwrap_or_default(),
                scenario: scenario.clone(),
                tf: counts,
                df: Arc::clone(&df),
                n_scenarios: n,
            };
            (scenario, stats)
        })
        .collect()
}

/// Σ tf(lemma) · ln(N / df(lemma)); lemmas with df = 0 contribute nothing.
pub fn tfidf<'a>(lemmas: impl IntoIterator<Item = &'a str>, stats: &ScenarioStats) -> f64 {
    lemmas
        .into_iter()
        .map(|lemma| {
            let df = stats.df.get(lemma).copied().unwrap_or(0);
            if df == 0 {
                return 0.0;
            }
            let tf = stats.tf.get(lemma).copied().unwrap_or(0) as f64;
            tf * (stats.n_scenarios as f64 / df as f64).ln()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::corpus::{parse_esds, parse_stories};

    fn table() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(2);
        t.insert("look", &[0.5, -0.5]).unwrap();
        t.insert("recipe", &[0.5, 0.4]).unwrap();
        t.insert("mix", &[0.3, 0.0]).unwrap();
        t.insert("ingredient", &[0.0, 0.3]).unwrap();
        t.insert("bowl", &[-0.3, 0.0]).unwrap();
        t.insert("cake", &[0.0, -0.9]).unwrap();
        t
    }

    fn esd(scenario: &str, id: &str, eds: &[(&str, &str)]) -> String {
        let mut s = format!("#doc {id}\n#scenario {scenario}\n#kind esd\n");
        for (i, (label, body)) in eds.iter().enumerate() {
            s.push_str(&format!("#ed {} {label}\n{body}\n", i + 1));
        }
        s
    }

    const GET_OUT: &str = "1\tget\tget\tVERB\t0\troot\t_\t_\n\
2\tingredients\tingredient\tNOUN\t1\tobj\t_\t_\n\
3\tout\tout\tADP\t1\tcompound:prt\t_\t_\n";
    const MIX_IN_BOWL: &str = "1\tmix\tmix\tVERB\t0\troot\t_\t_\n\
2\tthe\tthe\tDET\t3\tdet\t_\t_\n\
3\tingredients\tingredient\tNOUN\t1\tobj\t_\t_\n\
4\tin\tin\tADP\t6\tcase\t_\t_\n\
5\ta\ta\tDET\t6\tdet\t_\t_\n\
6\tbowl\tbowl\tNOUN\t1\tobl\t_\t_\n";

    #[test]
    fn ed_lexical_columns() {
        let docs = parse_esds(&esd("cake", "e1", &[("get_ingredients", GET_OUT)])).unwrap();
        let cfg = DiscretizationConfig::new(0.1).unwrap();
        let item = observe_ed(&docs[0].eds[0], &table(), &cfg).unwrap();
        assert_eq!(&item.columns[..3], ["get", "ingredient", "_"]);
        // "get" is OOV, so the vector is the ingredient vector (0, 0.3).
        assert_eq!(&item.columns[3..], ["mid", "high"]);
    }

    #[test]
    fn ed_all_oov_has_absent_bins() {
        let mut t = EmbeddingTable::new(3);
        t.insert("zzz", &[1.0, 1.0, 1.0]).unwrap();
        let docs = parse_esds(&esd("cake", "e1", &[("get_ingredients", GET_OUT)])).unwrap();
        let cfg = DiscretizationConfig::new(0.1).unwrap();
        let item = observe_ed(&docs[0].eds[0], &t, &cfg).unwrap();
        assert_eq!(item.columns.len(), 6);
        assert!(item.columns[3..].iter().all(|c| c == "_"));
    }

    #[test]
    fn ed_head_nouns_feed_average() {
        let docs = parse_esds(&esd("cake", "e1", &[("mix_ingredients", MIX_IN_BOWL)])).unwrap();
        let raw = raw_from_ed(&docs[0].eds[0], &table()).unwrap();
        assert_eq!(raw.verb, "mix");
        let v = raw.vector.unwrap();
        // (2·(0.3, 0) + (0, 0.3) + (−0.3, 0)) / 4
        assert!((v[0] - 0.075).abs() < 1e-7 && (v[1] - 0.075).abs() < 1e-7, "{v:?}");
    }

    #[test]
    fn ed_without_verb() {
        let body = "1\tcake\tcake\tNOUN\t0\troot\t_\t_\n";
        let docs = parse_esds(&esd("cake", "e1", &[("eat", body)])).unwrap();
        let cfg = DiscretizationConfig::new(0.1).unwrap();
        assert_eq!(
            observe_ed(&docs[0].eds[0], &table(), &cfg),
            Err(FeatureError::NoVerb { index: 1 })
        );
    }

    fn story(body: &str) -> crate::corpus::Story {
        let text = format!("#doc s\n#scenario cake\n#kind story\n{body}\n");
        parse_stories(&text).unwrap().remove(0)
    }

    #[test]
    fn mention_columns() {
        let s = story(
            "1\tI\tI\tPRON\t2\tnsubj\t_\t_\n\
2\tlooked\tlook\tVERB\t0\troot\t_\tchoose_recipe\n\
3\tup\tup\tADP\t2\tcompound:prt\t_\t_\n\
4\tthe\tthe\tDET\t5\tdet\t_\t_\n\
5\trecipe\trecipe\tNOUN\t2\tobj\t_\t_\n",
        );
        let cfg = DiscretizationConfig::new(0.1).unwrap();
        let item = observe_mention(&s.mentions[0], &table(), &cfg);
        assert_eq!(&item.columns[..3], ["look", "recipe", "_"]);
        // avg(2·look, recipe) = (0.5, −0.2); "I" is OOV.
        assert_eq!(&item.columns[3..], ["high", "low"]);
    }

    #[test]
    fn mention_with_resolved_pronoun() {
        let s = story(
            "1\tcake\tcake\tNOUN\t2\tnsubj\tc1\t_\n\
2\tcooled\tcool\tVERB\t0\troot\t_\tcool\n\
\n\
1\tI\tI\tPRON\t2\tnsubj\t_\t_\n\
2\tate\teat\tVERB\t0\troot\t_\teat\n\
3\tit\tit\tPRON\t2\tobj\tc1\t_\n",
        );
        let (s, _) = crate::corpus::resolve_pronouns(&s);
        let cfg = DiscretizationConfig::new(0.1).unwrap();
        let item = observe_mention(&s.mentions[1], &table(), &cfg);
        assert_eq!(item.columns[1], "cake");
    }

    #[test]
    fn mention_without_dependents_uses_verb_vector() {
        let s = story("1\tmixed\tmix\tVERB\t0\troot\t_\tmix\n");
        let raw = raw_from_mention(&s.mentions[0], &table());
        assert_eq!((raw.dobj.as_deref(), raw.iobj.as_deref()), (None, None));
        assert_eq!(raw.vector.unwrap(), vec![f64::from(0.3f32), 0.0]);
    }

    fn mix_stats() -> BTreeMap<String, ScenarioStats> {
        let mix = "1\tmix\tmix\tVERB\t0\troot\t_\t_\n";
        let wash = "1\twash\twash\tVERB\t0\troot\t_\t_\n";
        let pour = "1\tpour\tpour\tVERB\t0\troot\t_\t_\n";
        let mut text = esd("A", "a1", &[("mix", mix), ("mix", mix), ("mix", mix), ("pour", pour)]);
        text.push_str(&esd("A", "a2", &[("mix", mix), ("mix", mix)]));
        text.push_str(&esd("B", "b1", &[("wash", wash), ("pour", pour)]));
        build_scenario_stats(&parse_esds(&text).unwrap())
    }

    #[test]
    fn counting() {
        let stats = mix_stats();
        let a = &stats["A"];
        assert_eq!(a.tf["mix"], 5);
        assert_eq!(a.df["mix"], 1);
        assert_eq!(a.df["pour"], 2);
        assert_eq!(a.n_scenarios, 2);
        assert!(a.verb_lemmas.contains("mix") && !a.verb_lemmas.contains("wash"));
    }

    #[test]
    fn tfidf_values() {
        let stats = mix_stats();
        let a = &stats["A"];
        // 5 · ln(2/1)
        assert!((tfidf(["mix"], a) - 3.465_735_902_799_726_5).abs() < 1e-12);
        assert_eq!(tfidf(["pour"], a), 0.0);
        assert_eq!(tfidf(["zebra"], a), 0.0);
        assert_eq!(tfidf(["wash"], a), 0.0); // df = 1 but tf in A is 0
        assert!((tfidf(["wash"], &stats["B"]) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_scenario_stats() {
        let stats = build_scenario_stats(&[EsdDocument {
            scenario: "empty".into(),
            id: "x".into(),
            eds: vec![],
        }]);
        assert!(stats["empty"].is_empty());
    }

    proptest! {
        #[test]
        fn tfidf_additive_and_nonnegative(
            picks in prop::collection::vec(prop::sample::select(vec!["mix", "pour", "wash", "zebra"]), 0..8),
        ) {
            let stats = mix_stats();
            let a = &stats["A"];
            let total = tfidf(picks.iter().copied(), a);
            let parts: f64 = picks.iter().map(|p| tfidf([*p], a)).sum();
            prop_assert!(total >= 0.0);
            prop_assert!((total - parts).abs() < 1e-9);
        }
    }
}
