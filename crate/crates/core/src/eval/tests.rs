use super::*;
use crate::corpus::{parse_esds, parse_stories};
use crate::mapping::EpsilonSetting;
use crate::synthetic::{generate, SyntheticConfig};

/// `(verb lemma, label, object noun)` per sentence.
type Clause<'a> = (&'a str, &'a str, Option<&'a str>);

fn story(id: &str, scenario: &str, clauses: &[Clause<'_>]) -> String {
    let mut out = format!("#doc {id}\n#scenario {scenario}\n#kind story\n");
    for (verb, label, obj) in clauses {
        out.push_str(&format!("1\tI\tI\tPRON\t2\tnsubj\t_\t_\n2\t{verb}\t{verb}\tVERB\t0\troot\t_\t{label}\n"));
        if let Some(o) = obj {
            out.push_str(&format!("3\t{o}\t{o}\tNOUN\t2\tobj\t_\t_\n"));
        }
        out.push('\n');
    }
    out
}

/// `(verb, event type, object noun)` per ED.
fn esd(id: &str, scenario: &str, eds: &[(&str, &str, Option<&str>)]) -> String {
    let mut out = format!("#doc {id}\n#scenario {scenario}\n#kind esd\n");
    for (i, (verb, ty, obj)) in eds.iter().enumerate() {
        out.push_str(&format!("#ed {} {ty}\n1\t{verb}\t{verb}\tVERB\t0\troot\t_\t_\n", i + 1));
        if let Some(o) = obj {
            out.push_str(&format!("2\t{o}\t{o}\tNOUN\t1\tobj\t_\t_\n"));
        }
        out.push('\n');
    }
    out
}

fn corpus(esds: &[String], stories: &[String]) -> Corpus {
    Corpus {
        esds: esds.iter().flat_map(|t| parse_esds(t).unwrap()).collect(),
        stories: stories.iter().flat_map(|t| parse_stories(t).unwrap()).collect(),
    }
}

fn fixed_cfg() -> EvalConfig {
    EvalConfig {
        map: MapConfig {
            epsilon: EpsilonSetting::Fixed(0.05),
            ..MapConfig::default()
        },
        ..EvalConfig::default()
    }
}

fn synthetic() -> (Corpus, EmbeddingTable) {
    let data = generate(&SyntheticConfig::default());
    (data.corpus().unwrap(), data.table().unwrap())
}

#[test]
fn gold_and_majority_identification() {
    let (c, t) = synthetic();
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: Some(&t),
        nonaction: &list,
    };
    let report = evaluate_identification(inputs, &[IdentSystem::Gold, IdentSystem::Majority], &fixed_cfg()).unwrap();
    let gold = report.system("Gold").unwrap();
    assert_eq!(gold.macro_avg, Prf::from_pr(1.0, 1.0));
    assert_eq!(gold.micro_accuracy, 1.0);
    let majority = report.system("Majority").unwrap();
    assert_eq!(majority.macro_avg.recall, 0.0);
    assert_eq!(majority.macro_avg.f1, 0.0);
    let total: usize = c.stories.iter().map(|s| s.mentions.len()).sum();
    assert_eq!(gold.mentions, total);
    for s in &gold.scenarios {
        assert_eq!(s.confusion.total(), s.mentions);
    }
}

#[test]
fn lemma_identification_counts() {
    // ESDs cover the event verbs mix and bake plus the distractors get and
    // wait. Stories: 5 event mentions (4 covered), 3 non-event mentions of
    // distractors, 2 other non-event mentions.
    let e = esd(
        "e1",
        "cake",
        &[("mix", "mix", Some("flour")), ("get", "get", None), ("wait", "wait", None), ("bake", "bake", None)],
    );
    let s1 = story(
        "s1",
        "cake",
        &[
            ("mix", "mix", None),
            ("get", "non_script_event", None),
            ("bake", "bake", None),
            ("want", "script_evoking", None),
        ],
    );
    let s2 = story(
        "s2",
        "cake",
        &[
            ("stir", "mix", None),
            ("wait", "non_script_event", None),
            ("mix", "mix", None),
            ("wait", "script_related", None),
            ("bake", "bake", None),
            ("love", "script_related", None),
        ],
    );
    let c = corpus(&[e], &[s1, s2]);
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: None,
        nonaction: &list,
    };
    let report = evaluate_identification(inputs, &[IdentSystem::Lemma], &fixed_cfg()).unwrap();
    let m = report.systems[0].macro_avg;
    // tp = 4, fp = 3, fn = 1
    assert_eq!(m.precision, 4.0 / 7.0);
    assert_eq!(m.recall, 4.0 / 5.0);
    assert_eq!(m.f1, f1(4.0 / 7.0, 4.0 / 5.0));
}

#[test]
fn tree_identification_runs_per_scenario() {
    let (c, t) = synthetic();
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: Some(&t),
        nonaction: &list,
    };
    let report = evaluate_identification(
        inputs,
        &[IdentSystem::Tree, IdentSystem::TreeIndependent, IdentSystem::Lemma],
        &fixed_cfg(),
    )
    .unwrap();
    assert_eq!(report.systems.len(), 3);
    for sys in &report.systems {
        assert_eq!(sys.scenarios.len(), 3);
        assert!(sys.macro_avg.f1 > 0.0 && sys.macro_avg.f1 <= 1.0);
    }
    assert_eq!(report.systems[1].protocol, ExperimentKind::LeaveOneScenarioOut);
}

#[test]
fn gold_classification_is_perfect() {
    let (c, t) = synthetic();
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: Some(&t),
        nonaction: &list,
    };
    let report = evaluate_classification(inputs, &[ClassSystem::Gold, ClassSystem::Lemma, ClassSystem::Cosine], &fixed_cfg())
        .unwrap();
    assert_eq!(report.system("Gold").unwrap().macro_avg, Prf::from_pr(1.0, 1.0));
    for name in ["Lemma", "Cosine"] {
        let m = report.system(name).unwrap().macro_avg;
        assert!(m.f1 > 0.0 && m.f1 <= 1.0, "{name}: {m:?}");
    }
}

#[test]
fn one_type_scenario_is_trivial_for_crf() {
    let esds: Vec<String> = (0..3)
        .map(|i| esd(&format!("e{i}"), "solo", &[("fill", "fill_tub", Some("tub"))]))
        .collect();
    let s = story("s1", "solo", &[("fill", "fill_tub", Some("tub")), ("flood", "fill_tub", None)]);
    let c = corpus(&esds, &[s]);
    let mut t = EmbeddingTable::new(2);
    t.insert("fill", &[0.5, -0.5]).unwrap();
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: Some(&t),
        nonaction: &list,
    };
    let report = evaluate_classification(inputs, &[ClassSystem::Crf], &fixed_cfg()).unwrap();
    assert_eq!(report.systems[0].macro_avg, Prf::from_pr(1.0, 1.0));
}

#[test]
fn unseen_types_are_flagged() {
    let e = esd("e1", "cake", &[("mix", "mix", None)]);
    let s = story("s1", "cake", &[("mix", "mix", None), ("eat", "eat_cake", None)]);
    let c = corpus(&[e], &[s]);
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: None,
        nonaction: &list,
    };
    let report = evaluate_classification(inputs, &[ClassSystem::Lemma], &fixed_cfg()).unwrap();
    let sc = &report.systems[0].scenarios[0];
    assert_eq!(sc.unseen_types, ["eat_cake"]);
    let eat = sc.classes.iter().find(|c| c.label == "eat_cake").unwrap();
    assert_eq!(eat.prf.recall, 0.0);
}

#[test]
fn crf_needs_embeddings() {
    let e = esd("e1", "cake", &[("mix", "mix", None)]);
    let s = story("s1", "cake", &[("mix", "mix", None)]);
    let c = corpus(&[e], &[s]);
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: None,
        nonaction: &list,
    };
    assert!(matches!(
        evaluate_classification(inputs, &[ClassSystem::Crf], &fixed_cfg()),
        Err(EvalError::MissingEmbeddings(_))
    ));
}

/// Alternating A/B events. Every item after the first looks the same, so
/// only label transitions can tell them apart.
fn alternating() -> (Corpus, EmbeddingTable) {
    let seq = |n: usize| -> Vec<(&'static str, &'static str, Option<&'static str>)> {
        (0..n)
            .map(|i| match (i, i % 2) {
                (0, _) => ("start", "step_a", None),
                (_, 0) => ("do", "step_a", None),
                _ => ("do", "step_b", None),
            })
            .collect()
    };
    let esds: Vec<String> = (0..6).map(|i| esd(&format!("e{i}"), "alt", &seq(5 + i % 2))).collect();
    let stories: Vec<String> = (0..4)
        .map(|i| {
            let clauses: Vec<Clause<'_>> = seq(5 + i % 2).into_iter().collect();
            story(&format!("s{i}"), "alt", &clauses)
        })
        .collect();
    let mut t = EmbeddingTable::new(2);
    t.insert("start", &[0.5, 0.5]).unwrap();
    t.insert("do", &[-0.5, 0.5]).unwrap();
    (corpus(&esds, &stories), t)
}

#[test]
fn transitions_help_on_alternating_grammar() {
    let (c, t) = alternating();
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: Some(&t),
        nonaction: &list,
    };
    let report = evaluate_classification(inputs, &[ClassSystem::Crf, ClassSystem::CrfNoSeq], &fixed_cfg()).unwrap();
    let with = report.system("CRF").unwrap();
    let without = report.system("CRF, no seq.").unwrap();
    assert!(with.macro_avg.f1 > without.macro_avg.f1, "{:?} vs {:?}", with.macro_avg, without.macro_avg);
    assert_eq!(with.micro_accuracy, 1.0);
}

#[test]
fn pipeline_with_gold_components() {
    let (c, t) = synthetic();
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: Some(&t),
        nonaction: &list,
    };
    let report = evaluate_pipeline(inputs, IdentSystem::Gold, &[ClassSystem::Gold], &fixed_cfg()).unwrap();
    assert_eq!(report.systems[0].name, "Gold + Gold");
    assert_eq!(report.systems[0].macro_avg, Prf::from_pr(1.0, 1.0));
}

#[test]
fn pipeline_recall_follows_identification() {
    // One event type; one of four event mentions uses a verb absent from
    // the ESDs, so lemma identification recall is 3/4.
    let e = esd("e1", "tub", &[("fill", "fill_tub", Some("tub"))]);
    let s = story(
        "s1",
        "tub",
        &[
            ("fill", "fill_tub", None),
            ("fill", "fill_tub", None),
            ("flood", "fill_tub", None),
            ("fill", "fill_tub", None),
            ("love", "script_related", None),
        ],
    );
    let c = corpus(&[e], &[s]);
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: None,
        nonaction: &list,
    };
    let report = evaluate_pipeline(inputs, IdentSystem::Lemma, &[ClassSystem::Gold], &fixed_cfg()).unwrap();
    let m = report.systems[0].macro_avg;
    assert_eq!(m.recall, 0.75);
    assert_eq!(m.precision, 1.0);
    let cm = &report.systems[0].scenarios[0].confusion;
    assert_eq!(cm.count("fill_tub", ABSENT), 1);
    assert_eq!(cm.total(), 5);
}

#[test]
fn false_identifications_are_false_positives() {
    let e = esd("e1", "tub", &[("fill", "fill_tub", None), ("wait", "non_script_event", None)]);
    let s = story("s1", "tub", &[("fill", "fill_tub", None), ("fill", "non_script_event", None)]);
    let c = corpus(&[e], &[s]);
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: None,
        nonaction: &list,
    };
    let report = evaluate_pipeline(inputs, IdentSystem::Lemma, &[ClassSystem::Lemma], &fixed_cfg()).unwrap();
    let m = report.systems[0].macro_avg;
    assert_eq!(m.precision, 0.5);
    assert_eq!(m.recall, 1.0);
}

#[test]
fn pipeline_report_is_deterministic() {
    let (c, t) = synthetic();
    let list = NonActionList::default();
    let inputs = EvalInputs {
        corpus: &c,
        table: Some(&t),
        nonaction: &list,
    };
    let systems = [ClassSystem::Lemma, ClassSystem::Cosine, ClassSystem::Crf];
    let a = evaluate_pipeline(inputs, IdentSystem::Tree, &systems, &fixed_cfg()).unwrap();
    let b = evaluate_pipeline(inputs, IdentSystem::Tree, &systems, &fixed_cfg()).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.systems.len(), 3);
    assert_eq!(a.systems[2].name, "Decision tree + CRF");
}
