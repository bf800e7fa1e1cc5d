use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scriptmap_core::corpus::parse_stories;
use serde_json::Value;

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic")
}

fn scriptmap(args: &[&str]) -> Output {
    let d = data();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_scriptmap"));
    cmd.args(args);
    for (flag, rel) in [
        ("--descript", "descript"),
        ("--inscript", "inscript"),
        ("--embeddings", "embeddings.txt"),
    ] {
        if !args.contains(&flag) && !args.contains(&"--config") {
            cmd.arg(flag).arg(d.join(rel));
        }
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn system<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["systems"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["name"] == name)
        .unwrap_or_else(|| panic!("no system {name}"))
}

#[test]
fn validate_reports_scenarios() {
    let o = scriptmap(&["validate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("3 scenarios"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("baking_a_cake\t12\t")));
}

#[test]
fn validate_bad_head_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tsv");
    fs::write(
        &bad,
        "#doc s1\n#scenario cake\n#kind story\n1\tI\tI\tPRON\t2\tnsubj\t_\t_\n2\tbaked\tbake\tVERB\t9\troot\t_\tbake\n\n",
    )
    .unwrap();
    let o = scriptmap(&["validate", "--inscript", bad.to_str().unwrap(), "--descript", data().join("descript").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 5"), "{}", stderr(&o));
}

#[test]
fn missing_input_flag_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_scriptmap"))
        .args(["train-map", "--crf-models", "/tmp/unused"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn train_map_and_map_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let models = dir.path().join("models");
    let out = dir.path().join("mapped.tsv");
    let o = scriptmap(&["train-map", "--crf-models", models.to_str().unwrap(), "--epsilon", "0.05"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for s in ["baking_a_cake", "planting_a_tree", "taking_a_bath"] {
        assert!(models.join(format!("{s}.crf.json")).exists());
    }
    let o = scriptmap(&["map", "--crf-models", models.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stories = parse_stories(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(stories.len(), 30);
    let mut labeled = 0;
    for story in &stories {
        for m in &story.mentions {
            let t = &story.sentences[m.sentence][m.token - 1];
            assert!(t.predicted.is_some(), "{} {:?}", story.id, m.position());
            labeled += 1;
        }
    }
    assert!(labeled > 0);
}

#[test]
fn no_seq_model_records_it() {
    let dir = tempfile::tempdir().unwrap();
    let o = scriptmap(&[
        "train-map", "--crf-models", dir.path().to_str().unwrap(), "--no-seq", "--epsilon", "0.05",
        "--scenario", "taking_a_bath",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let model = read_json(&dir.path().join("taking_a_bath.crf.json"));
    assert_eq!(model["use_transitions"], Value::Bool(false), "{model}");
    assert!(!dir.path().join("baking_a_cake.crf.json").exists());
}

#[test]
fn tuning_logs_the_choice() {
    let o = Command::new(env!("CARGO_BIN_EXE_scriptmap"))
        .env("RUST_LOG", "info")
        .args(["tune-epsilon", "--tune-grid", "0.05,0.2", "--scenario", "baking_a_cake", "--descript"])
        .arg(data().join("descript"))
        .arg("--embeddings")
        .arg(data().join("embeddings.txt"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("chose ε = "), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("scenario\tε=0.05\tε=0.2\tchosen\n"));
}

#[test]
fn identify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.json");
    let out = dir.path().join("identified.tsv");
    let o = scriptmap(&["train-identify", "--tree-model", tree.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = scriptmap(&["identify", "--tree-model", tree.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let stories = parse_stories(&fs::read_to_string(&out).unwrap()).unwrap();
    for story in &stories {
        for m in &story.mentions {
            let p = story.sentences[m.sentence][m.token - 1].predicted.as_deref();
            assert!(matches!(p, Some("event" | "non_script")), "{p:?}");
        }
    }
}

/// Lemma baseline recomputed from the raw columns.
fn lemma_oracle(dir: &Path) -> (f64, f64, f64) {
    let mut verbs: BTreeMap<String, HashSet<String>> = BTreeMap::new();
    for entry in fs::read_dir(dir.join("descript")).unwrap() {
        let text = fs::read_to_string(entry.unwrap().path()).unwrap();
        let mut scenario = String::new();
        for line in text.lines() {
            if let Some(s) = line.strip_prefix("#scenario ") {
                scenario = s.to_string();
            } else if !line.starts_with('#') && !line.is_empty() {
                let c: Vec<&str> = line.split('\t').collect();
                if c[3] == "VERB" || c[3] == "AUX" || c[3].starts_with("VB") {
                    verbs.entry(scenario.clone()).or_default().insert(c[2].to_string());
                }
            }
        }
    }
    let mut counts: BTreeMap<String, [f64; 3]> = BTreeMap::new();
    for entry in fs::read_dir(dir.join("inscript")).unwrap() {
        let text = fs::read_to_string(entry.unwrap().path()).unwrap();
        let mut scenario = String::new();
        for line in text.lines() {
            if let Some(s) = line.strip_prefix("#scenario ") {
                scenario = s.to_string();
            } else if !line.starts_with('#') && !line.is_empty() {
                let c: Vec<&str> = line.split('\t').collect();
                if c[7] == "_" {
                    continue;
                }
                let gold = !matches!(c[7], "non_script_event" | "script_related" | "script_evoking");
                let pred = verbs.get(&scenario).is_some_and(|v| v.contains(c[2]));
                let k = counts.entry(scenario.clone()).or_default();
                match (gold, pred) {
                    (true, true) => k[0] += 1.0,
                    (false, true) => k[1] += 1.0,
                    (true, false) => k[2] += 1.0,
                    _ => {}
                }
            }
        }
    }
    let n = counts.len() as f64;
    let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
    for [tp, fp, fn_] in counts.values() {
        let (sp, sr) = (tp / (tp + fp), tp / (tp + fn_));
        p += sp / n;
        r += sr / n;
        f += 2.0 * sp * sr / (sp + sr) / n;
    }
    (p, r, f)
}

#[test]
fn lemma_identification_matches_counting_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let table = dir.path().join("table.txt");
    let o = scriptmap(&[
        "evaluate", "identification", "--systems", "lemma", "--out", out.to_str().unwrap(), "--table",
        table.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&out);
    let lemma = system(&report, "Lemma");
    let (p, r, f) = lemma_oracle(&data());
    let close = |v: &Value, x: f64| (v.as_f64().unwrap() - x).abs() < 1e-12;
    assert!(close(&lemma["macro"]["precision"], p), "{lemma}");
    assert!(close(&lemma["macro"]["recall"], r));
    assert!(close(&lemma["macro"]["f1"], f));
    let text = fs::read_to_string(&table).unwrap();
    assert!(text.lines().any(|l| l.starts_with("Lemma ")), "{text}");
    assert_eq!(report["config"]["seed"], 42);
    assert_eq!(report["config"]["systems"][0], "lemma");
}

#[test]
fn gold_pipeline_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = scriptmap(&[
        "evaluate", "pipeline", "--identifier", "gold", "--systems", "gold", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&out);
    let gold = system(&report, "Gold + Gold");
    for k in ["precision", "recall", "f1"] {
        assert_eq!(gold["macro"][k], 1.0, "{gold}");
    }
}

#[test]
fn scenario_independent_rejects_script_features() {
    let o = scriptmap(&["evaluate", "identification", "--scenario-independent", "--systems", "tree"]);
    assert_eq!(o.status.code(), Some(1));
    let o = scriptmap(&["evaluate", "pipeline", "--scenario-independent", "--identifier", "tree"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("report.json");
    let d = data();
    fs::write(
        &cfg,
        format!(
            "descript = {}\ninscript = {}\nseed = 5\nsystems = majority, gold\nfolds = 3\n",
            d.join("descript").display(),
            d.join("inscript").display()
        ),
    )
    .unwrap();
    let o = scriptmap(&[
        "evaluate", "identification", "--config", cfg.to_str().unwrap(), "--seed", "11", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&out);
    assert_eq!(report["config"]["seed"], 11);
    assert_eq!(report["config"]["folds"], 3);
    assert_eq!(system(&report, "Gold")["macro"]["f1"], 1.0);
    assert_eq!(system(&report, "Majority")["macro"]["recall"], 0.0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let run = || {
        let o = scriptmap(&["evaluate", "classification", "--systems", "crf", "--epsilon", "0.05", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(&out).unwrap()
    };
    let first = run();
    assert_eq!(first, run());
}
