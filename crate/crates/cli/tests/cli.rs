use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use cefr_onto::corpus::{CorpusFormat, CorpusItem, LabeledCorpus};
use cefr_onto::dlgen::parse_ontology;
use cefr_onto::fixture;
use cefr_onto::textmetrics::Lexicons;
use cefr_onto::LevelLabel;
use serde_json::{json, Value};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_cefr-onto");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn cefr-onto")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn cefr-onto");
    // the process may exit before reading (argument errors)
    let _ = child.stdin.take().unwrap().write_all(input.as_bytes());
    child.wait_with_output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn write_corpus(dir: &Path, name: &str, corpus: &LabeledCorpus) -> PathBuf {
    let p = dir.join(name);
    corpus.save(&p, CorpusFormat::Csv).unwrap();
    p
}

fn fixture_corpus(dir: &Path, per_level: usize) -> PathBuf {
    let corpus = fixture::generate(per_level, fixture::DEFAULT_SEED, Lexicons::bundled());
    write_corpus(dir, "fixture.csv", &corpus)
}

/// A1 and C2 fixture texts only.
fn two_level_corpus(dir: &Path) -> PathBuf {
    let mut corpus = fixture::generate(60, fixture::DEFAULT_SEED, Lexicons::bundled());
    corpus.items.retain(|it| matches!(it.label, LevelLabel::A1 | LevelLabel::C2));
    write_corpus(dir, "two_level.csv", &corpus)
}

fn count_nodes(node: &Value) -> usize {
    1 + node["children"].as_array().map_or(0, |c| c.iter().map(count_nodes).sum())
}

fn classify_lines(out: &Output) -> Vec<Value> {
    stdout(out).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn features_two_rows() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("two.csv");
    fs::write(&corpus, "text,label\n\"The cat sat on the mat.\",A1\n\"Economic policy shifted considerably.\",C1\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["features", "--corpus", s(&corpus), "--out", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let m: usize = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("m = "))
        .and_then(|rest| rest.split(',').next())
        .and_then(|m| m.parse().ok())
        .expect("m printed");
    assert!(stdout(&o).contains("N = 2"));

    let mut rdr = csv::Reader::from_path(out.join("features.csv")).unwrap();
    assert_eq!(rdr.headers().unwrap().len(), m + 1);
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.len() == m + 1));
    assert_eq!(&rows[1][m], "C1");
}

#[test]
fn missing_corpus_names_path() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nowhere").join("corpus.csv");
    let o = run(&["features", "--corpus", s(&missing), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(s(&missing)), "{}", stderr(&o));
}

#[test]
fn jsonl_flag_on_csv_reports_line_one() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("c.csv");
    fs::write(&corpus, "text,label\n\"Hello there.\",A1\n").unwrap();
    let o = run(&["features", "--corpus", s(&corpus), "--format", "jsonl", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn small_corpus_gives_single_leaf_and_exit_3() {
    let dir = TempDir::new().unwrap();
    let mut corpus = fixture::generate(7, 1, Lexicons::bundled());
    corpus.items.truncate(40);
    let path = write_corpus(dir.path(), "forty.csv", &corpus);
    let out = dir.path().join("out");
    let o = run(&["train", "--corpus", s(&path), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    let tree = read_json(out.join("tree.json"));
    assert_eq!(tree["root"]["kind"], "leaf");
    assert!(out.join("eval.json").exists());
}

#[test]
fn depth_one_tree_has_at_most_three_nodes() {
    let dir = TempDir::new().unwrap();
    let corpus = fixture_corpus(dir.path(), 30);
    let o = run(&["train", "--corpus", s(&corpus), "--max-depth", "1", "--min-branch", "5", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tree = read_json(dir.path().join("tree.json"));
    assert!(count_nodes(&tree["root"]) <= 3);
}

#[test]
fn separable_box_ontology_and_classify() {
    let dir = TempDir::new().unwrap();
    let corpus = two_level_corpus(dir.path());
    let out = s(dir.path());
    let o = run(&["train", "--corpus", s(&corpus), "--min-branch", "10", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let eval = read_json(dir.path().join("eval.json"));
    assert_eq!(eval["accuracy"], 1.0);

    let o = run(&["ontology", "--mode", "box", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let omn = fs::read_to_string(dir.path().join("ontology.omn")).unwrap();
    let classes: Vec<&str> = omn
        .lines()
        .filter_map(|l| l.strip_prefix("Class: "))
        .filter(|c| c.ends_with("LevelUtterance"))
        .collect();
    assert_eq!(classes, ["A1LevelUtterance", "C2LevelUtterance"]);
    assert!(omn.contains("DisjointClasses"));

    let defs = dir.path().join("definitions.json");
    let o = run_stdin(
        &["classify", "--defs", s(&defs)],
        "The cat sat on the mat.\n\nConsequently, the municipal authorities postponed the controversial redevelopment because residents demanded an independent environmental assessment of the neighbourhood.\n",
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let records = classify_lines(&o);
    assert_eq!(records.len(), 2);
    assert_eq!(records[0]["label"], "A1");
    assert_eq!(records[0]["diagnostics"]["fallback"], false);
    assert_eq!(records[1]["label"], "C2");
}

#[test]
fn exact_mode_paths_respect_depth() {
    let dir = TempDir::new().unwrap();
    let corpus = fixture_corpus(dir.path(), 200);
    let out = s(dir.path());
    assert_eq!(run(&["train", "--corpus", s(&corpus), "--out", out]).status.code(), Some(0));
    let o = run(&["ontology", "--mode", "exact", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let omn = fs::read_to_string(dir.path().join("ontology.omn")).unwrap();

    let mut paths = 0;
    for expr in omn.lines().filter_map(|l| l.trim().strip_prefix("Utterance and ")) {
        for path in expr.split(") or (") {
            paths += 1;
            let conjuncts = path.matches(" some ").count() + path.matches(" value ").count();
            assert!((1..=5).contains(&conjuncts), "{conjuncts} conjuncts in {path}");
        }
    }
    let tree = read_json(dir.path().join("tree.json"));
    fn leaves(n: &Value) -> usize {
        n["children"].as_array().map_or(1, |c| c.iter().map(leaves).sum())
    }
    assert_eq!(paths, leaves(&tree["root"]));
    parse_ontology(&omn).unwrap();
}

/// Root on sentence length, both children on Flesch–Kincaid, with labels
/// crossed so that each level's hull covers the whole plane.
fn crossed_tree(dir: &Path) -> PathBuf {
    let leaf = |label: &str, i: usize| {
        let mut counts = [0usize; 6];
        counts[i] = 30;
        json!({ "kind": "leaf", "counts": counts, "majority": label })
    };
    let inner = |a: Value, b: Value| {
        json!({
            "kind": "split", "feature_id": "flesch_kincaid", "threshold": 5.0, "samples": 60,
            "impurity_decrease": 0.5, "counts": [30, 0, 30, 0, 0, 0], "children": [a, b]
        })
    };
    let tree = json!({
        "catalog": [
            { "id": "flesch_kincaid", "kind": "readability", "value_type": "numeric" },
            { "id": "avg_sentence_length", "kind": "syntactic", "value_type": "numeric" }
        ],
        "config": { "max_depth": 2, "min_samples_branch": 10, "min_samples_leaf": null, "importance_threshold": 0.01 },
        "n_train": 120,
        "root": {
            "kind": "split", "feature_id": "avg_sentence_length", "threshold": 10.0, "samples": 120,
            "impurity_decrease": 0.0001, "counts": [60, 0, 60, 0, 0, 0],
            "children": [inner(leaf("A1", 0), leaf("B1", 2)), inner(leaf("B1", 2), leaf("A1", 0))]
        }
    });
    let p = dir.join("crossed.json");
    fs::write(&p, tree.to_string()).unwrap();
    p
}

#[test]
fn overlapping_boxes_are_reported_not_fatal() {
    let dir = TempDir::new().unwrap();
    let tree = crossed_tree(dir.path());
    let o = run(&["ontology", "--tree", s(&tree), "--mode", "box", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("consistency findings:"), "{text}");
    let report = read_json(dir.path().join("consistency.json"));
    assert!(!report["overlaps"].as_array().unwrap().is_empty());

    // the exact-mode rendering of the same tree is a clean partition
    let o = run(&["ontology", "--tree", s(&tree), "--mode", "exact", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let report = read_json(dir.path().join("consistency.json"));
    assert_eq!(report["partition"]["disjoint"], true);
    assert_eq!(report["partition"]["exhaustive"], true);
}

#[test]
fn unreadable_tree_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("tree.json");
    fs::write(&bad, "{ not json").unwrap();
    let o = run(&["ontology", "--tree", s(&bad), "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_empty_input() {
    let dir = TempDir::new().unwrap();
    let tree = crossed_tree(dir.path());
    let o = run_stdin(&["classify", "--tree", s(&tree)], "");
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn classify_needs_exactly_one_model() {
    let dir = TempDir::new().unwrap();
    let tree = crossed_tree(dir.path());
    let o = run_stdin(&["classify"], "Hi.\n");
    assert_eq!(o.status.code(), Some(2));
    let o = run_stdin(&["classify", "--tree", s(&tree), "--defs", s(&tree)], "Hi.\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_of_range_text_falls_back_to_nearest_box() {
    let dir = TempDir::new().unwrap();
    let corpus = fixture_corpus(dir.path(), 200);
    let out = s(dir.path());
    assert_eq!(run(&["train", "--corpus", s(&corpus), "--out", out]).status.code(), Some(0));
    assert_eq!(run(&["ontology", "--mode", "box", "--out", out]).status.code(), Some(0));

    // Close the open lower end of A1's sentence-length range at 3 words;
    // one-word sentences then fall outside every box.
    let mut defs = read_json(dir.path().join("definitions.json"));
    let a1 = &mut defs["definitions"][0];
    assert_eq!(a1["label"], "A1");
    let c = a1["constraints"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|c| c["descriptor"] == "avg_sentence_length")
        .expect("A1 constrains sentence length");
    assert_eq!(c["lower"], "unbounded");
    c["lower"] = json!({ "value": 3.0, "inclusive": false });
    let bounded = dir.path().join("bounded.json");
    fs::write(&bounded, defs.to_string()).unwrap();

    let o = run_stdin(&["classify", "--defs", s(&bounded)], "Stop. Go. Run.\nThe dog ran to the big red barn.\n");
    assert!(o.status.success(), "{}", stderr(&o));
    let records = classify_lines(&o);
    assert_eq!(records[0]["label"], "A1");
    assert_eq!(records[0]["diagnostics"]["fallback"], true);
    assert!(records[0]["diagnostics"]["distance"].as_f64().unwrap() > 0.0);
    assert_eq!(records[1]["diagnostics"]["fallback"], false);
}

#[test]
fn exact_rules_reproduce_tree_predictions() {
    let dir = TempDir::new().unwrap();
    let corpus_path = fixture_corpus(dir.path(), 200);
    let out = s(dir.path());
    assert_eq!(run(&["train", "--corpus", s(&corpus_path), "--out", out]).status.code(), Some(0));
    assert_eq!(run(&["ontology", "--mode", "exact", "--out", out]).status.code(), Some(0));

    // fixture texts plus a held-out set from another seed
    let mut texts: Vec<String> = LabeledCorpus::load(&corpus_path, CorpusFormat::Csv)
        .unwrap()
        .items
        .into_iter()
        .map(|it| it.text)
        .collect();
    texts.extend(fixture::generate(20, 99, Lexicons::bundled()).items.into_iter().map(|it| it.text));
    let input = dir.path().join("texts.txt");
    fs::write(&input, texts.join("\n") + "\n").unwrap();

    let labels = |model: &str, path: &str| -> Vec<Value> {
        let o = run(&["classify", model, path, "--input", s(&input)]);
        assert!(o.status.success(), "{}", stderr(&o));
        classify_lines(&o).into_iter().map(|r| r["label"].clone()).collect()
    };
    let by_tree = labels("--tree", &format!("{out}/tree.json"));
    let by_defs = labels("--defs", &format!("{out}/definitions.json"));
    let by_omn = labels("--ontology", &format!("{out}/ontology.omn"));
    assert_eq!(by_tree.len(), texts.len());
    assert_eq!(by_tree, by_defs);
    assert_eq!(by_tree, by_omn);
}

#[test]
fn runs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let corpus = fixture_corpus(dir.path(), 50);
    let outputs: Vec<PathBuf> = ["a", "b"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let args = ["--corpus", s(&corpus), "--min-branch", "10", "--seed", "7", "--out", s(&out)];
            for cmd in ["train", "ontology"] {
                let o = run(&[&[cmd][..], &args[..]].concat());
                assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            }
            out
        })
        .collect();
    for file in ["tree.json", "importance.csv", "eval.json", "definitions.json", "ontology.omn", "consistency.json"] {
        let a = fs::read(outputs[0].join(file)).unwrap();
        let b = fs::read(outputs[1].join(file)).unwrap();
        assert!(a == b, "{file} differs between runs");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let corpus = fixture_corpus(dir.path(), 30);
    let config = dir.path().join("config.json");
    let out = dir.path().join("from_config");
    fs::write(
        &config,
        json!({ "corpus": corpus, "max_depth": 1, "min_branch": 5, "out": out }).to_string(),
    )
    .unwrap();

    let o = run(&["--config", s(&config), "train"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tree = read_json(out.join("tree.json"));
    assert_eq!(tree["config"]["max_depth"], 1);
    assert_eq!(tree["config"]["min_samples_branch"], 5);

    let o = run(&["--config", s(&config), "train", "--max-depth", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tree = read_json(out.join("tree.json"));
    assert_eq!(tree["config"]["max_depth"], 2);
    assert_eq!(tree["config"]["min_samples_branch"], 5);

    fs::write(&config, r#"{ "max_depht": 3 }"#).unwrap();
    let o = run(&["--config", s(&config), "train"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn evaluate_reports_agreement_for_dual_labels() {
    let dir = TempDir::new().unwrap();
    let corpus = two_level_corpus(dir.path());
    let out = s(dir.path());
    assert_eq!(run(&["train", "--corpus", s(&corpus), "--min-branch", "10", "--out", out]).status.code(), Some(0));

    let dual = LabeledCorpus::new(
        vec![
            CorpusItem { text: "The cat sat on the mat.".into(), label: LevelLabel::A1, label2: Some(LevelLabel::A1) },
            CorpusItem { text: "The dog ran home.".into(), label: LevelLabel::A1, label2: Some(LevelLabel::A2) },
        ],
        "dual",
    )
    .unwrap();
    let path = dir.path().join("dual.tsv");
    dual.save(&path, CorpusFormat::Tsv).unwrap();
    let o = run(&["evaluate", "--tree", &format!("{out}/tree.json"), "--corpus", s(&path), "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("annotator agreement 0.5000"), "{}", stdout(&o));
    let eval = read_json(dir.path().join("eval.json"));
    assert_eq!(eval["n"], 2);
    assert!(dir.path().join("confusion.csv").exists());
}
