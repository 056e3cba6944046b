use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tm_novelty::synthetic::{generate, SyntheticSpec};
use tm_novelty::tsetlin::{write_model, Clause, InitMode};
use tm_novelty::{Polarity, TmParams, TsetlinMachine, Vocabulary};

fn tmnovelty(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmnovelty"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("TMNOVELTY_OUT")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn assert_ok(o: &Output) {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), stderr(o));
}

const N: u16 = 100;

/// The worked example from the case study, planted as clause states.
fn case_study_model(dir: &Path) {
    let known: [(Polarity, &[&str]); 4] = [
        (Polarity::Positive, &["england", "cricket", "match", "hit", "six"]),
        (Polarity::Positive, &["cricket", "six"]),
        (Polarity::Negative, &["won", "rugby", "ball"]),
        (Polarity::Negative, &["rugby", "match"]),
    ];
    let novel: [(Polarity, &[&str]); 4] = [
        (Polarity::Positive, &["england", "won", "rugby", "old"]),
        (Polarity::Positive, &["rugby", "match", "despite", "old"]),
        (Polarity::Negative, &["cricket", "won", "six", "ball"]),
        (Polarity::Negative, &["cricket", "hit", "six"]),
    ];
    let vocab = Vocabulary::from_words(["ball", "cricket", "despite", "england", "hit", "match", "old", "rugby", "six", "won"]);
    let width = vocab.len();
    let pool = |spec: &[(Polarity, &[&str])]| -> Vec<Clause> {
        spec.iter()
            .map(|(pol, words)| {
                let mut states = vec![N; 2 * width];
                for w in *words {
                    states[vocab.index_of(w).unwrap()] = N + 1;
                }
                Clause::from_states(*pol, N, states).unwrap()
            })
            .collect()
    };
    let params = TmParams { clauses: 4, threshold: 2, specificity: 3.0, states_per_action: N, seed: 1, init: InitMode::Boundary };
    let model = TsetlinMachine::from_pools(params, width, [pool(&known), pool(&novel)], 1).unwrap();
    let mut bytes = Vec::new();
    write_model(&model, &vocab.content_hash(), &mut bytes).unwrap();
    fs::write(dir.join("model.tmnv"), bytes).unwrap();
    let mut v = Vec::new();
    vocab.write_to(&mut v).unwrap();
    fs::write(dir.join("vocab.txt"), v).unwrap();
}

#[test]
fn describe_case_study_matches_hand_computation_and_golden() {
    let dir = tempfile::tempdir().unwrap();
    case_study_model(dir.path());
    assert_ok(&tmnovelty(dir.path(), &["describe"]));

    let scores = fs::read_to_string(dir.path().join("scores.csv")).unwrap();
    let mut r = csv::Reader::from_reader(scores.as_bytes());
    let mut seen = 0;
    for row in r.records() {
        let row = row.unwrap();
        let (fk, fn_): (u64, u64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        let score: f64 = row[5].parse().unwrap();
        // bag totals 14 and 13, absent words floored at one occurrence
        let want = (fn_.max(1) as f64 / 13.0) / (fk.max(1) as f64 / 14.0);
        assert!((score - want).abs() < 1e-12, "{}: {score} vs {want}", &row[0]);
        seen += 1;
    }
    assert_eq!(seen, 10);

    // the goldens are only rewritten after the hand check above has passed
    let bags = fs::read_to_string(dir.path().join("bags.csv")).unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(fixtures.join("case_study_scores.csv"), &scores).unwrap();
        fs::write(fixtures.join("case_study_bags.csv"), &bags).unwrap();
    }
    assert_eq!(scores, fs::read_to_string(fixtures.join("case_study_scores.csv")).unwrap());
    assert_eq!(bags, fs::read_to_string(fixtures.join("case_study_bags.csv")).unwrap());
}

#[test]
fn context_on_case_study() {
    let dir = tempfile::tempdir().unwrap();
    case_study_model(dir.path());
    assert_ok(&tmnovelty(dir.path(), &["context", "--words", "rugby,old,six"]));
    let m = fs::read_to_string(dir.path().join("context_novel.csv")).unwrap();
    let mut lines = m.lines();
    assert_eq!(lines.next(), Some("word,rugby,old,six"));
    let rugby: Vec<&str> = lines.next().unwrap().split(',').collect();
    // Novel-voting clauses are the two Novel positives and the two Known
    // negatives: rugby in all four, old in two of them.
    let joint = 2.0 / 4.0;
    let want = joint / ((4.0 / 13.0) * (2.0 / 13.0));
    assert!((rugby[2].parse::<f64>().unwrap() - want).abs() < 1e-9, "{m}");
    assert_eq!(rugby[3], "0");
}

fn write_corpus(path: &Path, seed: u64) {
    let spec = SyntheticSpec { docs_per_class: 60, ..Default::default() };
    let corpus = generate(&spec, seed).unwrap();
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record(["doc_id", "label", "text"]).unwrap();
    for d in &corpus.docs {
        w.write_record([d.id.as_str(), d.label.as_str(), &d.tokens.join(" ")]).unwrap();
    }
    w.flush().unwrap();
}

const SMALL: &[&str] = &["--clauses", "40", "--threshold", "10", "--specificity", "4", "--epochs", "5"];

fn ingest(out: &Path, corpus: &Path) {
    let mut args = vec!["ingest", "--csv", corpus.to_str().unwrap()];
    args.extend_from_slice(SMALL);
    assert_ok(&tmnovelty(out, &args));
}

#[test]
fn full_pipeline_writes_every_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus.csv");
    write_corpus(&corpus, 3);
    let out = tmp.path().join("run");
    ingest(&out, &corpus);
    for stage in [&["train"][..], &["describe"], &["tfidf"], &["eval"]] {
        assert_ok(&tmnovelty(&out, stage));
    }
    for f in [
        "config.toml",
        "vocab.txt",
        "docs.csv",
        "train_bool.csv",
        "test_bool.csv",
        "model.tmnv",
        "clauses.csv",
        "trace.csv",
        "bags.csv",
        "scores.csv",
        "doc_scores.csv",
        "tfidf.csv",
        "report.json",
        "roc_tm.csv",
        "pr_tm.csv",
        "roc_tfidf.csv",
        "pr_tfidf.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    assert!(!out.join(".tmnovelty.lock").exists());
    let config = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(config.contains("clauses = 40"), "{config}");
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 6);
    let report = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"auc\""));
}

#[test]
fn training_twice_gives_identical_models_and_stages_are_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus.csv");
    write_corpus(&corpus, 4);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ingest(&a, &corpus);
    ingest(&b, &corpus);
    assert_ok(&tmnovelty(&a, &["train"]));
    assert_ok(&tmnovelty(&b, &["train"]));
    let model_a = fs::read(a.join("model.tmnv")).unwrap();
    assert_eq!(model_a, fs::read(b.join("model.tmnv")).unwrap());

    assert_ok(&tmnovelty(&a, &["describe"]));
    assert_ok(&tmnovelty(&a, &["eval"]));
    let snapshot = |names: &[&str]| names.iter().map(|n| fs::read(a.join(n)).unwrap()).collect::<Vec<_>>();
    let files = ["config.toml", "docs.csv", "model.tmnv", "clauses.csv", "scores.csv", "report.json"];
    let before = snapshot(&files);
    ingest(&a, &corpus);
    for stage in ["train", "describe", "eval"] {
        assert_ok(&tmnovelty(&a, &[stage]));
    }
    assert_eq!(before, snapshot(&files));
}

#[test]
fn eval_without_model_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmnovelty(tmp.path(), &["eval"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model not found"), "{}", stderr(&o));
}

#[test]
fn vocabulary_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    case_study_model(dir.path());
    let vocab = fs::read_to_string(dir.path().join("vocab.txt")).unwrap();
    fs::write(dir.path().join("vocab.txt"), vocab.replace("despite\n", "despot\n")).unwrap();
    let o = tmnovelty(dir.path(), &["describe"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("vocabulary hash mismatch"), "{}", stderr(&o));
    assert!(!dir.path().join("scores.csv").exists());
}

#[test]
fn validation_and_missing_input_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let missing = tmnovelty(&out, &["ingest", "--csv", "/no/such/corpus.csv"]);
    assert_eq!(missing.status.code(), Some(2), "{}", stderr(&missing));

    let corpus = tmp.path().join("corpus.csv");
    write_corpus(&corpus, 5);
    let odd = tmnovelty(&out, &["ingest", "--csv", corpus.to_str().unwrap(), "--clauses", "7"]);
    assert_eq!(odd.status.code(), Some(1), "{}", stderr(&odd));

    let bad_flag = tmnovelty(&out, &["ingest", "--aggregator", "median"]);
    assert_eq!(bad_flag.status.code(), Some(1));

    let train_first = tmnovelty(&out, &["train"]);
    assert_eq!(train_first.status.code(), Some(2), "{}", stderr(&train_first));
}

#[test]
fn concurrent_run_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    case_study_model(dir.path());
    fs::write(dir.path().join(".tmnovelty.lock"), "1\n").unwrap();
    let o = tmnovelty(dir.path(), &["describe"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("in use"));
}

#[test]
fn config_file_values_and_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus.csv");
    write_corpus(&corpus, 6);
    let cfg = tmp.path().join("exp.toml");
    fs::write(
        &cfg,
        format!(
            "[corpus]\ncsv = {:?}\n[model]\nclauses = 20\nthreshold = 5\nspecificity = 3.0\nepochs = 2\n[split]\ntest_fraction = 0.5\n",
            corpus.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = tmp.path().join("run");
    let o = Command::new(env!("CARGO_BIN_EXE_tmnovelty"))
        .args(["--config", cfg.to_str().unwrap(), "ingest", "--threshold", "8"])
        .env("TMNOVELTY_OUT", &out)
        .output()
        .unwrap();
    assert_ok(&o);
    let written = fs::read_to_string(out.join("config.toml")).unwrap();
    assert!(written.contains("clauses = 20") && written.contains("threshold = 8"), "{written}");
    assert!(written.contains("test_fraction = 0.5"));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("60 train, 60 test"), "{stdout}");
}
