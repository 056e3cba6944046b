//! Acceptance gate. Each test prints one PASS/FAIL line with its measured
//! values; run with `cargo test -p tm-novelty --release --test acceptance`.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tm_novelty::baseline::tfidf_scores;
use tm_novelty::corpus::corpus_stats;
use tm_novelty::eval::{categorize_by_corpus, cfd, log_loss, log_loss_gradient, roc_pr, WordCategory};
use tm_novelty::experiment::{run_experiment, train_scores, ExperimentConfig};
use tm_novelty::novelty::{build_word_bags, contextual_score, cooccurrence, novelty_scores, ContextMode, ScoringOptions};
use tm_novelty::synthetic::{generate, SyntheticCorpus, SyntheticSpec};
use tm_novelty::tsetlin::{read_model, write_model, Clause, EvalMode};
use tm_novelty::{Bits, BoolDoc, Class, Document, ExtractedClause, Polarity, TmParams, TsetlinMachine};

const SEEDS: u64 = 10;

/// Writes straight to stdout so the line survives libtest output capture.
fn report(id: u32, name: &str, pass: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let ok = pass && elapsed <= limit;
    let line = format!(
        "[{}] criterion {id} {name}: {detail} ({:.2}s, limit {}s)\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    let _ = std::io::stdout().write_all(line.as_bytes());
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(elapsed <= limit, "criterion {id} exceeded {limit:?}: {elapsed:?}");
}

fn table_one() -> Vec<ExtractedClause> {
    use Class::*;
    use Polarity::*;
    let c = |class, pol, words: &[&str]| ExtractedClause::new(class, pol, words.iter().copied(), std::iter::empty::<&str>());
    vec![
        c(Known, Positive, &["england", "cricket", "match", "hit", "six"]),
        c(Known, Negative, &["won", "rugby", "ball"]),
        c(Known, Positive, &["cricket", "six"]),
        c(Known, Negative, &["rugby", "match"]),
        c(Novel, Positive, &["england", "won", "rugby", "old"]),
        c(Novel, Negative, &["cricket", "won", "six", "ball"]),
        c(Novel, Positive, &["rugby", "match", "despite", "old"]),
        c(Novel, Negative, &["cricket", "hit", "six"]),
    ]
}

#[test]
fn criterion_1_case_study() {
    let start = Instant::now();
    let bags = build_word_bags(&table_one());
    let table = novelty_scores::<f64>(&bags, ScoringOptions::default()).unwrap();
    let mut failures = Vec::new();

    let expect = |pairs: &[(&str, u64)]| pairs.iter().map(|&(w, n)| (w.to_string(), n)).collect::<BTreeMap<_, _>>();
    let bk = expect(&[("cricket", 4), ("six", 4), ("hit", 2), ("england", 1), ("match", 1), ("won", 1), ("ball", 1)]);
    let bn = expect(&[("rugby", 4), ("won", 2), ("match", 2), ("old", 2), ("england", 1), ("despite", 1), ("ball", 1)]);
    if bags.bag(Class::Known) != &bk || bags.total(Class::Known) != 14 {
        failures.push("B_K".to_string());
    }
    if bags.bag(Class::Novel) != &bn || bags.total(Class::Novel) != 13 {
        failures.push("B_N".to_string());
    }

    let rf = [("match", Class::Known, 0.071), ("match", Class::Novel, 0.154), ("rugby", Class::Known, 0.071)];
    for (w, c, want) in rf {
        let got = table.rel_freq(w, c).unwrap();
        if (got - want).abs() > 0.001 {
            failures.push(format!("p_{c}({w})={got:.4} want {want}"));
        }
    }

    let printed = [
        ("england", 1.070),
        ("won", 2.169),
        ("cricket", 0.271),
        ("match", 2.169),
        ("hit", 0.535),
        ("six", 0.271),
        ("ball", 1.070),
        ("despite", 1.15),
    ];
    // rugby and old are checked against the ratio of the stated fractions
    let hand = [("rugby", (4.0 / 13.0) / (1.0 / 14.0)), ("old", (2.0 / 13.0) / (1.0 / 14.0))];
    for (w, want) in printed.into_iter().chain(hand) {
        let got = table.score(w).unwrap();
        if (got - want).abs() > 0.02 {
            failures.push(format!("score({w})={got:.4} want {want:.3}"));
        }
    }
    let detail = if failures.is_empty() { "bags, frequencies and scores match".to_string() } else { failures.join("; ") };
    report(1, "case study", failures.is_empty(), start.elapsed(), Duration::from_secs(1), &detail);
}

fn xor_docs(copies: usize) -> Vec<BoolDoc> {
    let mut docs = Vec::new();
    for i in 0..copies {
        for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
            let label = if a ^ b { Class::Novel } else { Class::Known };
            docs.push(BoolDoc { doc_id: format!("{i}"), label, bits: Bits::from_bools(&[a, b]) });
        }
    }
    docs
}

#[test]
fn criterion_2_xor() {
    let start = Instant::now();
    let docs = xor_docs(100);
    let mut solved = 0;
    for seed in 0..SEEDS {
        let params = TmParams { clauses: 20, threshold: 10, specificity: 3.0, states_per_action: 128, seed, ..TmParams::desk() };
        let mut tm = TsetlinMachine::new(params, 2).unwrap();
        let trace = tm.fit(&docs, 200).unwrap();
        if trace.accuracy.iter().any(|&a| a == 1.0) && tm.accuracy(&docs).unwrap() == 1.0 {
            solved += 1;
        }
    }
    let detail = format!("{solved}/{SEEDS} seeds reach 100% training accuracy");
    report(2, "XOR learnability", solved >= 9, start.elapsed(), Duration::from_secs(10), &detail);
}

fn synthetic(seed: u64) -> SyntheticCorpus {
    generate(&SyntheticSpec::default(), seed).unwrap()
}

fn desk_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig { params: TmParams::desk().with_seed(seed), epochs: 50, split_seed: seed, ..Default::default() }
}

#[test]
fn criterion_3_score_separation() {
    let start = Instant::now();
    let mut good = 0;
    let mut rows = Vec::new();
    for seed in 0..SEEDS {
        let corpus = synthetic(seed);
        let trained = train_scores::<f64>(&corpus.docs, &desk_config(seed)).unwrap();
        let stats = corpus_stats(&corpus.docs).unwrap();
        let cats = categorize_by_corpus(&stats, trained.bags.words());
        let frac = |cat: WordCategory, pred: &dyn Fn(f64) -> bool| {
            let v: Vec<f64> = cats.iter().filter(|(_, &c)| c == cat).map(|(w, _)| trained.table.score(w).unwrap()).collect();
            if v.is_empty() {
                return (0.0, 0);
            }
            (v.iter().filter(|&&s| pred(s)).count() as f64 / v.len() as f64, v.len())
        };
        let (k, nk) = frac(WordCategory::KnownOnly, &|s| s < 1.0);
        let (n, nn) = frac(WordCategory::NovelOnly, &|s| s > 1.0);
        if nk > 0 && nn > 0 && k >= 0.8 && n >= 0.6 {
            good += 1;
        }
        rows.push(format!("{k:.2}/{nk},{n:.2}/{nn}"));
    }
    let detail = format!("{good}/{SEEDS} seeds (known<1 / novel>1 per seed: {})", rows.join(" "));
    report(3, "score separation", good >= 8, start.elapsed(), Duration::from_secs(120), &detail);
}

#[test]
fn criterion_4_discrimination() {
    let start = Instant::now();
    let mut good = 0;
    let mut rows = Vec::new();
    for seed in 0..SEEDS {
        let corpus = synthetic(seed);
        let exp = run_experiment::<f64>(&corpus.docs, &desk_config(seed)).unwrap();
        let (tm, tf) = (exp.report.tm.roc.auc, exp.report.tfidf.roc.auc);
        if tm >= tf && tm >= 0.85 {
            good += 1;
        }
        rows.push(format!("{tm:.3}/{tf:.3}"));
    }
    let detail = format!("{good}/{SEEDS} seeds (AUC tm/tfidf: {})", rows.join(" "));
    report(4, "discrimination", good >= 8, start.elapsed(), Duration::from_secs(180), &detail);
}

/// Direct transcription of the per-class TF-IDF definition.
fn brute_tfidf(docs: &[Document], class: Class, word: &str) -> f64 {
    let class_tokens: Vec<&String> = docs.iter().filter(|d| d.label == class).flat_map(|d| &d.tokens).collect();
    let tf = class_tokens.iter().filter(|t| t.as_str() == word).count() as f64 / class_tokens.len() as f64;
    let containing = docs.iter().filter(|d| d.tokens.iter().any(|t| t == word)).count() as f64;
    tf * (docs.len() as f64 / (containing + 1.0)).log2()
}

#[test]
fn criterion_5_tfidf_oracle() {
    let start = Instant::now();
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let words = ["alpha", "beta", "gamma", "delta", "omega", "sigma"];
    let mut worst = 0.0f64;
    let mut checked = 0;
    for c in 0..100 {
        let docs: Vec<Document> = (0..5)
            .map(|i| {
                let label = if i < 2 || (i < 4 && r.gen_bool(0.5)) { Class::Known } else { Class::Novel };
                let label = if i == 4 { Class::Novel } else { label };
                let len = r.gen_range(1..8);
                let tokens: Vec<&str> = (0..len).map(|_| words[r.gen_range(0..words.len())]).collect();
                Document::new(format!("{c}-{i}"), label, tokens)
            })
            .collect();
        let table = tfidf_scores::<f64>(&corpus_stats(&docs).unwrap()).unwrap();
        for w in table.words() {
            for class in Class::ALL {
                let diff = (table.score(class, w).unwrap() - brute_tfidf(&docs, class, w)).abs();
                worst = worst.max(diff);
                checked += 1;
            }
        }
    }
    let detail = format!("{checked} scores over 100 corpora, max |diff| {worst:e}");
    report(5, "TF-IDF oracle", worst <= 1e-12, start.elapsed(), Duration::from_secs(5), &detail);
}

#[test]
fn criterion_6_contextual_ordering() {
    let start = Instant::now();
    let mut good = 0;
    let mut rows = Vec::new();
    for seed in 0..SEEDS {
        let corpus = synthetic(seed);
        let trained = train_scores::<f64>(&corpus.docs, &desk_config(seed)).unwrap();
        let planted = corpus.planted.clone().unwrap();
        let mut ok = true;
        let mut cells = Vec::new();
        for class in Class::ALL {
            let co = cooccurrence(&trained.clauses, class);
            let (a, b) = &planted[class.index()];
            let cross = &planted[class.other().index()].0;
            let score = |x: &str, y: &str| contextual_score(&co, &trained.table, x, y, ContextMode::BagFrequency);
            match (score(a, b), score(a, cross)) {
                (Ok(p), Ok(x)) => {
                    ok &= p > x;
                    cells.push(format!("{p:.1}>{x:.1}"));
                }
                _ => {
                    ok = false;
                    cells.push("unscored".to_string());
                }
            }
        }
        good += usize::from(ok);
        rows.push(cells.join(","));
    }
    let detail = format!("{good}/{SEEDS} seeds (planted>cross per class: {})", rows.join(" "));
    report(6, "contextual ordering", good >= 9, start.elapsed(), Duration::from_secs(60), &detail);
}

fn mann_whitney(scores: &[f64], y: &[Class]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (i, &yi) in y.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            if yi == Class::Novel && yj == Class::Known {
                den += 1.0;
                num += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    num / den
}

fn random_clauses() -> impl Strategy<Value = Vec<ExtractedClause>> {
    let word = prop::sample::select(vec!["a", "b", "c", "d", "e", "f", "g"]);
    let clause = (any::<bool>(), any::<bool>(), prop::collection::vec(word.clone(), 0..4), prop::collection::vec(word, 0..3))
        .prop_map(|(k, p, plain, neg)| {
            let class = if k { Class::Known } else { Class::Novel };
            let pol = if p { Polarity::Positive } else { Polarity::Negative };
            ExtractedClause::new(class, pol, plain, neg)
        });
    prop::collection::vec(clause, 1..20)
}

#[test]
fn criterion_7_determinism_and_properties() {
    let start = Instant::now();
    let mut failures: Vec<String> = Vec::new();
    let mut run = |name: &str, result: Result<(), String>| {
        if let Err(e) = result {
            failures.push(format!("{name}: {e}"));
        }
    };

    // byte-identical models from identical seeds
    let corpus = synthetic(42);
    let cfg = ExperimentConfig { epochs: 5, ..desk_config(42) };
    let model_bytes = || {
        let t = train_scores::<f64>(&corpus.docs, &cfg).unwrap();
        let mut buf = Vec::new();
        write_model(&t.model, &t.vocab.content_hash(), &mut buf).unwrap();
        buf
    };
    let (m1, m2) = (model_bytes(), model_bytes());
    run("determinism", if m1 == m2 { Ok(()) } else { Err("model bytes differ".into()) });
    run("model round trip", {
        let (model, _) = read_model(m1.as_slice()).unwrap();
        let mut again = Vec::new();
        let t = train_scores::<f64>(&corpus.docs, &cfg).unwrap();
        write_model(&model, &t.vocab.content_hash(), &mut again).unwrap();
        if again == m1 { Ok(()) } else { Err("re-serialized model differs".into()) }
    });

    let mut runner = TestRunner::new(Config { cases: 128, failure_persistence: None, ..Config::default() });

    run(
        "TA bounds",
        runner
            .run(&(any::<u64>(), 1u16..8, 1usize..40), |(seed, n, width)| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                let states: Vec<u16> = (0..2 * width).map(|_| r.gen_range(1..=2 * n)).collect();
                let mut clause = Clause::from_states(Polarity::Positive, n, states).unwrap();
                for _ in 0..50 {
                    let x: Vec<bool> = (0..width).map(|_| r.gen()).collect();
                    let x = Bits::from_bools(&x);
                    if r.gen() {
                        clause.type_i_feedback(&x, 2.5, &mut r).unwrap();
                    } else {
                        clause.type_ii_feedback(&x).unwrap();
                    }
                    prop_assert!(clause.states().iter().all(|&s| (1..=2 * n).contains(&s)));
                    prop_assert_eq!(clause.eval(&x, EvalMode::Learning).unwrap(), clause.eval_naive(&x, EvalMode::Learning).unwrap());
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    run(
        "bag conservation",
        runner
            .run(&random_clauses(), |clauses| {
                let bags = build_word_bags(&clauses);
                let literals: u64 = clauses.iter().map(|c| c.literal_count() as u64).sum();
                prop_assert_eq!(bags.total(Class::Known) + bags.total(Class::Novel), literals);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    run(
        "score reciprocity",
        runner
            .run(&random_clauses(), |clauses| {
                let bags = build_word_bags(&clauses);
                prop_assume!(bags.total(Class::Known) > 0 && bags.total(Class::Novel) > 0);
                let t = novelty_scores::<f64>(&bags, ScoringOptions::default()).unwrap();
                let s = novelty_scores::<f64>(&bags.swapped(), ScoringOptions::default()).unwrap();
                for (w, ws) in t.iter() {
                    let inv = s.score(w).unwrap();
                    prop_assert!((ws.score * inv - 1.0).abs() < 1e-12, "{} {} {}", w, ws.score, inv);
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    run(
        "CFD monotone",
        runner
            .run(&prop::collection::vec(-50.0f64..50.0, 1..80), |v| {
                let pts = cfd(&v, true).unwrap();
                prop_assert!(pts.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
                prop_assert_eq!(pts.last().unwrap().1, 1.0);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    run(
        "AUC vs Mann-Whitney",
        runner
            .run(&prop::collection::vec((0u8..10, any::<bool>()), 2..=200), |pairs| {
                let scores: Vec<f64> = pairs.iter().map(|p| f64::from(p.0) * 0.3).collect();
                let y: Vec<Class> = pairs.iter().map(|p| if p.1 { Class::Novel } else { Class::Known }).collect();
                prop_assume!(y.contains(&Class::Known) && y.contains(&Class::Novel));
                let auc = roc_pr(&scores, &y).unwrap().0.auc;
                prop_assert!((auc - mann_whitney(&scores, &y)).abs() <= 1e-9);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    run(
        "logistic gradient",
        runner
            .run(&any::<u64>(), |seed| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                let xs: Vec<Vec<f64>> = (0..25).map(|_| (0..4).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
                let ys: Vec<f64> = (0..25).map(|_| f64::from(u8::from(r.gen::<bool>()))).collect();
                for _ in 0..10 {
                    let w: Vec<f64> = (0..4).map(|_| r.gen_range(-2.0..2.0)).collect();
                    let b = r.gen_range(-1.0..1.0);
                    let (gw, gb) = log_loss_gradient(&w, b, &xs, &ys, 1e-4);
                    let h = 1e-5;
                    let rel = |a: f64, fd: f64| (a - fd).abs() / fd.abs().max(1e-3);
                    for d in 0..4 {
                        let (mut wp, mut wm) = (w.clone(), w.clone());
                        wp[d] += h;
                        wm[d] -= h;
                        let fd = (log_loss(&wp, b, &xs, &ys, 1e-4) - log_loss(&wm, b, &xs, &ys, 1e-4)) / (2.0 * h);
                        prop_assert!(rel(gw[d], fd) <= 1e-6);
                    }
                    let fd = (log_loss(&w, b + h, &xs, &ys, 1e-4) - log_loss(&w, b - h, &xs, &ys, 1e-4)) / (2.0 * h);
                    prop_assert!(rel(gb, fd) <= 1e-6);
                }
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );

    let detail = if failures.is_empty() {
        format!("identical {}-byte models; six property suites pass", m1.len())
    } else {
        failures.join("; ")
    };
    report(7, "determinism and properties", failures.is_empty(), start.elapsed(), Duration::from_secs(60), &detail);
}

/// Real-data smoke test. Point `TM_NOVELTY_DATA` at a directory holding
/// `bbcsport/` and `20news/` in their class-per-folder layouts.
#[test]
fn criterion_8_real_data_smoke() {
    use tm_novelty::corpus::load_class_dirs;
    use tm_novelty::Preprocessor;

    let Some(root) = std::env::var_os("TM_NOVELTY_DATA").map(std::path::PathBuf::from) else {
        let _ = std::io::stdout()
            .write_all(b"[SKIP] criterion 8 real-data smoke: TM_NOVELTY_DATA not set (not a gate)\n");
        return;
    };
    let start = Instant::now();
    let sets: [(&str, &[(&str, Class)]); 2] = [
        ("bbcsport", &[("cricket", Class::Known), ("football", Class::Known), ("rugby", Class::Novel)]),
        (
            "20news",
            &[
                ("comp.graphics", Class::Known),
                ("talk.politics.guns", Class::Known),
                ("rec.sport.baseball", Class::Novel),
            ],
        ),
    ];
    let pre = Preprocessor::default();
    let mut done = Vec::new();
    for (name, groups) in sets {
        let dirs: Vec<_> = groups.iter().map(|(g, c)| (root.join(name).join(g), *c)).collect();
        if !dirs.iter().all(|(d, _)| d.is_dir()) {
            done.push(format!("{name}: missing"));
            continue;
        }
        let docs: Vec<Document> = load_class_dirs(&dirs).unwrap().iter().map(|r| pre.document(r)).collect();
        let cfg = ExperimentConfig { params: TmParams::large(), epochs: 1, ..Default::default() };
        let exp = run_experiment::<f64>(&docs, &cfg).unwrap();
        done.push(format!("{name}: {} docs, {} words, AUC {:.3}", docs.len(), exp.trained.vocab.len(), exp.report.tm.roc.auc));
    }
    report(8, "real-data smoke", true, start.elapsed(), Duration::from_secs(3600), &done.join("; "));
}
