//! End-to-end runs: split, train, score, and compare against TF-IDF.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::baseline::{tfidf_scores, TfidfTable};
use crate::corpus::{booleanize, build_vocabulary, corpus_stats, Class, Document, Vocabulary};
use crate::error::Result;
use crate::eval::{
    categorize_by_corpus, categorize_words, cfd, doc_features, fit_logistic, roc_pr, scores_by_category, stratified_split, summary_stats,
    CategoryBasis, EvalReport, LogisticOptions, MethodReport, WordCategory, FEATURE_NAMES,
};
use crate::novelty::{build_word_bags, novelty_scores, ScoreTable, ScoringOptions, WordBags};
use crate::scalar::Real;
use crate::tsetlin::{ExtractedClause, FitTrace, TmParams, TsetlinMachine};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: TmParams,
    pub epochs: usize,
    pub min_df: usize,
    pub scoring: ScoringOptions,
    pub test_fraction: f64,
    pub split_seed: u64,
    pub eval: EvalOptions,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub logistic: LogisticOptions,
    pub categories: CategoryBasis,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: TmParams::desk(),
            epochs: 50,
            min_df: 1,
            scoring: ScoringOptions::default(),
            test_fraction: 0.3,
            split_seed: 0,
            eval: EvalOptions::default(),
        }
    }
}

/// A trained machine and everything derived from its clauses.
#[derive(Debug, Clone)]
pub struct TrainedScores<F> {
    pub vocab: Vocabulary,
    pub model: TsetlinMachine,
    pub trace: FitTrace,
    pub clauses: Vec<ExtractedClause>,
    pub bags: WordBags,
    pub table: ScoreTable<F>,
}

/// Builds the vocabulary from `docs`, trains the machine and scores the
/// clause words.
pub fn train_scores<F: Real>(docs: &[Document], cfg: &ExperimentConfig) -> Result<TrainedScores<F>> {
    let tokens: Vec<&[String]> = docs.iter().map(|d| d.tokens.as_slice()).collect();
    let vocab = build_vocabulary(&tokens, cfg.min_df)?;
    let bool_docs: Vec<_> = docs.iter().map(|d| booleanize(d, &vocab)).collect();
    let mut model = TsetlinMachine::new(cfg.params, vocab.len())?;
    let trace = model.fit(&bool_docs, cfg.epochs)?;
    let clauses = model.extract_clauses(&vocab)?;
    let bags = build_word_bags(&clauses);
    let table = novelty_scores(&bags, cfg.scoring)?;
    Ok(TrainedScores { vocab, model, trace, clauses, bags, table })
}

fn method_report<F: Real>(
    score: &(dyn Fn(&str) -> Option<F> + Sync),
    categories: &BTreeMap<String, WordCategory>,
    train: &[Document],
    test: &[Document],
    opts: LogisticOptions,
) -> Result<MethodReport<F>> {
    let by_cat = scores_by_category(categories, score);
    let categories = summary_stats(&by_cat);
    let mut curves = BTreeMap::new();
    for (cat, v) in &by_cat {
        if !v.is_empty() {
            curves.insert(*cat, cfd(v, true)?);
        }
    }
    let features = |docs: &[Document]| -> (Vec<Vec<F>>, Vec<Class>) {
        docs.iter().map(|d| (doc_features(&d.tokens, d.label, score).values.to_vec(), d.label)).unzip()
    };
    let (x_train, y_train) = features(train);
    let (x_test, y_test) = features(test);
    let logistic = fit_logistic(&x_train, &y_train, opts)?;
    let accuracy = |xs: &[Vec<F>], ys: &[Class]| {
        let hits = xs.iter().zip(ys).filter(|(x, &y)| logistic.predict(x) == y).count();
        F::from_count(hits as u64) / F::from_count(ys.len().max(1) as u64)
    };
    let train_accuracy = accuracy(&x_train, &y_train);
    let test_accuracy = accuracy(&x_test, &y_test);
    let probs: Vec<F> = x_test.iter().map(|x| logistic.predict_proba(x)).collect();
    let (roc, pr) = roc_pr(&probs, &y_test)?;
    Ok(MethodReport { categories, cfd: curves, logistic, roc, pr, train_accuracy, test_accuracy })
}

/// Smallest positive Novel-side TF-IDF score. Zero and negative scores are
/// raised to it before features are taken, the same way the clause scores
/// floor an absent word at one occurrence.
pub fn tfidf_floor<F: Real>(tfidf: &TfidfTable<F>) -> F {
    let min = tfidf
        .words()
        .filter_map(|w| tfidf.score(Class::Novel, w))
        .filter(|&s| s > F::zero())
        .fold(F::infinity(), F::min);
    if min.is_finite() {
        min
    } else {
        F::from_f64_lossy(crate::eval::LOG_FLOOR)
    }
}

/// Compares clause-score features with TF-IDF features over the clause
/// words. TF-IDF statistics and corpus categories come from the training
/// split.
pub fn evaluate<F: Real>(
    table: &ScoreTable<F>,
    bags: &WordBags,
    train: &[Document],
    test: &[Document],
    opts: &EvalOptions,
) -> Result<EvalReport<F>> {
    let stats = corpus_stats(train)?;
    let tfidf: TfidfTable<F> = tfidf_scores(&stats)?;
    let categories = match opts.categories {
        CategoryBasis::Corpus => categorize_by_corpus(&stats, bags.words()),
        CategoryBasis::Bags => categorize_words(bags),
    };
    let tm_score = |w: &str| table.score(w);
    let floor = tfidf_floor(&tfidf);
    let tfidf_score = |w: &str| tfidf.score(Class::Novel, w).map(|s| s.max(floor));
    let (tm, tf) = rayon::join(
        || method_report(&tm_score, &categories, train, test, opts.logistic),
        || method_report(&tfidf_score, &categories, train, test, opts.logistic),
    );
    Ok(EvalReport {
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        train_docs: train.len(),
        test_docs: test.len(),
        tm: tm?,
        tfidf: tf?,
    })
}

#[derive(Debug, Clone)]
pub struct Experiment<F> {
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub trained: TrainedScores<F>,
    pub report: EvalReport<F>,
}

/// Stratified split, training on the train side, evaluation on the test side.
pub fn run_experiment<F: Real>(docs: &[Document], cfg: &ExperimentConfig) -> Result<Experiment<F>> {
    let labels: Vec<Class> = docs.iter().map(|d| d.label).collect();
    let (train_idx, test_idx) = stratified_split(&labels, cfg.test_fraction, cfg.split_seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| docs[i].clone()).collect::<Vec<_>>();
    let (train, test) = (pick(&train_idx), pick(&test_idx));
    let trained = train_scores(&train, cfg)?;
    let report = evaluate(&trained.table, &trained.bags, &train, &test, &cfg.eval)?;
    Ok(Experiment { train_idx, test_idx, trained, report })
}
