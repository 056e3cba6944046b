//! Evaluation machinery: word categories, cumulative frequency curves,
//! summary tables, document features, logistic regression and ROC /
//! precision-recall curves.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{Class, CorpusStats};
use crate::error::{Error, Result};
use crate::novelty::WordBags;
use crate::rng;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WordCategory {
    KnownOnly,
    NovelOnly,
    Shared,
}

impl WordCategory {
    pub const ALL: [WordCategory; 3] = [WordCategory::KnownOnly, WordCategory::NovelOnly, WordCategory::Shared];

    pub fn as_str(self) -> &'static str {
        match self {
            WordCategory::KnownOnly => "known_only",
            WordCategory::NovelOnly => "novel_only",
            WordCategory::Shared => "shared",
        }
    }
}

impl fmt::Display for WordCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Partition of the bag words by raw (unsmoothed) membership.
pub fn categorize_words(bags: &WordBags) -> BTreeMap<String, WordCategory> {
    bags.words()
        .into_iter()
        .map(|w| {
            let k = bags.frequency(w, Class::Known) > 0;
            let n = bags.frequency(w, Class::Novel) > 0;
            let cat = match (k, n) {
                (true, true) => WordCategory::Shared,
                (true, false) => WordCategory::KnownOnly,
                _ => WordCategory::NovelOnly,
            };
            (w.to_string(), cat)
        })
        .collect()
}

/// Partition of `words` by which classes' documents contain them.
/// Words absent from both classes are left out.
pub fn categorize_by_corpus<'a>(
    stats: &CorpusStats,
    words: impl IntoIterator<Item = &'a str>,
) -> BTreeMap<String, WordCategory> {
    words
        .into_iter()
        .filter_map(|w| {
            let k = stats.term_freq(Class::Known, w) > 0;
            let n = stats.term_freq(Class::Novel, w) > 0;
            let cat = match (k, n) {
                (true, true) => WordCategory::Shared,
                (true, false) => WordCategory::KnownOnly,
                (false, true) => WordCategory::NovelOnly,
                (false, false) => return None,
            };
            Some((w.to_string(), cat))
        })
        .collect()
}

/// Where word categories come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CategoryBasis {
    /// Which classes' training documents contain the word.
    #[default]
    Corpus,
    /// Which raw clause bags contain the word.
    Bags,
}

impl std::str::FromStr for CategoryBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corpus" => Ok(CategoryBasis::Corpus),
            "bags" => Ok(CategoryBasis::Bags),
            _ => Err(Error::InvalidParameter(format!("unknown category basis: {s}"))),
        }
    }
}

fn sorted_finite_order<F: Real>(values: &mut [F]) -> Result<()> {
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::malformed("scores", "NaN value"));
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    Ok(())
}

/// Empirical cumulative distribution `(v_k, k/n)` over ascending values.
/// With `dedup`, only the last point of each run of equal values is kept.
pub fn cfd<F: Real>(scores: &[F], dedup: bool) -> Result<Vec<(F, F)>> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("scores"));
    }
    let mut v = scores.to_vec();
    sorted_finite_order(&mut v)?;
    let n = F::from_count(v.len() as u64);
    let mut points: Vec<(F, F)> = Vec::with_capacity(v.len());
    for (k, &x) in v.iter().enumerate() {
        let frac = F::from_count(k as u64 + 1) / n;
        match points.last_mut() {
            Some(last) if dedup && last.0 == x => last.1 = frac,
            _ => points.push((x, frac)),
        }
    }
    Ok(points)
}

/// Fraction of the distribution strictly below `threshold`.
pub fn fraction_below<F: Real>(points: &[(F, F)], threshold: F) -> F {
    points.iter().take_while(|p| p.0 < threshold).last().map_or_else(F::zero, |p| p.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow<F> {
    pub count: usize,
    pub mean: F,
    /// Population standard deviation.
    pub std_dev: F,
}

/// Count, mean and population standard deviation.
pub fn summarize<F: Real>(scores: &[F]) -> Result<SummaryRow<F>> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("scores"));
    }
    let n = F::from_count(scores.len() as u64);
    let mean = scores.iter().copied().sum::<F>() / n;
    let var = scores.iter().map(|&s| (s - mean) * (s - mean)).sum::<F>() / n;
    Ok(SummaryRow { count: scores.len(), mean, std_dev: var.sqrt() })
}

/// Summary row per non-empty category.
pub fn summary_stats<F: Real>(by_category: &BTreeMap<WordCategory, Vec<F>>) -> BTreeMap<WordCategory, SummaryRow<F>> {
    by_category
        .iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(&c, v)| (c, summarize(v).expect("non-empty")))
        .collect()
}

/// Groups scores by category; words without a score are skipped.
pub fn scores_by_category<F: Real>(
    categories: &BTreeMap<String, WordCategory>,
    score: impl Fn(&str) -> Option<F>,
) -> BTreeMap<WordCategory, Vec<F>> {
    let mut out: BTreeMap<WordCategory, Vec<F>> = BTreeMap::new();
    for (w, &c) in categories {
        if let Some(s) = score(w) {
            out.entry(c).or_default().push(s);
        }
    }
    out
}

/// Number of per-document features.
pub const FEATURE_DIM: usize = 4;
pub const FEATURE_NAMES: [&str; FEATURE_DIM] = ["mean_log_score", "max_score", "fraction_above_one", "coverage"];

/// Aggregate word-score features of one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocFeatures<F> {
    /// Mean log score, max score, fraction of scored tokens above 1, and
    /// fraction of tokens that are scored.
    pub values: [F; FEATURE_DIM],
    pub label: Class,
}

/// Scores at or below this floor are clamped before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-6;

/// Features of a token list under an arbitrary word scorer. A document with
/// no scored token gets all-zero features.
pub fn doc_features<F: Real, S: AsRef<str>>(tokens: &[S], label: Class, score: impl Fn(&str) -> Option<F>) -> DocFeatures<F> {
    let scored: Vec<F> = tokens.iter().filter_map(|t| score(t.as_ref())).collect();
    if scored.is_empty() {
        return DocFeatures { values: [F::zero(); FEATURE_DIM], label };
    }
    let n = F::from_count(scored.len() as u64);
    let floor = F::from_f64_lossy(LOG_FLOOR);
    let mean_log = scored.iter().map(|&s| s.max(floor).ln()).sum::<F>() / n;
    let max = scored.iter().copied().fold(F::neg_infinity(), F::max);
    let above = F::from_count(scored.iter().filter(|&&s| s > F::one()).count() as u64) / n;
    let coverage = n / F::from_count(tokens.len() as u64);
    DocFeatures { values: [mean_log, max, above, coverage], label }
}

/// Per-dimension centering and scaling fitted on training features.
/// Zero-variance dimensions are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer<F> {
    pub kept: Vec<usize>,
    pub mean: Vec<F>,
    pub std_dev: Vec<F>,
}

impl<F: Real> Standardizer<F> {
    pub fn fit(rows: &[Vec<F>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::EmptyInput("features"))?;
        let n = F::from_count(rows.len() as u64);
        let mut s = Standardizer { kept: Vec::new(), mean: Vec::new(), std_dev: Vec::new() };
        for d in 0..dim {
            let mean = rows.iter().map(|r| r[d]).sum::<F>() / n;
            let var = rows.iter().map(|r| (r[d] - mean) * (r[d] - mean)).sum::<F>() / n;
            let sd = var.sqrt();
            if !sd.is_finite() || sd <= F::epsilon() * (F::one() + mean.abs()) {
                log::warn!("dropping zero-variance feature {d}");
                continue;
            }
            s.kept.push(d);
            s.mean.push(mean);
            s.std_dev.push(sd);
        }
        Ok(s)
    }

    pub fn transform(&self, row: &[F]) -> Vec<F> {
        self.kept.iter().enumerate().map(|(i, &d)| (row[d] - self.mean[i]) / self.std_dev[i]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self { epochs: 2000, learning_rate: 0.5, l2: 1e-4 }
    }
}

#[inline]
fn sigmoid<F: Real>(z: F) -> F {
    if z >= F::zero() {
        F::one() / (F::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (F::one() + e)
    }
}

/// Mean log-loss plus `l2/2 * |w|^2` (bias unpenalized). Labels are 0/1.
pub fn log_loss<F: Real>(weights: &[F], bias: F, xs: &[Vec<F>], ys: &[F], l2: F) -> F {
    let n = F::from_count(xs.len() as u64);
    let data: F = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| {
            let z = bias + weights.iter().zip(x).map(|(&w, &v)| w * v).sum::<F>();
            // log(1 + e^z) - y z, evaluated stably
            let softplus = if z > F::zero() { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - y * z
        })
        .sum::<F>()
        / n;
    let half = F::from_f64_lossy(0.5);
    data + half * l2 * weights.iter().map(|&w| w * w).sum::<F>()
}

/// Gradient of [`log_loss`] with respect to `(weights, bias)`.
pub fn log_loss_gradient<F: Real>(weights: &[F], bias: F, xs: &[Vec<F>], ys: &[F], l2: F) -> (Vec<F>, F) {
    let n = F::from_count(xs.len() as u64);
    let mut gw = vec![F::zero(); weights.len()];
    let mut gb = F::zero();
    for (x, &y) in xs.iter().zip(ys) {
        let z = bias + weights.iter().zip(x).map(|(&w, &v)| w * v).sum::<F>();
        let r = sigmoid(z) - y;
        for (g, &v) in gw.iter_mut().zip(x) {
            *g = *g + r * v;
        }
        gb = gb + r;
    }
    for (g, &w) in gw.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (gw, gb / n)
}

/// Logistic regression on standardized features; predicts P(Novel).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel<F> {
    pub standardizer: Standardizer<F>,
    pub weights: Vec<F>,
    pub bias: F,
}

impl<F: Real> LogisticModel<F> {
    pub fn predict_proba(&self, row: &[F]) -> F {
        let x = self.standardizer.transform(row);
        sigmoid(self.bias + self.weights.iter().zip(&x).map(|(&w, &v)| w * v).sum::<F>())
    }

    pub fn predict(&self, row: &[F]) -> Class {
        if self.predict_proba(row) > F::from_f64_lossy(0.5) {
            Class::Novel
        } else {
            Class::Known
        }
    }
}

/// Full-batch gradient descent on the regularized log-loss, starting from
/// zero weights.
pub fn fit_logistic<F: Real>(rows: &[Vec<F>], labels: &[Class], opts: LogisticOptions) -> Result<LogisticModel<F>> {
    if rows.len() != labels.len() {
        return Err(Error::InvalidParameter("feature and label counts differ".into()));
    }
    if !labels.contains(&Class::Known) || !labels.contains(&Class::Novel) {
        return Err(Error::BothClassesRequired);
    }
    let standardizer = Standardizer::fit(rows)?;
    let xs: Vec<Vec<F>> = rows.iter().map(|r| standardizer.transform(r)).collect();
    let ys: Vec<F> = labels.iter().map(|&l| if l == Class::Novel { F::one() } else { F::zero() }).collect();
    let lr = F::from_f64_lossy(opts.learning_rate);
    let l2 = F::from_f64_lossy(opts.l2);
    let mut weights = vec![F::zero(); standardizer.kept.len()];
    let mut bias = F::zero();
    for _ in 0..opts.epochs {
        let (gw, gb) = log_loss_gradient(&weights, bias, &xs, &ys, l2);
        for (w, g) in weights.iter_mut().zip(gw) {
            *w = *w - lr * g;
        }
        bias = bias - lr * gb;
    }
    Ok(LogisticModel { standardizer, weights, bias })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve<F> {
    /// `(false positive rate, true positive rate)` from `(0,0)` to `(1,1)`.
    pub points: Vec<(F, F)>,
    pub auc: F,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve<F> {
    /// `(recall, precision)` per threshold, highest threshold first.
    pub points: Vec<(F, F)>,
    pub average_precision: F,
}

/// ROC and precision-recall curves for scores where higher means Novel.
/// Equal scores form a single threshold.
pub fn roc_pr<F: Real>(scores: &[F], labels: &[Class]) -> Result<(RocCurve<F>, PrCurve<F>)> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidParameter("score and label counts differ".into()));
    }
    let pos = labels.iter().filter(|&&l| l == Class::Novel).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::BothClassesRequired);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::malformed("scores", "NaN value"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("no NaN"));

    let (p, n) = (F::from_count(pos as u64), F::from_count(neg as u64));
    let mut roc = vec![(F::zero(), F::zero())];
    let mut pr = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    let (mut auc, mut ap) = (F::zero(), F::zero());
    let mut prev_recall = F::zero();
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] == Class::Novel {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let tpr = F::from_count(tp) / p;
        let fpr = F::from_count(fp) / n;
        let (x0, y0) = *roc.last().expect("non-empty");
        auc = auc + (fpr - x0) * (tpr + y0) / F::from_count(2);
        roc.push((fpr, tpr));
        let precision = F::from_count(tp) / F::from_count(tp + fp);
        ap = ap + (tpr - prev_recall) * precision;
        prev_recall = tpr;
        pr.push((tpr, precision));
    }
    Ok((RocCurve { points: roc, auc }, PrCurve { points: pr, average_precision: ap }))
}

/// Stratified split of item indices into `(train, test)`. Each class
/// contributes `round(test_fraction * count)` items to the test side.
pub fn stratified_split(labels: &[Class], test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidParameter(format!("test fraction {test_fraction}")));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in Class::ALL {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng::stream(seed, &[0x5350_4c54, class.index() as u64]));
        let k = (test_fraction * idx.len() as f64).round() as usize;
        test.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Curves and fitted model for one scoring method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport<F> {
    pub categories: BTreeMap<WordCategory, SummaryRow<F>>,
    pub cfd: BTreeMap<WordCategory, Vec<(F, F)>>,
    pub logistic: LogisticModel<F>,
    pub roc: RocCurve<F>,
    pub pr: PrCurve<F>,
    pub train_accuracy: F,
    pub test_accuracy: F,
}

/// Full comparison of clause-based scores against TF-IDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<F> {
    pub feature_names: Vec<String>,
    pub train_docs: usize,
    pub test_docs: usize,
    pub tm: MethodReport<F>,
    pub tfidf: MethodReport<F>,
}

impl<F: Real + Serialize> EvalReport<F> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Writes a curve as a two-column CSV.
pub fn write_curve_csv<F: Real, W: std::io::Write>(points: &[(F, F)], header: [&str; 2], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for (a, b) in points {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<curve>", e))?;
    Ok(())
}
