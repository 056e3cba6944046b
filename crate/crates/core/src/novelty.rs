//! Word bags, per-word novelty scores and clause co-occurrence scores.
//!
//! Clause words are routed into a Known bag and a Novel bag: plain words of
//! a clause that votes for a class describe that class, negated words
//! describe the other one. A word's novelty score is its relative frequency
//! in the Novel bag divided by its relative frequency in the Known bag.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::Class;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tsetlin::{ExtractedClause, Polarity};

/// Multisets of clause words on the Known and Novel side.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordBags {
    bags: [BTreeMap<String, u64>; 2],
    totals: [u64; 2],
}

/// Bag receiving the plain words of a clause; negated words go to the other.
pub fn plain_destination(class: Class, polarity: Polarity) -> Class {
    match polarity {
        Polarity::Positive => class,
        Polarity::Negative => class.other(),
    }
}

impl WordBags {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, class: Class, word: &str, count: u64) {
        if count == 0 {
            return;
        }
        *self.bags[class.index()].entry(word.to_string()).or_default() += count;
        self.totals[class.index()] += count;
    }

    pub fn add_clause(&mut self, clause: &ExtractedClause) {
        let dest = plain_destination(clause.class, clause.polarity);
        for w in &clause.plain_words {
            self.add(dest, w, 1);
        }
        for w in &clause.negated_words {
            self.add(dest.other(), w, 1);
        }
    }

    /// Sum of two partial bag sets. Associative and commutative.
    pub fn merge(mut self, other: &WordBags) -> WordBags {
        for class in Class::ALL {
            for (w, &n) in &other.bags[class.index()] {
                self.add(class, w, n);
            }
        }
        self
    }

    /// The same bags with the Known and Novel sides exchanged.
    pub fn swapped(&self) -> WordBags {
        let [k, n] = self.bags.clone();
        WordBags { bags: [n, k], totals: [self.totals[1], self.totals[0]] }
    }

    pub fn bag(&self, class: Class) -> &BTreeMap<String, u64> {
        &self.bags[class.index()]
    }

    pub fn total(&self, class: Class) -> u64 {
        self.totals[class.index()]
    }

    /// Raw (unsmoothed) frequency.
    pub fn frequency(&self, word: &str, class: Class) -> u64 {
        self.bags[class.index()].get(word).copied().unwrap_or(0)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.bags.iter().any(|b| b.contains_key(word))
    }

    /// Every word in either bag, sorted.
    pub fn words(&self) -> BTreeSet<&str> {
        self.bags.iter().flat_map(|b| b.keys().map(String::as_str)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.totals == [0, 0]
    }
}

/// Routes the words of every clause into the two bags, one count per
/// clause membership.
pub fn build_word_bags(clauses: &[ExtractedClause]) -> WordBags {
    let mut bags = WordBags::new();
    for c in clauses {
        bags.add_clause(c);
    }
    bags
}

/// Scoring switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringOptions {
    /// Treat every bag word as having frequency at least 1 in both bags.
    /// The bag totals are never adjusted.
    pub smoothing: bool,
}

impl Default for ScoringOptions {
    fn default() -> Self {
        Self { smoothing: true }
    }
}

/// Relative frequency of `word` in the bag of `class`.
pub fn relative_frequency<F: Real>(bags: &WordBags, word: &str, class: Class, opts: ScoringOptions) -> Result<F> {
    if !bags.contains(word) {
        return Err(Error::UnseenWord(word.to_string()));
    }
    let total = bags.total(class);
    if total == 0 {
        return Err(Error::UntrainedDescription);
    }
    let mut f = bags.frequency(word, class);
    if opts.smoothing {
        f = f.max(1);
    }
    Ok(F::from_count(f) / F::from_count(total))
}

/// One row of a [`ScoreTable`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WordScore<F> {
    pub freq_known: u64,
    pub freq_novel: u64,
    pub p_known: F,
    pub p_novel: F,
    pub score: F,
}

/// Novelty score of every word captured by a clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable<F> {
    entries: BTreeMap<String, WordScore<F>>,
    options: ScoringOptions,
}

impl<F: Real> ScoreTable<F> {
    pub fn get(&self, word: &str) -> Option<&WordScore<F>> {
        self.entries.get(word)
    }

    pub fn score(&self, word: &str) -> Option<F> {
        self.entries.get(word).map(|e| e.score)
    }

    pub fn rel_freq(&self, word: &str, class: Class) -> Option<F> {
        self.entries.get(word).map(|e| match class {
            Class::Known => e.p_known,
            Class::Novel => e.p_novel,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn options(&self) -> ScoringOptions {
        self.options
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &WordScore<F>)> {
        self.entries.iter().map(|(w, e)| (w.as_str(), e))
    }

    /// Rows by descending score, then by word.
    pub fn ranked(&self) -> Vec<(&str, &WordScore<F>)> {
        let mut rows: Vec<_> = self.iter().collect();
        rows.sort_by(|a, b| b.1.score.partial_cmp(&a.1.score).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(b.0)));
        rows
    }

    /// CSV `word,F_K,F_N,p_K,p_N,score`, highest score first.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["word", "F_K", "F_N", "p_K", "p_N", "score"])?;
        for (word, e) in self.ranked() {
            w.write_record([
                word.to_string(),
                e.freq_known.to_string(),
                e.freq_novel.to_string(),
                e.p_known.to_string(),
                e.p_novel.to_string(),
                e.score.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<scores>", e))?;
        Ok(())
    }
}

/// Scores every bag word by `p_novel / p_known`.
///
/// With smoothing (the default) every ratio is finite and positive. Without
/// it, a word missing from the Novel bag scores 0 and a word missing from
/// the Known bag scores infinity.
pub fn novelty_scores<F: Real>(bags: &WordBags, opts: ScoringOptions) -> Result<ScoreTable<F>> {
    if bags.total(Class::Known) == 0 || bags.total(Class::Novel) == 0 {
        return Err(Error::UntrainedDescription);
    }
    let mut entries = BTreeMap::new();
    for word in bags.words() {
        let p_known: F = relative_frequency(bags, word, Class::Known, opts)?;
        let p_novel: F = relative_frequency(bags, word, Class::Novel, opts)?;
        let score = if p_known > F::zero() {
            p_novel / p_known
        } else {
            F::infinity()
        };
        entries.insert(
            word.to_string(),
            WordScore {
                freq_known: bags.frequency(word, Class::Known),
                freq_novel: bags.frequency(word, Class::Novel),
                p_known,
                p_novel,
                score,
            },
        );
    }
    Ok(ScoreTable { entries, options: opts })
}

/// How per-token scores combine into a document score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    #[default]
    MeanLog,
    SumLog,
    Max,
    FractionAboveOne,
}

impl std::str::FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean_log" => Ok(Aggregator::MeanLog),
            "sum_log" => Ok(Aggregator::SumLog),
            "max" => Ok(Aggregator::Max),
            "fraction_above_one" => Ok(Aggregator::FractionAboveOne),
            other => Err(Error::malformed("aggregator", other)),
        }
    }
}

impl Aggregator {
    /// `None` for an empty slice.
    pub fn apply<F: Real>(self, scores: &[F]) -> Option<F> {
        if scores.is_empty() {
            return None;
        }
        let n = F::from_count(scores.len() as u64);
        Some(match self {
            Aggregator::MeanLog => scores.iter().map(|s| s.ln()).sum::<F>() / n,
            Aggregator::SumLog => scores.iter().map(|s| s.ln()).sum(),
            Aggregator::Max => scores.iter().copied().fold(F::neg_infinity(), F::max),
            Aggregator::FractionAboveOne => {
                F::from_count(scores.iter().filter(|&&s| s > F::one()).count() as u64) / n
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocumentScore<F> {
    /// Scored tokens in document order, repeats included.
    pub per_word: Vec<(String, F)>,
    /// Tokens with no score.
    pub unseen: Vec<String>,
    /// `None` when no token is scored.
    pub aggregate: Option<F>,
}

pub fn score_document<F: Real, S: AsRef<str>>(tokens: &[S], table: &ScoreTable<F>, aggregator: Aggregator) -> DocumentScore<F> {
    let mut per_word = Vec::new();
    let mut unseen = Vec::new();
    for t in tokens {
        let t = t.as_ref();
        match table.score(t) {
            Some(s) => per_word.push((t.to_string(), s)),
            None => unseen.push(t.to_string()),
        }
    }
    let scores: Vec<F> = per_word.iter().map(|(_, s)| *s).collect();
    DocumentScore { aggregate: aggregator.apply(&scores), per_word, unseen }
}

/// Which individual probabilities divide the joint clause frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextMode {
    /// Bag relative frequencies of the class.
    #[default]
    BagFrequency,
    /// Fraction of the class's clauses containing the word.
    ClauseFrequency,
}

impl std::str::FromStr for ContextMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bag" | "bag_frequency" | "literal" => Ok(ContextMode::BagFrequency),
            "clause" | "clause_frequency" | "consistent" => Ok(ContextMode::ClauseFrequency),
            other => Err(Error::malformed("context mode", other)),
        }
    }
}

/// Plain-word co-occurrence across the clauses of one class, kept as
/// per-word sorted clause lists so pair counts are symmetric by
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseCooccurrence {
    class: Class,
    clause_count: u64,
    postings: BTreeMap<String, Vec<u32>>,
}

impl ClauseCooccurrence {
    pub fn class(&self) -> Class {
        self.class
    }

    /// Denominator `m` of the joint frequency.
    pub fn clause_count(&self) -> u64 {
        self.clause_count
    }

    /// Replaces the clause count, e.g. with the full pool size including
    /// empty clauses. Must not be below the number of counted clauses.
    pub fn with_clause_count(mut self, m: u64) -> Result<Self> {
        let seen = self.postings.values().flat_map(|p| p.iter()).max().map_or(0, |&i| u64::from(i) + 1);
        if m < seen {
            return Err(Error::InvalidParameter(format!("clause count {m} below {seen}")));
        }
        self.clause_count = m;
        Ok(self)
    }

    /// Number of clauses whose plain words include `word`.
    pub fn word_count(&self, word: &str) -> u64 {
        self.postings.get(word).map_or(0, |p| p.len() as u64)
    }

    /// Number of clauses whose plain words include both words. A self-pair
    /// counts the clauses containing the word.
    pub fn count(&self, w1: &str, w2: &str) -> u64 {
        let (Some(a), Some(b)) = (self.postings.get(w1), self.postings.get(w2)) else {
            return 0;
        };
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    pub fn joint_probability<F: Real>(&self, w1: &str, w2: &str) -> F {
        if self.clause_count == 0 {
            return F::zero();
        }
        F::from_count(self.count(w1, w2)) / F::from_count(self.clause_count)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }
}

/// Co-occurrence over the plain words of the clauses that vote for `class`,
/// i.e. the clauses whose plain words fill that class's bag. `m` is the
/// number of such clauses.
pub fn cooccurrence(clauses: &[ExtractedClause], class: Class) -> ClauseCooccurrence {
    let mut postings: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    let mut m = 0u32;
    for c in clauses.iter().filter(|c| plain_destination(c.class, c.polarity) == class) {
        let unique: BTreeSet<&String> = c.plain_words.iter().collect();
        for w in unique {
            postings.entry(w.clone()).or_default().push(m);
        }
        m += 1;
    }
    ClauseCooccurrence { class, clause_count: u64::from(m), postings }
}

/// Joint clause frequency of a word pair over the product of the individual
/// probabilities, within the class of `co`.
pub fn contextual_score<F: Real>(
    co: &ClauseCooccurrence,
    table: &ScoreTable<F>,
    s1: &str,
    s2: &str,
    mode: ContextMode,
) -> Result<F> {
    for w in [s1, s2] {
        if table.get(w).is_none() {
            return Err(Error::UnseenWord(w.to_string()));
        }
    }
    let joint: F = co.joint_probability(s1, s2);
    if joint == F::zero() {
        return Ok(F::zero());
    }
    let (p1, p2) = match mode {
        ContextMode::BagFrequency => (
            table.rel_freq(s1, co.class).unwrap_or_else(F::zero),
            table.rel_freq(s2, co.class).unwrap_or_else(F::zero),
        ),
        ContextMode::ClauseFrequency => (co.joint_probability(s1, s1), co.joint_probability(s2, s2)),
    };
    let denom = p1 * p2;
    if denom == F::zero() {
        return Err(Error::InvalidParameter(format!("zero probability for pair ({s1}, {s2})")));
    }
    Ok(joint / denom)
}

/// Upper-triangular CSV of contextual scores for `words`, diagonal included.
pub fn write_context_matrix<F: Real, W: Write>(
    words: &[String],
    co: &ClauseCooccurrence,
    table: &ScoreTable<F>,
    mode: ContextMode,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["word".to_string()];
    header.extend(words.iter().cloned());
    w.write_record(&header)?;
    for (i, a) in words.iter().enumerate() {
        let mut row = vec![a.clone()];
        for (j, b) in words.iter().enumerate() {
            if j < i {
                row.push(String::new());
            } else {
                row.push(contextual_score(co, table, a, b, mode)?.to_string());
            }
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<context>", e))?;
    Ok(())
}
