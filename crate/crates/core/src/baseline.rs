//! TF-IDF baseline with per-class term frequency and corpus-wide inverse
//! document frequency:
//!
//! ```text
//! tfidf(c, s) = F_s^c / F^c * log2(|D| / (|D_s| + 1))
//! ```
//!
//! The IDF factor goes negative for a word present in every document; it is
//! kept as is.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{Class, CorpusStats};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfTable<F> {
    idf: BTreeMap<String, F>,
    tf: [BTreeMap<String, F>; 2],
}

/// `log2(|D| / (|D_s| + 1))`.
pub fn idf<F: Real>(doc_count: u64, containing: u64) -> F {
    (F::from_count(doc_count) / F::from_count(containing + 1)).log2()
}

impl<F: Real> TfidfTable<F> {
    pub fn idf(&self, word: &str) -> Option<F> {
        self.idf.get(word).copied()
    }

    /// Normalized term frequency; 0 for a corpus word absent from the class.
    pub fn tf(&self, class: Class, word: &str) -> Option<F> {
        self.idf.get(word)?;
        Some(self.tf[class.index()].get(word).copied().unwrap_or_else(F::zero))
    }

    /// `tf * idf`, or `None` for a word outside the corpus.
    pub fn score(&self, class: Class, word: &str) -> Option<F> {
        Some(self.tf(class, word)? * self.idf(word)?)
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.idf.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.idf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idf.is_empty()
    }

    /// CSV `word,tf_known,tf_novel,idf,score_known,score_novel`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["word", "tf_known", "tf_novel", "idf", "score_known", "score_novel"])?;
        for word in self.words() {
            let get = |v: Option<F>| v.unwrap_or_else(F::zero).to_string();
            w.write_record([
                word.to_string(),
                get(self.tf(Class::Known, word)),
                get(self.tf(Class::Novel, word)),
                get(self.idf(word)),
                get(self.score(Class::Known, word)),
                get(self.score(Class::Novel, word)),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<tfidf>", e))?;
        Ok(())
    }
}

/// Per-class TF over each class's pooled tokens; IDF over all documents.
pub fn tfidf_scores<F: Real>(stats: &CorpusStats) -> Result<TfidfTable<F>> {
    for class in Class::ALL {
        if stats.doc_count_per_class[class.index()] == 0 || stats.total_freq(class) == 0 {
            return Err(Error::EmptyClass(class.to_string()));
        }
    }
    let idf_map = stats
        .doc_count_containing
        .iter()
        .map(|(w, &n)| (w.clone(), idf::<F>(stats.doc_count_total, n)))
        .collect();
    let tf = Class::ALL.map(|class| {
        let total = F::from_count(stats.total_freq(class));
        stats.per_class_term_freq[class.index()]
            .iter()
            .map(|(w, &n)| (w.clone(), F::from_count(n) / total))
            .collect()
    });
    Ok(TfidfTable { idf: idf_map, tf })
}

/// TF-IDF of the words of a single document against corpus-wide IDF. Words
/// unknown to the corpus are treated as occurring in no document.
pub fn tfidf_document<F: Real, S: AsRef<str>>(tokens: &[S], stats: &CorpusStats) -> BTreeMap<String, F> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for t in tokens {
        *counts.entry(t.as_ref()).or_default() += 1;
    }
    let total = F::from_count(tokens.len() as u64);
    counts
        .into_iter()
        .map(|(w, n)| {
            let tf = F::from_count(n) / total;
            (w.to_string(), tf * idf::<F>(stats.doc_count_total, stats.doc_freq(w)))
        })
        .collect()
}
