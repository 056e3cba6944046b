//! Text ingestion: tokenization, stopword removal, stemming, vocabulary
//! construction and booleanization into presence bit vectors.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bits::Bits;
use crate::error::{Error, Result};

/// The two document groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Known,
    Novel,
}

impl Class {
    pub const ALL: [Class; 2] = [Class::Known, Class::Novel];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Class::Known => 0,
            Class::Novel => 1,
        }
    }

    #[inline]
    pub fn other(self) -> Class {
        match self {
            Class::Known => Class::Novel,
            Class::Novel => Class::Known,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Class::Known => "known",
            Class::Novel => "novel",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "known" | "k" | "0" => Ok(Class::Known),
            "novel" | "n" | "1" => Ok(Class::Novel),
            other => Err(Error::malformed("class label", other)),
        }
    }
}

/// Splits text into lowercase ASCII-alphabetic tokens. Text is transliterated
/// to ASCII first; every other character is a separator.
pub fn tokenize(text: &str) -> Vec<String> {
    let folded = deunicode::deunicode(text);
    folded
        .split(|c: char| !c.is_ascii_alphabetic())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_ascii_lowercase())
        .collect()
}

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// A set of lowercase words removed during normalization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist {
    words: HashSet<String>,
}

impl Stoplist {
    /// The bundled English list.
    pub fn english() -> Self {
        Self::parse(BUNDLED_STOPWORDS)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_ascii_lowercase)
            .collect();
        Self { words }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stoplist {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self { words: iter.into_iter().map(Into::into).collect() }
    }
}

const MIN_STEM: usize = 3;

fn is_vowel(b: u8) -> bool {
    matches!(b, b'a' | b'e' | b'i' | b'o' | b'u')
}

// "hitt" -> "hit", but "fall", "pass" and "buzz" keep their doubles.
fn undouble(base: &str) -> &str {
    let b = base.as_bytes();
    let n = b.len();
    if n > MIN_STEM && b[n - 1] == b[n - 2] && !is_vowel(b[n - 1]) && !matches!(b[n - 1], b'l' | b's' | b'z') {
        &base[..n - 1]
    } else {
        base
    }
}

/// Light suffix stemmer for lowercase ASCII tokens: strips `-ing`, `-ed`,
/// `-es` (after sibilants) and `-s`, leaving stems of at least three letters.
pub fn stem(token: &str) -> String {
    if let Some(base) = token.strip_suffix("ing") {
        if base.len() >= MIN_STEM {
            return undouble(base).to_string();
        }
    }
    if let Some(base) = token.strip_suffix("ed") {
        if base.len() >= MIN_STEM {
            return undouble(base).to_string();
        }
    }
    if let Some(base) = token.strip_suffix("es") {
        let sibilant = ["ss", "x", "z", "ch", "sh"].iter().any(|s| base.ends_with(s));
        if sibilant && base.len() >= MIN_STEM {
            return base.to_string();
        }
    }
    if let Some(base) = token.strip_suffix('s') {
        if !base.ends_with('s') && base.len() >= MIN_STEM {
            return base.to_string();
        }
    }
    token.to_string()
}

/// Removes stopwords and stems what remains, preserving order.
pub fn normalize(tokens: &[String], stoplist: &Stoplist) -> Vec<String> {
    normalize_with(tokens, stoplist, true)
}

pub fn normalize_with(tokens: &[String], stoplist: &Stoplist, stemming: bool) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !stoplist.contains(t))
        .map(|t| if stemming { stem(t) } else { t.clone() })
        .collect()
}

/// Tokenizer and normalizer settings bundled together.
#[derive(Debug, Clone)]
pub struct Preprocessor {
    pub stoplist: Stoplist,
    pub stemming: bool,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Self { stoplist: Stoplist::english(), stemming: true }
    }
}

impl Preprocessor {
    pub fn process(&self, text: &str) -> Vec<String> {
        normalize_with(&tokenize(text), &self.stoplist, self.stemming)
    }

    pub fn document(&self, raw: &RawDocument) -> Document {
        Document { id: raw.id.clone(), label: raw.label, tokens: self.process(&raw.text) }
    }
}

/// A labeled document as loaded from disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub label: Class,
    pub text: String,
}

/// A labeled, normalized token list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub label: Class,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, label: Class, tokens: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { id: id.into(), label, tokens: tokens.into_iter().map(Into::into).collect() }
    }
}

/// Bidirectional word/feature-index map. Words are sorted lexicographically
/// and indices are dense.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds from an arbitrary word collection; duplicates are collapsed
    /// and the result is sorted.
    pub fn from_words(words: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let set: BTreeSet<String> = words.into_iter().map(Into::into).collect();
        let words: Vec<String> = set.into_iter().collect();
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Self { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, index: usize) -> Option<&str> {
        self.words.get(index).map(String::as_str)
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Presence bit vector for a token list; out-of-vocabulary tokens are
    /// ignored.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Bits {
        Bits::from_indices(self.len(), tokens.iter().filter_map(|t| self.index_of(t.as_ref())))
    }

    /// Hex SHA-256 over the newline-joined word list.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        for w in &self.words {
            hasher.update(w.as_bytes());
            hasher.update(b"\n");
        }
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// One word per line; the line number is the feature index.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for w in &self.words {
            writeln!(out, "{w}")?;
        }
        out.flush()
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut words = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::io("<vocabulary>", e))?;
            let word = line.trim_end_matches('\r');
            if word.is_empty() {
                return Err(Error::malformed("vocabulary", format!("empty line {}", lineno + 1)));
            }
            words.push(word.to_string());
        }
        let vocab = Self::from_words(words.iter().cloned());
        if vocab.words != words {
            return Err(Error::malformed("vocabulary", "words must be unique and sorted"));
        }
        Ok(vocab)
    }
}

/// Options controlling vocabulary construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VocabularyOptions {
    pub min_df: usize,
    pub max_features: Option<usize>,
}

impl Default for VocabularyOptions {
    fn default() -> Self {
        Self { min_df: 1, max_features: None }
    }
}

/// Vocabulary of every token occurring in at least `min_df` documents.
pub fn build_vocabulary<D: AsRef<[String]>>(docs: &[D], min_df: usize) -> Result<Vocabulary> {
    build_vocabulary_with(docs, VocabularyOptions { min_df, max_features: None })
}

pub fn build_vocabulary_with<D: AsRef<[String]>>(docs: &[D], opts: VocabularyOptions) -> Result<Vocabulary> {
    if opts.min_df == 0 {
        return Err(Error::InvalidParameter("min_df must be at least 1".into()));
    }
    if docs.is_empty() || docs.iter().all(|d| d.as_ref().is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        let unique: BTreeSet<&str> = doc.as_ref().iter().map(String::as_str).collect();
        for w in unique {
            *df.entry(w).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = df.into_iter().filter(|&(_, n)| n >= opts.min_df).collect();
    if let Some(cap) = opts.max_features {
        // most frequent first, lexicographic among ties
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        kept.truncate(cap);
    }
    Ok(Vocabulary::from_words(kept.into_iter().map(|(w, _)| w)))
}

/// A document reduced to word presence over a vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolDoc {
    pub doc_id: String,
    pub label: Class,
    pub bits: Bits,
}

pub fn booleanize(doc: &Document, vocab: &Vocabulary) -> BoolDoc {
    BoolDoc { doc_id: doc.id.clone(), label: doc.label, bits: vocab.encode(&doc.tokens) }
}

#[derive(Debug, Serialize, Deserialize)]
struct BoolDocRow {
    doc_id: String,
    label: Class,
    indices: String,
}

/// CSV with columns `doc_id,label,indices`; indices are `;`-joined.
pub fn write_booldocs<W: Write>(docs: &[BoolDoc], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for d in docs {
        let indices = d.bits.ones().map(|i| i.to_string()).collect::<Vec<_>>().join(";");
        w.serialize(BoolDocRow { doc_id: d.doc_id.clone(), label: d.label, indices })?;
    }
    w.flush().map_err(|e| Error::io("<booldocs>", e))?;
    Ok(())
}

pub fn read_booldocs<R: Read>(input: R, width: usize) -> Result<Vec<BoolDoc>> {
    let mut r = csv::Reader::from_reader(input);
    let mut docs = Vec::new();
    for row in r.deserialize() {
        let row: BoolDocRow = row?;
        let mut bits = Bits::zeros(width);
        for part in row.indices.split(';').filter(|p| !p.is_empty()) {
            let i: usize = part
                .parse()
                .map_err(|_| Error::malformed("booldoc indices", part.to_string()))?;
            if i >= width {
                return Err(Error::WidthMismatch { expected: width, actual: i + 1 });
            }
            bits.set(i, true);
        }
        docs.push(BoolDoc { doc_id: row.doc_id, label: row.label, bits });
    }
    Ok(docs)
}

/// Global and per-class frequency counts over a labeled corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub doc_count_total: u64,
    pub doc_count_per_class: [u64; 2],
    pub doc_count_containing: BTreeMap<String, u64>,
    pub per_class_term_freq: [BTreeMap<String, u64>; 2],
    pub per_class_total_freq: [u64; 2],
}

impl CorpusStats {
    pub fn term_freq(&self, class: Class, word: &str) -> u64 {
        self.per_class_term_freq[class.index()].get(word).copied().unwrap_or(0)
    }

    pub fn total_freq(&self, class: Class) -> u64 {
        self.per_class_total_freq[class.index()]
    }

    pub fn doc_freq(&self, word: &str) -> u64 {
        self.doc_count_containing.get(word).copied().unwrap_or(0)
    }

    /// All words seen anywhere in the corpus, sorted.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.doc_count_containing.keys().map(String::as_str)
    }
}

/// Term frequencies count every occurrence; document frequencies count
/// presence once per document.
pub fn corpus_stats(docs: &[Document]) -> Result<CorpusStats> {
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut stats = CorpusStats::default();
    for doc in docs {
        let c = doc.label.index();
        stats.doc_count_total += 1;
        stats.doc_count_per_class[c] += 1;
        for t in &doc.tokens {
            *stats.per_class_term_freq[c].entry(t.clone()).or_default() += 1;
            stats.per_class_total_freq[c] += 1;
        }
        let unique: BTreeSet<&String> = doc.tokens.iter().collect();
        for t in unique {
            *stats.doc_count_containing.entry(t.clone()).or_default() += 1;
        }
    }
    Ok(stats)
}

fn read_lossy(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Loads one document per regular file from class-per-folder layouts such
/// as BBC Sport (`bbcsport/cricket/001.txt`) or 20 Newsgroups
/// (`20news/rec.sport.baseball/104470`). Hidden files are skipped; files
/// are read in name order. Document ids are `<folder>/<file>`.
pub fn load_class_dirs(dirs: &[(PathBuf, Class)]) -> Result<Vec<RawDocument>> {
    let mut docs = Vec::new();
    for (dir, label) in dirs {
        let group = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .filter(|p| !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
            .collect();
        entries.sort();
        for path in entries {
            let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            docs.push(RawDocument { id: format!("{group}/{name}"), label: *label, text: read_lossy(&path)? });
        }
    }
    Ok(docs)
}

#[derive(Debug, Deserialize)]
struct CsvDocRow {
    doc_id: String,
    label: String,
    text: String,
}

/// Loads a CSV with header `doc_id,label,text`.
pub fn load_csv<R: Read>(input: R) -> Result<Vec<RawDocument>> {
    let mut r = csv::Reader::from_reader(input);
    let mut docs = Vec::new();
    for row in r.deserialize() {
        let row: CsvDocRow = row?;
        docs.push(RawDocument { id: row.doc_id, label: row.label.parse()?, text: row.text });
    }
    Ok(docs)
}
