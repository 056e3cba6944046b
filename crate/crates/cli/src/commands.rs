//! The six pipeline stages. Each reads earlier outputs from the output
//! directory and writes its own files there.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tm_novelty::baseline::tfidf_scores;
use tm_novelty::corpus::{
    booleanize, build_vocabulary, corpus_stats, load_class_dirs, load_csv, read_booldocs, write_booldocs,
};
use tm_novelty::eval::{stratified_split, write_curve_csv, MethodReport};
use tm_novelty::experiment::evaluate;
use tm_novelty::novelty::{
    build_word_bags, cooccurrence, novelty_scores, score_document, write_context_matrix, ScoreTable, WordBags,
};
use tm_novelty::tsetlin::{read_model, write_clause_dump, write_model};
use tm_novelty::{Class, Document, Preprocessor, Stoplist, TfidfTable64, TsetlinMachine, Vocabulary};

use crate::config::{RunConfig, CONFIG_FILE};
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;

pub const VOCAB_FILE: &str = "vocab.txt";
pub const DOCS_FILE: &str = "docs.csv";
pub const TRAIN_BOOL_FILE: &str = "train_bool.csv";
pub const TEST_BOOL_FILE: &str = "test_bool.csv";
pub const MODEL_FILE: &str = "model.tmnv";
pub const CLAUSES_FILE: &str = "clauses.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const BAGS_FILE: &str = "bags.csv";
pub const SCORES_FILE: &str = "scores.csv";
pub const DOC_SCORES_FILE: &str = "doc_scores.csv";
pub const TFIDF_FILE: &str = "tfidf.csv";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Split {
    Train,
    Test,
}

#[derive(Debug, Serialize, Deserialize)]
struct DocRow {
    doc_id: String,
    label: Class,
    split: Split,
    /// Space-joined normalized tokens.
    tokens: String,
}

fn csv_out(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::Writer::from_writer(w)
}

fn finish(mut w: csv::Writer<&mut dyn Write>, path: &Path) -> CliResult<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn open(path: &Path, what: &str) -> CliResult<BufReader<File>> {
    match File::open(path) {
        Ok(f) => Ok(BufReader::new(f)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(CliError::missing(what, path)),
        Err(e) => Err(CliError::io(path, e)),
    }
}

fn require_dir(out: &Path) -> CliResult<()> {
    if out.is_dir() {
        Ok(())
    } else {
        Err(CliError::missing("output directory (run ingest first)", out))
    }
}

fn load_vocab(out: &Path) -> CliResult<Vocabulary> {
    let path = out.join(VOCAB_FILE);
    Ok(Vocabulary::read_from(open(&path, "vocabulary")?)?)
}

/// Reads the split documents written by `ingest`.
fn load_docs(out: &Path) -> CliResult<(Vec<Document>, Vec<Document>)> {
    let path = out.join(DOCS_FILE);
    let mut r = csv::Reader::from_reader(open(&path, "document table")?);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for row in r.deserialize() {
        let row: DocRow = row?;
        let doc = Document::new(row.doc_id, row.label, row.tokens.split_whitespace());
        match row.split {
            Split::Train => train.push(doc),
            Split::Test => test.push(doc),
        }
    }
    Ok((train, test))
}

/// Loads the model and refuses it if it was trained on another vocabulary.
fn load_model(out: &Path, model_path: Option<&Path>) -> CliResult<(TsetlinMachine, Vocabulary)> {
    let path = model_path.map(Path::to_path_buf).unwrap_or_else(|| out.join(MODEL_FILE));
    if !path.is_file() {
        return Err(CliError::Missing(format!("model not found: {}", path.display())));
    }
    let (model, hash) = read_model(open(&path, "model")?)?;
    let vocab = load_vocab(out)?;
    let corpus = vocab.content_hash();
    if hash != corpus {
        return Err(tm_novelty::Error::VocabularyMismatch { model: hash, corpus }.into());
    }
    Ok((model, vocab))
}

struct Described {
    clauses: Vec<tm_novelty::ExtractedClause>,
    bags: WordBags,
    table: ScoreTable<f64>,
}

fn describe_model(model: &TsetlinMachine, vocab: &Vocabulary, cfg: &RunConfig) -> CliResult<Described> {
    let clauses = model.extract_clauses(vocab)?;
    let bags = build_word_bags(&clauses);
    let table = novelty_scores(&bags, cfg.scoring.options())?;
    Ok(Described { clauses, bags, table })
}

pub fn ingest(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    cfg.validate()?;
    cfg.validate_inputs()?;
    let raw = match &cfg.corpus.csv {
        Some(p) => load_csv(open(p, "corpus CSV")?)?,
        None => {
            let dirs: Vec<(PathBuf, Class)> = cfg
                .corpus
                .known
                .iter()
                .map(|p| (p.clone(), Class::Known))
                .chain(cfg.corpus.novel.iter().map(|p| (p.clone(), Class::Novel)))
                .collect();
            load_class_dirs(&dirs)?
        }
    };
    let stoplist = match &cfg.preprocess.stoplist {
        Some(p) => Stoplist::from_file(p)?,
        None => Stoplist::english(),
    };
    let pre = Preprocessor { stoplist, stemming: cfg.preprocess.stemming };
    let docs: Vec<Document> = raw.iter().map(|r| pre.document(r)).collect();
    let labels: Vec<Class> = docs.iter().map(|d| d.label).collect();
    let (train_idx, test_idx) = stratified_split(&labels, cfg.split.test_fraction, cfg.split.seed)?;
    let mut split = vec![Split::Train; docs.len()];
    for &i in &test_idx {
        split[i] = Split::Test;
    }
    let train_tokens: Vec<&[String]> = train_idx.iter().map(|&i| docs[i].tokens.as_slice()).collect();
    let vocab = build_vocabulary(&train_tokens, cfg.preprocess.min_df)?;
    let bool_of = |idx: &[usize]| idx.iter().map(|&i| booleanize(&docs[i], &vocab)).collect::<Vec<_>>();

    let dir = OutputDir::lock(out)?;
    let mut stored = cfg.clone();
    stored.output = Some(out.to_path_buf());
    let text = stored.to_toml()?;
    dir.write(CONFIG_FILE, |w| w.write_all(text.as_bytes()).map_err(|e| CliError::io(out, e)))?;
    dir.write(VOCAB_FILE, |w| vocab.write_to(w).map_err(|e| CliError::io(out, e)))?;
    let docs_path = dir.path(DOCS_FILE);
    dir.write(DOCS_FILE, |w| {
        let mut csv = csv_out(w);
        for (d, s) in docs.iter().zip(&split) {
            csv.serialize(DocRow { doc_id: d.id.clone(), label: d.label, split: *s, tokens: d.tokens.join(" ") })?;
        }
        finish(csv, &docs_path)
    })?;
    dir.write(TRAIN_BOOL_FILE, |w| Ok(write_booldocs(&bool_of(&train_idx), w)?))?;
    dir.write(TEST_BOOL_FILE, |w| Ok(write_booldocs(&bool_of(&test_idx), w)?))?;
    println!(
        "ingested {} documents ({} train, {} test), vocabulary of {} words",
        docs.len(),
        train_idx.len(),
        test_idx.len(),
        vocab.len()
    );
    Ok(())
}

pub fn train(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    cfg.validate()?;
    require_dir(out)?;
    let vocab = load_vocab(out)?;
    let docs = read_booldocs(open(&out.join(TRAIN_BOOL_FILE), "training documents")?, vocab.len())?;
    let dir = OutputDir::lock(out)?;
    let mut model = TsetlinMachine::new(cfg.model.params(), vocab.len())?;
    let trace = model.fit(&docs, cfg.model.epochs)?;
    let clauses = model.extract_clauses(&vocab)?;
    let hash = vocab.content_hash();
    dir.write(MODEL_FILE, |w| Ok(write_model(&model, &hash, w)?))?;
    dir.write(CLAUSES_FILE, |w| Ok(write_clause_dump(&clauses, w)?))?;
    let trace_path = dir.path(TRACE_FILE);
    dir.write(TRACE_FILE, |w| {
        let mut csv = csv_out(w);
        csv.write_record(["epoch", "accuracy"])?;
        for (i, a) in trace.accuracy.iter().enumerate() {
            csv.write_record([(i + 1).to_string(), a.to_string()])?;
        }
        finish(csv, &trace_path)
    })?;
    println!(
        "trained {} epochs on {} documents, final training accuracy {:.4}, {} non-empty clauses",
        cfg.model.epochs,
        docs.len(),
        trace.last().unwrap_or(0.0),
        clauses.len()
    );
    Ok(())
}

pub fn describe(cfg: &RunConfig, out: &Path, model_path: Option<&Path>) -> CliResult<()> {
    let (model, vocab) = load_model(out, model_path)?;
    let d = describe_model(&model, &vocab, cfg)?;
    let docs = if out.join(DOCS_FILE).is_file() { Some(load_docs(out)?) } else { None };
    let dir = OutputDir::lock(out)?;
    let bags_path = dir.path(BAGS_FILE);
    dir.write(BAGS_FILE, |w| {
        let mut csv = csv_out(w);
        csv.write_record(["word", "F_K", "F_N"])?;
        for word in d.bags.words() {
            csv.write_record([
                word.to_string(),
                d.bags.frequency(word, Class::Known).to_string(),
                d.bags.frequency(word, Class::Novel).to_string(),
            ])?;
        }
        finish(csv, &bags_path)
    })?;
    dir.write(SCORES_FILE, |w| Ok(d.table.write_csv(w)?))?;
    if let Some((train, test)) = docs {
        let path = dir.path(DOC_SCORES_FILE);
        dir.write(DOC_SCORES_FILE, |w| {
            let mut csv = csv_out(w);
            csv.write_record(["doc_id", "label", "split", "score", "scored", "unseen"])?;
            for (split, docs) in [("train", &train), ("test", &test)] {
                for doc in docs {
                    let s = score_document(&doc.tokens, &d.table, cfg.scoring.aggregator);
                    csv.write_record([
                        doc.id.clone(),
                        doc.label.to_string(),
                        split.to_string(),
                        s.aggregate.map(|a| a.to_string()).unwrap_or_default(),
                        s.per_word.len().to_string(),
                        s.unseen.len().to_string(),
                    ])?;
                }
            }
            finish(csv, &path)
        })?;
    }
    println!(
        "{} clauses, {} scored words (bag totals {} known, {} novel)",
        d.clauses.len(),
        d.table.len(),
        d.bags.total(Class::Known),
        d.bags.total(Class::Novel)
    );
    Ok(())
}

pub fn context(cfg: &RunConfig, out: &Path, model_path: Option<&Path>, words: &[String], class: Class) -> CliResult<()> {
    if words.is_empty() {
        return Err(CliError::Validation("no words given".into()));
    }
    let (model, vocab) = load_model(out, model_path)?;
    let d = describe_model(&model, &vocab, cfg)?;
    let co = cooccurrence(&d.clauses, class);
    let mut body = Vec::new();
    write_context_matrix(words, &co, &d.table, cfg.scoring.context, &mut body)?;
    let dir = OutputDir::lock(out)?;
    let name = format!("context_{class}.csv");
    dir.write(&name, |w| w.write_all(&body).map_err(|e| CliError::io(out, e)))?;
    println!("{} words over {} {class} clauses", words.len(), co.clause_count());
    Ok(())
}

pub fn tfidf(out: &Path) -> CliResult<()> {
    require_dir(out)?;
    let (train, _) = load_docs(out)?;
    let table: TfidfTable64 = tfidf_scores(&corpus_stats(&train)?)?;
    let dir = OutputDir::lock(out)?;
    dir.write(TFIDF_FILE, |w| Ok(table.write_csv(w)?))?;
    println!("{} words scored from {} training documents", table.len(), train.len());
    Ok(())
}

fn write_method(dir: &OutputDir, name: &str, m: &MethodReport<f64>) -> CliResult<()> {
    dir.write(&format!("roc_{name}.csv"), |w| Ok(write_curve_csv(&m.roc.points, ["fpr", "tpr"], w)?))?;
    dir.write(&format!("pr_{name}.csv"), |w| Ok(write_curve_csv(&m.pr.points, ["recall", "precision"], w)?))?;
    for (cat, points) in &m.cfd {
        dir.write(&format!("cfd_{name}_{cat}.csv"), |w| Ok(write_curve_csv(points, ["score", "cumulative"], w)?))?;
    }
    Ok(())
}

pub fn eval(cfg: &RunConfig, out: &Path, model_path: Option<&Path>) -> CliResult<()> {
    cfg.validate()?;
    let (model, vocab) = load_model(out, model_path)?;
    let d = describe_model(&model, &vocab, cfg)?;
    let (train, test) = load_docs(out)?;
    let report = evaluate(&d.table, &d.bags, &train, &test, &cfg.eval_options())?;
    let json = report.to_json()?;
    let dir = OutputDir::lock(out)?;
    dir.write(REPORT_FILE, |w| w.write_all(json.as_bytes()).map_err(|e| CliError::io(out, e)))?;
    write_method(&dir, "tm", &report.tm)?;
    write_method(&dir, "tfidf", &report.tfidf)?;
    println!(
        "test AUC {:.4} (clauses) vs {:.4} (tf-idf); average precision {:.4} vs {:.4}",
        report.tm.roc.auc, report.tfidf.roc.auc, report.tm.pr.average_precision, report.tfidf.pr.average_precision
    );
    Ok(())
}
