//! Word-level novelty scoring from the clauses of a two-class Tsetlin
//! Machine.
//!
//! The pipeline booleanizes Known and Novel documents over a shared
//! vocabulary ([`corpus`]), trains a clause-based classifier ([`tsetlin`]),
//! routes clause words into Known/Novel bags and scores each word by the
//! ratio of its relative frequencies ([`novelty`]), and compares the result
//! against per-class TF-IDF ([`baseline`]) with CFD, ROC and
//! precision-recall machinery ([`eval`]).

pub mod baseline;
pub mod bits;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod novelty;
pub mod rng;
pub mod scalar;
pub mod synthetic;
pub mod tsetlin;

pub use bits::Bits;
pub use corpus::{BoolDoc, Class, CorpusStats, Document, Preprocessor, RawDocument, Stoplist, Vocabulary};
pub use error::{Error, Result};
pub use scalar::Real;
pub use tsetlin::{ExtractedClause, FitTrace, Polarity, TmParams, TsetlinMachine};

pub use baseline::TfidfTable;
pub use eval::{EvalReport, LogisticModel};
pub use experiment::{run_experiment, Experiment, ExperimentConfig};
pub use novelty::{ScoreTable, WordBags};

pub type ScoreTable64 = ScoreTable<f64>;
pub type ScoreTable32 = ScoreTable<f32>;
pub type TfidfTable64 = TfidfTable<f64>;
pub type TfidfTable32 = TfidfTable<f32>;
pub type EvalReport64 = EvalReport<f64>;
pub type EvalReport32 = EvalReport<f32>;
pub type Experiment64 = Experiment<f64>;
pub type Experiment32 = Experiment<f32>;
