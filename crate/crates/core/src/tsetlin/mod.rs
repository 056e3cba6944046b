//! Two-class Tsetlin Machine over presence bit vectors.
//!
//! Each class owns a pool of `m` clauses, half voting for the class and half
//! against it. Training gives the document's own class Type I feedback on
//! positive clauses and Type II on negative ones, gated per clause by
//! `(T - v) / 2T`; the other class gets the mirrored treatment gated by
//! `(T + v) / 2T`, where `v` is the clamped class vote.

mod clause;
mod io;

pub use clause::{Clause, EvalMode, Polarity, TaState};
pub use io::{read_model, write_clause_dump, write_model, MODEL_FORMAT_VERSION};

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::corpus::{BoolDoc, Class, Vocabulary};
use crate::error::{Error, Result};
use crate::rng;

const SHUFFLE_STREAM: u64 = 0x5348_5546;
const FEEDBACK_STREAM: u64 = 0x4645_4544;
const INIT_STREAM: u64 = 0x494e_4954;

/// Pools at least this large are updated on the rayon pool.
const PARALLEL_MIN_CLAUSES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Every automaton starts at `N`, one step short of Include.
    Boundary,
    /// Each automaton starts uniformly at `N` or `N + 1`.
    RandomBoundary,
}

/// Hyperparameters of the machine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmParams {
    /// Clauses per class (`m`), even.
    pub clauses: usize,
    /// Voting margin `T`.
    pub threshold: u32,
    /// Sensitivity `s`.
    pub specificity: f64,
    /// States per automaton action `N`.
    pub states_per_action: u16,
    pub seed: u64,
    pub init: InitMode,
}

impl TmParams {
    /// 10 000 clauses, T = 50, s = 25.0.
    pub fn large() -> Self {
        Self { clauses: 10_000, threshold: 50, specificity: 25.0, ..Self::desk() }
    }

    /// Small profile for laptop-scale corpora.
    pub fn desk() -> Self {
        Self { clauses: 200, threshold: 15, specificity: 5.0, states_per_action: 128, seed: 1, init: InitMode::Boundary }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.clauses < 2 || self.clauses % 2 != 0 {
            return Err(Error::InvalidParameter(format!("clause count {} must be even and >= 2", self.clauses)));
        }
        if self.threshold < 1 {
            return Err(Error::InvalidParameter("voting margin T must be >= 1".into()));
        }
        if !(self.specificity > 1.0) || !self.specificity.is_finite() {
            return Err(Error::InvalidParameter(format!("sensitivity s = {} must be > 1", self.specificity)));
        }
        if self.states_per_action < 1 || self.states_per_action > u16::MAX / 2 {
            return Err(Error::InvalidParameter(format!("states per action {}", self.states_per_action)));
        }
        Ok(())
    }
}

impl Default for TmParams {
    fn default() -> Self {
        Self::large()
    }
}

/// Vote total of one class pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassSum {
    pub raw: i64,
    /// `raw` clamped to `[-T, T]`.
    pub clamped: i64,
}

/// Training accuracy after each epoch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FitTrace {
    pub accuracy: Vec<f64>,
}

impl FitTrace {
    pub fn last(&self) -> Option<f64> {
        self.accuracy.last().copied()
    }
}

/// A clause rendered as words.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExtractedClause {
    pub class: Class,
    pub polarity: Polarity,
    pub index: usize,
    /// Words whose plain literal is included.
    pub plain_words: Vec<String>,
    /// Words whose negated literal is included.
    pub negated_words: Vec<String>,
}

impl ExtractedClause {
    pub fn new<S: Into<String>>(
        class: Class,
        polarity: Polarity,
        plain: impl IntoIterator<Item = S>,
        negated: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            class,
            polarity,
            index: 0,
            plain_words: plain.into_iter().map(Into::into).collect(),
            negated_words: negated.into_iter().map(Into::into).collect(),
        }
    }

    pub fn literal_count(&self) -> usize {
        self.plain_words.len() + self.negated_words.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsetlinMachine {
    params: TmParams,
    width: usize,
    pools: [Vec<Clause>; 2],
    epochs_trained: u64,
}

impl TsetlinMachine {
    /// Fresh machine over `width` features. The first `m/2` clauses of each
    /// pool are positive, the rest negative.
    pub fn new(params: TmParams, width: usize) -> Result<Self> {
        params.validate()?;
        let n = params.states_per_action;
        let half = params.clauses / 2;
        let pools = Class::ALL.map(|class| {
            (0..params.clauses)
                .map(|j| {
                    let polarity = if j < half { Polarity::Positive } else { Polarity::Negative };
                    match params.init {
                        InitMode::Boundary => Clause::new(polarity, width, n, n),
                        InitMode::RandomBoundary => {
                            let mut r = rng::stream(params.seed, &[INIT_STREAM, class.index() as u64, j as u64]);
                            let states = (0..2 * width).map(|_| n + r.gen_range(0..=1u16)).collect();
                            Clause::from_states(polarity, n, states).expect("states in range")
                        }
                    }
                })
                .collect()
        });
        Ok(Self { params, width, pools, epochs_trained: 0 })
    }

    /// Assembles a machine from explicit clause pools.
    pub fn from_pools(params: TmParams, width: usize, pools: [Vec<Clause>; 2], epochs_trained: u64) -> Result<Self> {
        params.validate()?;
        for pool in &pools {
            if pool.len() != params.clauses {
                return Err(Error::malformed("model", format!("pool of {} clauses, expected {}", pool.len(), params.clauses)));
            }
            let half = params.clauses / 2;
            for (j, c) in pool.iter().enumerate() {
                if c.width() != width || c.states_per_action() != params.states_per_action {
                    return Err(Error::malformed("model", format!("clause {j} shape mismatch")));
                }
                let expected = if j < half { Polarity::Positive } else { Polarity::Negative };
                if c.polarity() != expected {
                    return Err(Error::malformed("model", format!("clause {j} has polarity {}", c.polarity())));
                }
            }
        }
        Ok(Self { params, width, pools, epochs_trained })
    }

    pub fn params(&self) -> &TmParams {
        &self.params
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn epochs_trained(&self) -> u64 {
        self.epochs_trained
    }

    pub fn clauses(&self, class: Class) -> &[Clause] {
        &self.pools[class.index()]
    }

    pub fn clauses_mut(&mut self, class: Class) -> &mut [Clause] {
        &mut self.pools[class.index()]
    }

    fn check_width(&self, x: &Bits) -> Result<()> {
        if x.len() != self.width {
            return Err(Error::WidthMismatch { expected: self.width, actual: x.len() });
        }
        Ok(())
    }

    fn pool_sum(&self, class: Class, x: &Bits, mode: EvalMode) -> ClassSum {
        let raw: i64 = self.pools[class.index()]
            .iter()
            .filter(|c| c.eval_unchecked(x, mode))
            .map(|c| c.polarity().sign())
            .sum();
        let t = i64::from(self.params.threshold);
        ClassSum { raw, clamped: raw.clamp(-t, t) }
    }

    /// Positive minus negative votes of `class` at inference.
    pub fn class_sum(&self, x: &Bits, class: Class) -> Result<ClassSum> {
        self.check_width(x)?;
        Ok(self.pool_sum(class, x, EvalMode::Inference))
    }

    /// Class with the larger raw vote; ties go to Known.
    pub fn classify(&self, x: &Bits) -> Result<Class> {
        let known = self.class_sum(x, Class::Known)?.raw;
        let novel = self.class_sum(x, Class::Novel)?.raw;
        Ok(if novel > known { Class::Novel } else { Class::Known })
    }

    pub fn accuracy(&self, docs: &[BoolDoc]) -> Result<f64> {
        if docs.is_empty() {
            return Err(Error::EmptyInput("documents"));
        }
        let mut correct = 0usize;
        for d in docs {
            if self.classify(&d.bits)? == d.label {
                correct += 1;
            }
        }
        Ok(correct as f64 / docs.len() as f64)
    }

    /// Trains for `epochs` passes over `docs`, shuffled each epoch.
    pub fn fit(&mut self, docs: &[BoolDoc], epochs: usize) -> Result<FitTrace> {
        if epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be >= 1".into()));
        }
        for d in docs {
            self.check_width(&d.bits)?;
        }
        let has = |c: Class| docs.iter().any(|d| d.label == c);
        if !has(Class::Known) || !has(Class::Novel) {
            return Err(Error::BothClassesRequired);
        }
        let mut trace = FitTrace::default();
        let mut order: Vec<usize> = (0..docs.len()).collect();
        for _ in 0..epochs {
            let epoch = self.epochs_trained;
            order.sort_unstable();
            order.shuffle(&mut rng::stream(self.params.seed, &[SHUFFLE_STREAM, epoch]));
            for (step, &i) in order.iter().enumerate() {
                let doc = &docs[i];
                self.update(&doc.bits, doc.label, epoch, step as u64);
            }
            self.epochs_trained += 1;
            let acc = self.accuracy(docs)?;
            log::debug!("epoch {epoch}: training accuracy {acc:.4}");
            trace.accuracy.push(acc);
        }
        Ok(trace)
    }

    fn update(&mut self, x: &Bits, target: Class, epoch: u64, step: u64) {
        let t = f64::from(self.params.threshold);
        let s = self.params.specificity;
        let seed = self.params.seed;
        for class in [target, target.other()] {
            let votes = self.pool_sum(class, x, EvalMode::Learning).clamped as f64;
            let (p_feedback, is_target) = if class == target {
                ((t - votes) / (2.0 * t), true)
            } else {
                ((t + votes) / (2.0 * t), false)
            };
            let ci = class.index() as u64;
            let step_clause = |(j, clause): (usize, &mut Clause)| {
                let mut r = rng::stream(seed, &[FEEDBACK_STREAM, ci, j as u64, epoch, step]);
                if r.gen::<f64>() >= p_feedback {
                    return;
                }
                let fired = clause.eval_unchecked(x, EvalMode::Learning);
                match (is_target, clause.polarity()) {
                    (true, Polarity::Positive) | (false, Polarity::Negative) => clause.apply_type_i(x, fired, s, &mut r),
                    (true, Polarity::Negative) | (false, Polarity::Positive) => clause.apply_type_ii(x, fired),
                }
            };
            let pool = &mut self.pools[class.index()];
            if pool.len() >= PARALLEL_MIN_CLAUSES {
                pool.par_iter_mut().enumerate().for_each(step_clause);
            } else {
                pool.iter_mut().enumerate().for_each(step_clause);
            }
        }
    }

    /// Non-empty clauses rendered over `vocab`.
    pub fn extract_clauses(&self, vocab: &Vocabulary) -> Result<Vec<ExtractedClause>> {
        if vocab.len() != self.width {
            return Err(Error::WidthMismatch { expected: self.width, actual: vocab.len() });
        }
        let mut out = Vec::new();
        for class in Class::ALL {
            for (index, clause) in self.pools[class.index()].iter().enumerate() {
                if clause.is_empty() {
                    continue;
                }
                let mut plain_words = Vec::new();
                let mut negated_words = Vec::new();
                for lit in clause.included_literals() {
                    if lit < self.width {
                        plain_words.push(vocab.words()[lit].clone());
                    } else {
                        negated_words.push(vocab.words()[lit - self.width].clone());
                    }
                }
                out.push(ExtractedClause { class, polarity: clause.polarity(), index, plain_words, negated_words });
            }
        }
        Ok(out)
    }
}
