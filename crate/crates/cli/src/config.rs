//! The run configuration: a TOML file written by `ingest` into the output
//! directory and read back by every later stage.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tm_novelty::eval::{CategoryBasis, LogisticOptions};
use tm_novelty::experiment::EvalOptions;
use tm_novelty::novelty::{Aggregator, ContextMode, ScoringOptions};
use tm_novelty::tsetlin::InitMode;
use tm_novelty::TmParams;

use crate::error::{CliError, CliResult};

pub const CONFIG_FILE: &str = "config.toml";
pub const DEFAULT_OUTPUT: &str = "tmnovelty-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub corpus: CorpusConfig,
    pub preprocess: PreprocessConfig,
    pub model: ModelConfig,
    pub scoring: ScoringConfig,
    pub split: SplitConfig,
    pub logistic: LogisticConfig,
}

/// Either class folders or a single `doc_id,label,text` CSV.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub known: Vec<PathBuf>,
    pub novel: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Replaces the bundled English list.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stoplist: Option<PathBuf>,
    pub stemming: bool,
    pub min_df: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { stoplist: None, stemming: true, min_df: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub clauses: usize,
    pub threshold: u32,
    pub specificity: f64,
    pub states_per_action: u16,
    pub epochs: usize,
    pub seed: u64,
    pub init: InitMode,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let p = TmParams::large();
        Self {
            clauses: p.clauses,
            threshold: p.threshold,
            specificity: p.specificity,
            states_per_action: p.states_per_action,
            epochs: 100,
            seed: p.seed,
            init: p.init,
        }
    }
}

impl ModelConfig {
    pub fn params(&self) -> TmParams {
        TmParams {
            clauses: self.clauses,
            threshold: self.threshold,
            specificity: self.specificity,
            states_per_action: self.states_per_action,
            seed: self.seed,
            init: self.init,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    pub smoothing: bool,
    pub aggregator: Aggregator,
    pub context: ContextMode,
    pub categories: CategoryBasis,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            smoothing: true,
            aggregator: Aggregator::default(),
            context: ContextMode::default(),
            categories: CategoryBasis::default(),
        }
    }
}

impl ScoringConfig {
    pub fn options(&self) -> ScoringOptions {
        ScoringOptions { smoothing: self.smoothing }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { test_fraction: 0.3, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        let d = LogisticOptions::default();
        Self { epochs: d.epochs, learning_rate: d.learning_rate, l2: d.l2 }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            output: None,
            corpus: CorpusConfig::default(),
            preprocess: PreprocessConfig::default(),
            model: ModelConfig::default(),
            scoring: ScoringConfig::default(),
            split: SplitConfig::default(),
            logistic: LogisticConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("malformed config: {e}")))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Validation(format!("cannot serialize config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            logistic: LogisticOptions {
                epochs: self.logistic.epochs,
                learning_rate: self.logistic.learning_rate,
                l2: self.logistic.l2,
            },
            categories: self.scoring.categories,
        }
    }

    /// Checks everything that does not depend on the corpus.
    pub fn validate(&self) -> CliResult<()> {
        self.model.params().validate()?;
        if self.model.epochs == 0 {
            return Err(CliError::Validation("epochs must be at least 1".into()));
        }
        // TOML integers are signed 64-bit
        if self.model.seed > i64::MAX as u64 || self.split.seed > i64::MAX as u64 {
            return Err(CliError::Validation(format!("seeds must not exceed {}", i64::MAX)));
        }
        if self.preprocess.min_df == 0 {
            return Err(CliError::Validation("min_df must be at least 1".into()));
        }
        let f = self.split.test_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(CliError::Validation(format!("test_fraction {f} must lie strictly between 0 and 1")));
        }
        if self.logistic.epochs == 0 || !(self.logistic.learning_rate > 0.0) || !(self.logistic.l2 >= 0.0) {
            return Err(CliError::Validation("logistic settings need epochs >= 1, learning_rate > 0, l2 >= 0".into()));
        }
        Ok(())
    }

    /// Checks the corpus section and that every referenced path exists.
    pub fn validate_inputs(&self) -> CliResult<()> {
        let c = &self.corpus;
        match (&c.csv, c.known.is_empty(), c.novel.is_empty()) {
            (Some(_), true, true) => {}
            (Some(_), _, _) => {
                return Err(CliError::Validation("give either a corpus CSV or known/novel folders, not both".into()))
            }
            (None, false, false) => {}
            (None, _, _) => {
                return Err(CliError::Validation("corpus needs at least one known and one novel folder".into()))
            }
        }
        let paths = c.known.iter().chain(&c.novel).chain(&c.csv).chain(&self.preprocess.stoplist);
        for p in paths {
            if !p.exists() {
                return Err(CliError::missing("input", p));
            }
        }
        Ok(())
    }
}
