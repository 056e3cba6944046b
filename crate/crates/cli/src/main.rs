mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tm_novelty::eval::CategoryBasis;
use tm_novelty::novelty::{Aggregator, ContextMode};
use tm_novelty::tsetlin::InitMode;
use tm_novelty::Class;

use config::{RunConfig, CONFIG_FILE, DEFAULT_OUTPUT};
use error::CliResult;

/// Word novelty scores from Tsetlin Machine clauses.
///
/// Stages share one output directory: ingest writes the vocabulary, split
/// documents and config.toml, and later stages read them back. Flags
/// override values from the config file.
#[derive(Debug, Parser)]
#[command(name = "tmnovelty", version)]
struct Cli {
    /// Output directory shared by all stages.
    #[arg(long, short, global = true, env = "TMNOVELTY_OUT")]
    out: Option<PathBuf>,
    /// Config file; defaults to config.toml in the output directory.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tokenize, split and booleanize the corpus.
    Ingest,
    /// Train the machine on the training split.
    Train,
    /// Word bags, novelty scores and per-document scores.
    Describe {
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Contextual scores for word pairs within one class's clauses.
    Context {
        /// Comma-separated words in vocabulary form (stemmed if stemming is on).
        #[arg(long, value_delimiter = ',', required = true)]
        words: Vec<String>,
        #[arg(long, default_value = "novel")]
        class: Class,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Per-class TF-IDF over the training split.
    Tfidf,
    /// Compare clause scores against TF-IDF on the held-out split.
    Eval {
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn parse_init(s: &str) -> Result<InitMode, String> {
    match s {
        "boundary" => Ok(InitMode::Boundary),
        "random_boundary" => Ok(InitMode::RandomBoundary),
        _ => Err(format!("unknown init mode {s:?} (boundary, random_boundary)")),
    }
}

#[derive(Debug, Default, Args)]
struct Overrides {
    /// Folder of Known documents; repeatable.
    #[arg(long, global = true)]
    known: Vec<PathBuf>,
    /// Folder of Novel documents; repeatable.
    #[arg(long, global = true)]
    novel: Vec<PathBuf>,
    /// CSV corpus with columns doc_id,label,text.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[arg(long, global = true)]
    stoplist: Option<PathBuf>,
    #[arg(long, global = true)]
    stemming: Option<bool>,
    #[arg(long, global = true)]
    min_df: Option<usize>,
    /// Clauses per class.
    #[arg(long, global = true)]
    clauses: Option<usize>,
    #[arg(long, global = true)]
    threshold: Option<u32>,
    #[arg(long, global = true)]
    specificity: Option<f64>,
    #[arg(long, global = true)]
    states_per_action: Option<u16>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_parser = parse_init)]
    init: Option<InitMode>,
    #[arg(long, global = true)]
    smoothing: Option<bool>,
    /// mean_log, sum_log, max or fraction_above_one.
    #[arg(long, global = true)]
    aggregator: Option<Aggregator>,
    /// bag or clause.
    #[arg(long, global = true)]
    context_mode: Option<ContextMode>,
    /// corpus or bags.
    #[arg(long, global = true)]
    categories: Option<CategoryBasis>,
    #[arg(long, global = true)]
    test_fraction: Option<f64>,
    #[arg(long, global = true)]
    split_seed: Option<u64>,
}

impl Overrides {
    fn apply(self, cfg: &mut RunConfig) {
        if !self.known.is_empty() || !self.novel.is_empty() {
            cfg.corpus.known = self.known;
            cfg.corpus.novel = self.novel;
            cfg.corpus.csv = None;
        }
        if self.csv.is_some() {
            cfg.corpus.known.clear();
            cfg.corpus.novel.clear();
            cfg.corpus.csv = self.csv;
        }
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        if self.stoplist.is_some() {
            cfg.preprocess.stoplist = self.stoplist;
        }
        set! {
            stemming => cfg.preprocess.stemming,
            min_df => cfg.preprocess.min_df,
            clauses => cfg.model.clauses,
            threshold => cfg.model.threshold,
            specificity => cfg.model.specificity,
            states_per_action => cfg.model.states_per_action,
            epochs => cfg.model.epochs,
            seed => cfg.model.seed,
            init => cfg.model.init,
            smoothing => cfg.scoring.smoothing,
            aggregator => cfg.scoring.aggregator,
            context_mode => cfg.scoring.context,
            categories => cfg.scoring.categories,
            test_fraction => cfg.split.test_fraction,
            split_seed => cfg.split.seed,
        }
    }
}

fn resolve(cli_out: Option<PathBuf>, config: Option<&Path>, overrides: Overrides) -> CliResult<(RunConfig, PathBuf)> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => {
            let implicit = cli_out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT)).join(CONFIG_FILE);
            if implicit.is_file() {
                RunConfig::load(&implicit)?
            } else {
                RunConfig::default()
            }
        }
    };
    overrides.apply(&mut cfg);
    let out = cli_out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    Ok((cfg, out))
}

fn run(cli: Cli) -> CliResult<()> {
    let (cfg, out) = resolve(cli.out, cli.config.as_deref(), cli.overrides)?;
    log::debug!("output directory {}", out.display());
    match cli.command {
        Command::Ingest => commands::ingest(&cfg, &out),
        Command::Train => commands::train(&cfg, &out),
        Command::Describe { model } => commands::describe(&cfg, &out, model.as_deref()),
        Command::Context { words, class, model } => commands::context(&cfg, &out, model.as_deref(), &words, class),
        Command::Tfidf => commands::tfidf(&out),
        Command::Eval { model } => commands::eval(&cfg, &out, model.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are validation failures; exit code 2 means missing input
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
