//! `lynwerk`: train a line model, generate candidate lines, analyze text and
//! serve the co-writing studio.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "lynwerk", version, about = "Word-level LSTM line generator and poetry studio")]
pub struct Cli {
    /// Seed for every random choice (initialization, shuffling, dropout, sampling).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    pub log_level: log::LevelFilter,
    /// Machine-readable output.
    #[arg(long, global = true)]
    pub json: bool,
    /// TOML file with `[train]` and `[generate]` tables; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model on a plain-text corpus and write a checkpoint.
    Train(TrainArgs),
    /// Sample distinct lines from a checkpoint.
    Generate(GenerateArgs),
    /// Word frequencies, sound devices or corpus overlap.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Run the studio HTTP service.
    Serve(ServeArgs),
    /// Print or write the vocabulary stored in a checkpoint.
    ExportVocab(ExportVocabArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub embedding_dim: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub max_seq_len: Option<usize>,
    #[arg(long)]
    pub min_count: Option<usize>,
    #[arg(long)]
    pub init_std: Option<f64>,
    #[arg(long)]
    pub grad_clip: Option<f64>,
    /// Fraction of lines held out for perplexity reporting.
    #[arg(long)]
    pub holdout: Option<f64>,
    /// Also append the `epoch,loss,perplexity,seconds` records to this file.
    #[arg(long)]
    pub log_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Argmax decoding instead of sampling.
    #[arg(long)]
    pub greedy: bool,
    #[arg(long)]
    pub max_overlap: Option<usize>,
    #[arg(long)]
    pub max_tokens: Option<usize>,
    #[arg(long)]
    pub allow_unk: bool,
    /// Measure overlap against this text instead of the checkpoint's lines.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Word frequencies with stopwords removed.
    Freq {
        #[arg(long)]
        corpus: PathBuf,
        /// Stopword file, one word per line.
        #[arg(long, conflicts_with = "no_stopwords")]
        stopwords: Option<PathBuf>,
        #[arg(long)]
        no_stopwords: bool,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Alliteration and assonance per line.
    Devices {
        /// Line to analyze; repeatable.
        #[arg(long = "text")]
        texts: Vec<String>,
        /// File with one line per row; standard input when neither is given.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
    /// Histogram of longest shared word runs between lines and a corpus.
    Overlap {
        /// Lines to score, one per row.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, required_unless_present = "corpus")]
        ckpt: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    /// Event log; sessions are kept in memory only when absent.
    #[arg(long)]
    pub store: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportVocabArgs {
    #[arg(long)]
    pub ckpt: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Runtime(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Data(_) => 3,
            Self::Runtime(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Data(m) | Self::Runtime(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
