use std::fs::OpenOptions;
use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use lynwerk_core::analysis::{analyze_line, frequency_table, overlap_report, Stopwords};
use lynwerk_core::corpus::{build_vocab, load_corpus, segment_lines, tokenize, Corpus, CorpusError, Vocabulary};
use lynwerk_core::generator::{generate_set, CorpusIndex, GenError};
use lynwerk_core::model::{Checkpoint, CheckpointError};
use lynwerk_core::studio::Studio;
use lynwerk_core::trainer::{encode_lines, train_with_progress, TrainConfig, TrainError};
use serde_json::json;

use crate::config::{gen_config, train_config, FileConfig};
use crate::{AnalyzeCommand, Cli, Command, ExportVocabArgs, Failure, GenerateArgs, ServeArgs, TrainArgs};

impl From<CorpusError> for Failure {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::InvalidMinCount => Self::Usage(e.to_string()),
            _ => Self::Data(e.to_string()),
        }
    }
}

impl From<CheckpointError> for Failure {
    fn from(e: CheckpointError) -> Self {
        Self::Data(e.to_string())
    }
}

impl From<TrainError> for Failure {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::InvalidConfig(_) => Self::Usage(e.to_string()),
            TrainError::EmptyCorpus | TrainError::Corpus(_) | TrainError::Checkpoint(_) => Self::Data(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        match e {
            GenError::VocabMismatch { .. } => Self::Data(e.to_string()),
            GenError::InvalidConfig(_) => Self::Usage(e.to_string()),
            _ => Self::Runtime(e.to_string()),
        }
    }
}

fn io_failure(what: &str) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Runtime(format!("{what}: {e}"))
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Train(args) => train(&cli, &file, args),
        Command::Generate(args) => generate(&cli, &file, args),
        Command::Analyze(cmd) => analyze(&cli, cmd),
        Command::Serve(args) => serve(&cli, args),
        Command::ExportVocab(args) => export_vocab(&cli, args),
    }
}

fn segmented(path: &Path) -> Result<Corpus, Failure> {
    Ok(segment_lines(load_corpus(path)?)?)
}

fn describe(c: &TrainConfig) -> String {
    format!(
        "embedding_dim={} hidden={} layers={} dropout={} lr={} batch_size={} epochs={} seed={} max_seq_len={} min_count={} init_std={}",
        c.embedding_dim, c.hidden, c.layers, c.dropout, c.lr, c.batch_size, c.epochs, c.seed, c.max_seq_len, c.min_count,
        c.init_std
    )
}

fn train(cli: &Cli, file: &FileConfig, args: &TrainArgs) -> Result<(), Failure> {
    let config = train_config(file, args, cli.seed)?;
    eprintln!("reference defaults: {}", describe(&TrainConfig::default()));
    eprintln!("training with:      {}", describe(&config));
    let corpus = segmented(&args.corpus)?;
    log::info!("{}: {} lines, {} tokens", corpus.source_name, corpus.lines.len(), corpus.token_count);

    let mut log_file = match &args.log_file {
        Some(p) => Some(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(io_failure("cannot open training log"))?,
        ),
        None => None,
    };
    let stdout = io::stdout();
    if !cli.json {
        println!("epoch,loss,perplexity,seconds");
    }
    let mut write_error = None;
    let (ckpt, report) = train_with_progress(&corpus, &config, |stats| {
        let record = stats.log_record();
        if !cli.json {
            let _ = writeln!(stdout.lock(), "{record}");
        }
        if let Some(f) = log_file.as_mut() {
            if let Err(e) = writeln!(f, "{record}") {
                write_error.get_or_insert(e);
            }
        }
        if let Some(ppl) = stats.holdout_perplexity {
            log::info!("epoch {}: held-out perplexity {ppl:.4}", stats.epoch);
        }
    })?;
    if let Some(e) = write_error {
        return Err(io_failure("cannot write training log")(e));
    }
    ckpt.save(&args.out).map_err(|e| Failure::Runtime(e.to_string()))?;
    log::info!(
        "wrote {} ({} words, {:.0} tokens/s)",
        args.out.display(),
        ckpt.vocab.len(),
        report.tokens_per_second
    );
    if cli.json {
        println!("{}", json!({ "checkpoint": args.out, "vocab_size": ckpt.vocab.len(), "report": report }));
    }
    Ok(())
}

fn index_for(ckpt: &Checkpoint, corpus: Option<&Path>) -> Result<CorpusIndex, Failure> {
    Ok(match corpus {
        Some(p) => CorpusIndex::build(&encode_lines(&segmented(p)?, &ckpt.vocab)),
        None => CorpusIndex::build(&ckpt.corpus_lines),
    })
}

fn generate(cli: &Cli, file: &FileConfig, args: &GenerateArgs) -> Result<(), Failure> {
    let config = gen_config(file, args, cli.seed)?;
    let ckpt = Checkpoint::load(&args.ckpt)?;
    let index = index_for(&ckpt, args.corpus.as_deref())?;
    let lines = generate_set(&ckpt.params, &ckpt.vocab, &index, &config)?;
    let mut out = io::stdout().lock();
    for line in &lines {
        let row = if cli.json {
            serde_json::to_string(line).expect("line serializes")
        } else {
            line.text.clone()
        };
        writeln!(out, "{row}").map_err(io_failure("stdout"))?;
    }
    let mean = lines.iter().map(|l| l.overlap_score as f64).sum::<f64>() / lines.len() as f64;
    log::info!("{} lines, mean overlap {mean:.3}", lines.len());
    Ok(())
}

fn read_lines(texts: &[String], input: Option<&Path>) -> Result<Vec<String>, Failure> {
    if !texts.is_empty() {
        return Ok(texts.to_vec());
    }
    let lines: Vec<String> = match input {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Failure::Data(format!("cannot read {}: {e}", p.display())))?
            .lines()
            .map(str::to_owned)
            .collect(),
        None => io::stdin().lock().lines().collect::<Result<_, _>>().map_err(io_failure("stdin"))?,
    };
    Ok(lines.into_iter().filter(|l| !l.trim().is_empty()).collect())
}

fn stopwords(path: Option<&Path>) -> Result<Stopwords, Failure> {
    match path {
        Some(p) => std::fs::read_to_string(p)
            .map(|t| Stopwords::parse(&t))
            .map_err(|e| Failure::Data(format!("cannot read {}: {e}", p.display()))),
        None => Ok(Stopwords::afrikaans()),
    }
}

fn analyze(cli: &Cli, cmd: &AnalyzeCommand) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    let mut emit = |s: String| writeln!(out, "{s}").map_err(io_failure("stdout"));
    match cmd {
        AnalyzeCommand::Freq {
            corpus,
            stopwords: sw,
            no_stopwords,
            top,
        } => {
            let corpus = segmented(corpus)?;
            let sw = if *no_stopwords { Stopwords::none() } else { stopwords(sw.as_deref())? };
            let table = frequency_table(&corpus, &sw);
            let rows = top.map_or(&table.entries[..], |n| table.top(n));
            if cli.json {
                let entries: Vec<_> = rows.iter().map(|(t, c)| json!({ "token": t, "count": c })).collect();
                emit(json!({ "entries": entries, "total": table.total(), "excluded": table.excluded }).to_string())?;
            } else {
                for (token, count) in rows {
                    emit(format!("{token}\t{count}"))?;
                }
            }
        }
        AnalyzeCommand::Devices {
            texts,
            input,
            stopwords: sw,
        } => {
            let sw = stopwords(sw.as_deref())?;
            for line in read_lines(texts, input.as_deref())? {
                let report = analyze_line(&line, &sw);
                if cli.json {
                    emit(serde_json::to_string(&report).expect("report serializes"))?;
                    continue;
                }
                emit(line)?;
                let words = |positions: &[usize]| {
                    positions.iter().map(|&i| report.tokens[i].as_str()).collect::<Vec<_>>().join(" ")
                };
                for g in &report.alliterations {
                    emit(format!("  alliteration {}: {}", g.key, words(&g.positions)))?;
                }
                for g in &report.assonances {
                    emit(format!("  assonance {}: {}", g.key, words(&g.positions)))?;
                }
            }
        }
        AnalyzeCommand::Overlap { input, ckpt, corpus } => {
            let (vocab, index): (Vocabulary, CorpusIndex) = match ckpt {
                Some(path) => {
                    let ckpt = Checkpoint::load(path)?;
                    let index = index_for(&ckpt, corpus.as_deref())?;
                    (ckpt.vocab, index)
                }
                None => {
                    let corpus = segmented(corpus.as_deref().expect("clap requires --ckpt or --corpus"))?;
                    let vocab = build_vocab(&corpus, 1)?;
                    let index = CorpusIndex::build(&encode_lines(&corpus, &vocab));
                    (vocab, index)
                }
            };
            let encoded: Vec<_> = read_lines(&[], Some(input))?
                .iter()
                .map(|l| vocab.encode(&tokenize(l)))
                .collect();
            let report = overlap_report(&encoded, &index);
            if cli.json {
                emit(serde_json::to_string(&report).expect("report serializes"))?;
            } else {
                emit("overlap\tlines\tfraction".into())?;
                for (k, n) in &report.histogram {
                    emit(format!("{k}\t{n}\t{:.4}", report.fractions[k]))?;
                }
                emit(format!("mean\t{:.4}", report.mean))?;
            }
        }
    }
    Ok(())
}

fn serve(cli: &Cli, args: &ServeArgs) -> Result<(), Failure> {
    let reference = args.ckpt.display().to_string();
    let ckpt = Checkpoint::load(&args.ckpt)?;
    let seed = cli.seed.unwrap_or(0);
    let studio = match &args.store {
        Some(store) => Studio::open(Some(reference.clone()), seed, store).map_err(|e| Failure::Data(e.to_string()))?,
        None => Studio::new(Some(reference.clone()), seed),
    };
    studio.register_model(reference, ckpt);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(io_failure("cannot start runtime"))?;
    let addr = SocketAddr::new(args.host, args.port);
    runtime
        .block_on(lynwerk_studio::serve(addr, Arc::new(studio)))
        .map_err(io_failure("server"))
}

fn export_vocab(cli: &Cli, args: &ExportVocabArgs) -> Result<(), Failure> {
    let ckpt = Checkpoint::load(&args.ckpt)?;
    let text = if cli.json {
        serde_json::to_string(ckpt.vocab.tokens()).expect("tokens serialize") + "\n"
    } else {
        ckpt.vocab.to_file_string()
    };
    match &args.out {
        Some(p) => std::fs::write(p, text).map_err(io_failure("cannot write vocabulary")),
        None => io::stdout().write_all(text.as_bytes()).map_err(io_failure("stdout")),
    }
}
