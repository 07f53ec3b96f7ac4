//! Mini-batch training: padded batches of BOS + line + EOL sequences,
//! full BPTT per line, Adam updates, seeded shuffling and dropout.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{build_vocab, Corpus, CorpusError, TokenId, Vocabulary, BOS, EOL, PAD};
use crate::model::{
    backward_into, forward, Checkpoint, CheckpointError, ModelDims, ModelError, ModelParams, Mode,
    TrainingMeta,
};
use crate::numerics::{derive_seed, softmax_xent_into, AdamConfig, AdamState, Matrix, NumericsError, Rng};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("corpus has no lines to train on")]
    EmptyCorpus,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub embedding_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub dropout: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub max_seq_len: usize,
    pub min_count: usize,
    /// Standard deviation of the Gaussian used for every weight matrix.
    pub init_std: f64,
    /// Global gradient-norm clip; off when `None`.
    pub grad_clip: Option<f64>,
    /// Fraction of lines held out for perplexity reporting.
    pub holdout_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            embedding_dim: 100,
            hidden: 50,
            layers: 2,
            dropout: 0.2,
            lr: 0.001,
            batch_size: 16,
            epochs: 300,
            seed: 0,
            max_seq_len: 64,
            min_count: 1,
            init_std: 0.01,
            grad_clip: None,
            holdout_fraction: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_owned()));
        if self.embedding_dim == 0 || self.hidden == 0 {
            return bad("embedding_dim and hidden must be positive");
        }
        if self.layers != 2 {
            return bad("only the two-layer stack is supported (layers = 2)");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad("lr must be positive");
        }
        if self.batch_size == 0 || self.epochs == 0 || self.min_count == 0 {
            return bad("batch_size, epochs and min_count must be positive");
        }
        if self.max_seq_len < 2 {
            return bad("max_seq_len must be at least 2");
        }
        if !(self.init_std > 0.0 && self.init_std.is_finite()) {
            return bad("init_std must be positive");
        }
        if self.grad_clip.is_some_and(|c| !(c > 0.0)) {
            return bad("grad_clip must be positive");
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return bad("holdout_fraction must be in [0, 1)");
        }
        Ok(())
    }
}

/// Padded batch. Every row has `width` ids; `mask[r][t]` marks whether the
/// prediction made at input position `t` (of target `sequences[r][t + 1]`)
/// counts toward the loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub sequences: Vec<Vec<TokenId>>,
    pub mask: Vec<Vec<bool>>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn width(&self) -> usize {
        self.sequences.first().map_or(0, Vec::len)
    }

    pub fn target_count(&self) -> usize {
        self.mask.iter().flatten().filter(|&&m| m).count()
    }

    fn from_sequences(seqs: &[Vec<TokenId>]) -> Self {
        let width = seqs.iter().map(Vec::len).max().unwrap_or(0);
        let mut sequences = Vec::with_capacity(seqs.len());
        let mut mask = Vec::with_capacity(seqs.len());
        for s in seqs {
            let mut row = s.clone();
            row.resize(width, PAD);
            mask.push((0..width.saturating_sub(1)).map(|t| t + 1 < s.len()).collect());
            sequences.push(row);
        }
        Self { sequences, mask }
    }
}

pub fn encode_lines(corpus: &Corpus, vocab: &Vocabulary) -> Vec<Vec<TokenId>> {
    corpus.lines.iter().map(|l| vocab.encode(l)).collect()
}

/// `BOS + line + EOL`, cut to `max_seq_len` ids.
pub fn to_training_sequence(line: &[TokenId], max_seq_len: usize) -> Vec<TokenId> {
    let mut seq = Vec::with_capacity(line.len() + 2);
    seq.push(BOS);
    seq.extend_from_slice(line);
    seq.push(EOL);
    seq.truncate(max_seq_len);
    seq
}

fn to_sequences(lines: &[Vec<TokenId>], max_seq_len: usize) -> Vec<Vec<TokenId>> {
    let truncated = lines.iter().filter(|l| l.len() + 2 > max_seq_len).count();
    if truncated > 0 {
        log::warn!("{truncated} line(s) longer than max_seq_len={max_seq_len} were truncated");
    }
    lines.iter().map(|l| to_training_sequence(l, max_seq_len)).collect()
}

pub(crate) fn batch_sequences(seqs: &[Vec<TokenId>], batch_size: usize) -> Vec<Batch> {
    seqs.chunks(batch_size).map(Batch::from_sequences).collect()
}

/// Batches in corpus order; the last batch may be partial.
pub fn make_batches(corpus: &Corpus, vocab: &Vocabulary, config: &TrainConfig) -> Result<Vec<Batch>, TrainError> {
    if corpus.lines.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let seqs = to_sequences(&encode_lines(corpus, vocab), config.max_seq_len);
    Ok(batch_sequences(&seqs, config.batch_size.max(1)))
}

/// Summed masked cross-entropy of a batch and the number of counted targets.
/// When `grads` is given, gradients of the summed loss scaled by `grad_scale`
/// are accumulated into it.
pub fn batch_loss(
    params: &ModelParams,
    batch: &Batch,
    dropout: Option<(f64, u64)>,
    mut grads: Option<(&mut ModelParams, f64)>,
) -> Result<(f64, usize), ModelError> {
    let vocab = params.dims().vocab;
    let mut total = 0.0;
    let mut count = 0;
    for (r, (seq, mask)) in batch.sequences.iter().zip(&batch.mask).enumerate() {
        let Some(last) = mask.iter().rposition(|&m| m) else {
            continue;
        };
        let inputs = &seq[..=last];
        let mode = match dropout {
            Some((rate, seed)) => Mode::Training {
                dropout: rate,
                seed: derive_seed(seed, r as u64),
            },
            None => Mode::Inference,
        };
        let out = forward(params, inputs, mode)?;
        let mut dlogits = Matrix::zeros(inputs.len(), vocab)?;
        for t in 0..inputs.len() {
            if !mask[t] {
                continue;
            }
            let target = seq[t + 1] as usize;
            total += softmax_xent_into(out.logits.row(t), target, dlogits.row_mut(t));
            count += 1;
        }
        if let Some((g, scale)) = grads.as_mut() {
            if *scale != 1.0 {
                dlogits.data_mut().iter_mut().for_each(|v| *v *= *scale);
            }
            backward_into(params, &out.cache, &dlogits, g)?;
        }
    }
    Ok((total, count))
}

/// Mean per-token loss without dropout.
pub fn evaluate(params: &ModelParams, lines: &[Vec<TokenId>], max_seq_len: usize) -> Result<f64, ModelError> {
    let seqs: Vec<_> = lines.iter().map(|l| to_training_sequence(l, max_seq_len)).collect();
    let mut total = 0.0;
    let mut count = 0;
    for batch in batch_sequences(&seqs, 64) {
        let (l, n) = batch_loss(params, &batch, None, None)?;
        total += l;
        count += n;
    }
    Ok(if count == 0 { 0.0 } else { total / count as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    pub perplexity: f64,
    pub seconds: f64,
    pub tokens: usize,
    pub holdout_perplexity: Option<f64>,
}

impl EpochStats {
    /// `epoch,loss,perplexity,seconds`
    pub fn log_record(&self) -> String {
        format!("{},{:.6},{:.6},{:.3}", self.epoch, self.mean_loss, self.perplexity, self.seconds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochStats>,
    pub wall_seconds: f64,
    pub tokens_per_second: f64,
}

impl TrainReport {
    pub fn losses(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.mean_loss).collect()
    }
}

pub fn train(corpus: &Corpus, config: &TrainConfig) -> Result<(Checkpoint, TrainReport), TrainError> {
    train_with_progress(corpus, config, |_| {})
}

pub fn train_with_progress(
    corpus: &Corpus,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<(Checkpoint, TrainReport), TrainError> {
    config.validate()?;
    if corpus.lines.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let vocab = build_vocab(corpus, config.min_count)?;
    let encoded = encode_lines(corpus, &vocab);
    let mut order: Vec<usize> = (0..encoded.len()).collect();
    let holdout_len = (encoded.len() as f64 * config.holdout_fraction).floor() as usize;
    if holdout_len > 0 {
        Rng::stream(config.seed, 3).shuffle(&mut order);
    }
    let (train_idx, holdout_idx) = order.split_at(order.len() - holdout_len);
    if train_idx.is_empty() {
        return Err(TrainError::EmptyCorpus);
    }
    let mut sequences: Vec<Vec<TokenId>> =
        to_sequences(&train_idx.iter().map(|&i| encoded[i].clone()).collect::<Vec<_>>(), config.max_seq_len);
    let holdout: Vec<Vec<TokenId>> = holdout_idx.iter().map(|&i| encoded[i].clone()).collect();

    let dims = ModelDims {
        vocab: vocab.len(),
        embed: config.embedding_dim,
        hidden: config.hidden,
    };
    let mut params = ModelParams::init(dims, config.init_std, derive_seed(config.seed, 0))?;
    let mut grads = ModelParams::zeros(dims)?;
    let adam_config = AdamConfig {
        lr: config.lr,
        ..AdamConfig::default()
    };
    let mut adam = AdamState::new(adam_config, &params.shapes());
    let mut shuffle_rng = Rng::stream(config.seed, 1);

    let started = Instant::now();
    let mut report = TrainReport {
        epochs: Vec::with_capacity(config.epochs),
        wall_seconds: 0.0,
        tokens_per_second: 0.0,
    };
    let mut total_tokens = 0usize;
    for epoch in 1..=config.epochs {
        let epoch_start = Instant::now();
        shuffle_rng.shuffle(&mut sequences);
        let epoch_seed = derive_seed(config.seed, 1000 + epoch as u64);
        let mut epoch_loss = 0.0;
        let mut epoch_tokens = 0;
        for (b, batch) in batch_sequences(&sequences, config.batch_size).iter().enumerate() {
            let targets = batch.target_count();
            if targets == 0 {
                continue;
            }
            grads.fill(0.0);
            let dropout = Some((config.dropout, derive_seed(epoch_seed, b as u64)));
            let scale = 1.0 / targets as f64;
            let (loss, n) = batch_loss(&params, batch, dropout, Some((&mut grads, scale)))?;
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, batch: b });
            }
            if let Some(clip) = config.grad_clip {
                clip_global_norm(&mut grads, clip);
            }
            let grad_refs = grads.tensors();
            adam.step(&mut params.tensors_mut(), &grad_refs)
                .map_err(|e| match e {
                    NumericsError::NonFiniteGradient { .. } => TrainError::NonFiniteLoss { epoch, batch: b },
                    other => other.into(),
                })?;
            epoch_loss += loss;
            epoch_tokens += n;
        }
        let mean_loss = epoch_loss / epoch_tokens.max(1) as f64;
        let holdout_perplexity = if holdout.is_empty() {
            None
        } else {
            Some(evaluate(&params, &holdout, config.max_seq_len)?.exp())
        };
        let stats = EpochStats {
            epoch,
            mean_loss,
            perplexity: mean_loss.exp(),
            seconds: epoch_start.elapsed().as_secs_f64(),
            tokens: epoch_tokens,
            holdout_perplexity,
        };
        total_tokens += epoch_tokens;
        on_epoch(&stats);
        report.epochs.push(stats);
    }
    report.wall_seconds = started.elapsed().as_secs_f64();
    report.tokens_per_second = total_tokens as f64 / report.wall_seconds.max(1e-9);

    let meta = TrainingMeta {
        epochs_completed: config.epochs as u32,
        final_loss: report.epochs.last().map_or(f64::NAN, |e| e.mean_loss),
        seed: config.seed,
    };
    let checkpoint = Checkpoint::new(vocab, params, meta, encoded)?;
    Ok((checkpoint, report))
}

fn clip_global_norm(grads: &mut ModelParams, max_norm: f64) {
    let norm = grads
        .tensors()
        .iter()
        .flat_map(|t| t.data())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        for t in grads.tensors_mut() {
            t.data_mut().iter_mut().for_each(|v| *v *= s);
        }
    }
}
