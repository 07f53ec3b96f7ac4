//! Line sampling from a trained model, with deduplication and a filter that
//! rejects lines sharing long word runs with the training corpus.

mod index;

pub use index::{ngram_overlap, CorpusIndex, SharedRun};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{is_word, TokenId, Vocabulary, BOS, EOL, PAD, UNK};
use crate::model::{step, HiddenState, ModelError, ModelParams};
use crate::numerics::{softmax_into, Rng};

const UNK_RETRIES: usize = 10;
const RETRIES_PER_LINE: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("model expects {model} ids but the vocabulary has {vocab}")]
    VocabMismatch { model: usize, vocab: usize },
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error("only {accepted} of {requested} lines accepted after {attempts} attempts")]
    RetryBudgetExhausted {
        requested: usize,
        accepted: usize,
        attempts: usize,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub count: usize,
    pub temperature: f64,
    /// Argmax decoding; `temperature` is ignored.
    pub greedy: bool,
    pub max_tokens: usize,
    pub seed: u64,
    pub max_ngram_overlap: usize,
    pub allow_unk: bool,
    pub min_words: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            count: 200,
            temperature: 0.9,
            greedy: false,
            max_tokens: 30,
            seed: 0,
            max_ngram_overlap: 4,
            allow_unk: false,
            min_words: 2,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), GenError> {
        let bad = |m: &str| Err(GenError::InvalidConfig(m.to_owned()));
        if self.count == 0 {
            return bad("count must be at least 1");
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be positive");
        }
        if self.max_tokens == 0 {
            return bad("max_tokens must be positive");
        }
        Ok(())
    }

    pub fn decoding(&self) -> Decoding {
        if self.greedy {
            Decoding::Greedy
        } else {
            Decoding::Sample {
                temperature: self.temperature,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decoding {
    Greedy,
    Sample { temperature: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateLine {
    /// First 16 hex digits of SHA-256 over the lowercased surface text.
    pub id: String,
    pub tokens: Vec<String>,
    pub token_ids: Vec<TokenId>,
    pub text: String,
    /// Natural-log probability of each token under the untempered model.
    pub log_probs: Vec<f64>,
    pub overlap_score: usize,
}

impl CandidateLine {
    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| is_word(t)).count()
    }

    pub fn dedup_key(&self) -> String {
        self.text.to_lowercase()
    }
}

pub fn line_id(text: &str) -> String {
    let digest = Sha256::digest(text.to_lowercase().as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

const OPENERS: [&str; 6] = ["(", "[", "“", "‘", "«", "„"];

/// Space-joined tokens with punctuation attached to the preceding word and
/// opening brackets or quotes attached to the following one.
pub fn surface_text<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut glue_next = false;
    for tok in tokens {
        let tok = tok.as_ref();
        let attach = !out.is_empty() && (glue_next || !is_word(tok) && !OPENERS.contains(&tok));
        if !out.is_empty() && !attach {
            out.push(' ');
        }
        out.push_str(tok);
        glue_next = OPENERS.contains(&tok);
    }
    out
}

fn argmax(values: &[f64], skip: impl Fn(usize) -> bool) -> usize {
    let mut best = usize::MAX;
    for (i, &v) in values.iter().enumerate() {
        if !skip(i) && (best == usize::MAX || v > values[best]) {
            best = i;
        }
    }
    best
}

/// Index of the largest logit; the lowest index wins ties.
pub fn greedy_token(logits: &[f64]) -> usize {
    argmax(logits, |_| false)
}

/// Draws an index from `softmax(logits / temperature)`. Entries equal to
/// negative infinity are never drawn.
pub fn sample_token(logits: &[f64], temperature: f64, rng: &mut Rng) -> usize {
    let scaled: Vec<f64> = logits.iter().map(|l| l / temperature).collect();
    let mut probs = vec![0.0; scaled.len()];
    softmax_into(&scaled, &mut probs);
    let u = rng.next_f64();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

fn log_softmax_at(logits: &[f64], i: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits[i] - lse
}

fn check_vocab(params: &ModelParams, vocab: &Vocabulary) -> Result<(), GenError> {
    let model = params.dims().vocab;
    if model != vocab.len() {
        return Err(GenError::VocabMismatch {
            model,
            vocab: vocab.len(),
        });
    }
    Ok(())
}

/// One unfiltered line: from BOS until EOL or `max_tokens`. The overlap score
/// is left at zero.
pub fn sample_line(
    params: &ModelParams,
    vocab: &Vocabulary,
    decoding: Decoding,
    max_tokens: usize,
    allow_unk: bool,
    rng: &mut Rng,
) -> Result<CandidateLine, GenError> {
    check_vocab(params, vocab)?;
    let mut state = HiddenState::zeros(params.dims().hidden);
    let mut prev = BOS;
    let mut ids = Vec::new();
    let mut log_probs = Vec::new();
    let banned = |i: usize| i == PAD as usize || i == BOS as usize || (!allow_unk && i == UNK as usize);
    while ids.len() < max_tokens {
        let logits = step(params, &mut state, prev)?;
        let next = match decoding {
            Decoding::Greedy => argmax(&logits, banned),
            Decoding::Sample { temperature } => {
                let mut masked = logits.clone();
                masked[PAD as usize] = f64::NEG_INFINITY;
                masked[BOS as usize] = f64::NEG_INFINITY;
                let mut pick = sample_token(&masked, temperature, rng);
                let mut tries = 0;
                while !allow_unk && pick == UNK as usize && tries < UNK_RETRIES {
                    pick = sample_token(&masked, temperature, rng);
                    tries += 1;
                }
                if banned(pick) {
                    argmax(&logits, banned)
                } else {
                    pick
                }
            }
        } as TokenId;
        if next == EOL {
            break;
        }
        log_probs.push(log_softmax_at(&logits, next as usize));
        ids.push(next);
        prev = next;
    }
    let tokens = vocab.decode(&ids).expect("sampled ids are in range");
    let text = surface_text(&tokens);
    Ok(CandidateLine {
        id: line_id(&text),
        tokens,
        token_ids: ids,
        text,
        log_probs,
        overlap_score: 0,
    })
}

/// `config.count` distinct lines that pass the overlap and length filters.
pub fn generate_set(
    params: &ModelParams,
    vocab: &Vocabulary,
    index: &CorpusIndex,
    config: &GenConfig,
) -> Result<Vec<CandidateLine>, GenError> {
    let mut rng = Rng::seed_from(config.seed);
    generate_batch(params, vocab, index, config, &mut rng, &HashSet::new())
}

/// Like [`generate_set`] with an explicit stream and a set of lowercased
/// surface texts that count as already taken.
pub fn generate_batch(
    params: &ModelParams,
    vocab: &Vocabulary,
    index: &CorpusIndex,
    config: &GenConfig,
    rng: &mut Rng,
    taken: &HashSet<String>,
) -> Result<Vec<CandidateLine>, GenError> {
    config.validate()?;
    check_vocab(params, vocab)?;
    let budget = RETRIES_PER_LINE * config.count;
    let mut seen = HashSet::new();
    let mut accepted = Vec::with_capacity(config.count);
    let mut attempts = 0;
    while accepted.len() < config.count {
        if attempts == budget {
            return Err(GenError::RetryBudgetExhausted {
                requested: config.count,
                accepted: accepted.len(),
                attempts,
            });
        }
        attempts += 1;
        let mut line = sample_line(params, vocab, config.decoding(), config.max_tokens, config.allow_unk, rng)?;
        if line.word_count() < config.min_words {
            continue;
        }
        let key = line.dedup_key();
        if taken.contains(&key) || seen.contains(&key) {
            continue;
        }
        line.overlap_score = ngram_overlap(&line.token_ids, index);
        if line.overlap_score > config.max_ngram_overlap {
            continue;
        }
        seen.insert(key);
        accepted.push(line);
    }
    Ok(accepted)
}
