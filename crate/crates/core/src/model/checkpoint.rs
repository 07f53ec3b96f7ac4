//! Binary checkpoint format, all integers and floats little-endian:
//!
//! ```text
//! b"AFRIKILM"                       magic, 8 bytes
//! u32 version                       currently 1
//! u32 V, u32 E, u32 H
//! V × (u32 byte length, UTF-8)      vocabulary in id order
//! f64 × n                           tensors in ModelParams::tensors() order
//! u32 epochs, f64 final loss, u64 seed
//! u32 line count, then per line: u32 length, u32 × length token ids
//! ```
//!
//! The trailing block holds the encoded training lines so that generation can
//! measure overlap with the training data without the original text file.

use std::path::Path;

use thiserror::Error;

use super::{ModelDims, ModelParams};
use crate::corpus::{TokenId, Vocabulary, SPECIALS};

pub const MAGIC: &[u8; 8] = b"AFRIKILM";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic bytes)")]
    NotACheckpoint,
    #[error("unsupported checkpoint version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("checkpoint contents inconsistent: {0}")]
    Inconsistent(String),
    #[error("checkpoint I/O on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingMeta {
    pub epochs_completed: u32,
    pub final_loss: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub vocab: Vocabulary,
    pub params: ModelParams,
    pub meta: TrainingMeta,
    /// Encoded training lines (without BOS/EOL).
    pub corpus_lines: Vec<Vec<TokenId>>,
}

impl Checkpoint {
    pub fn new(
        vocab: Vocabulary,
        params: ModelParams,
        meta: TrainingMeta,
        corpus_lines: Vec<Vec<TokenId>>,
    ) -> Result<Self, CheckpointError> {
        let ckpt = Self {
            vocab,
            params,
            meta,
            corpus_lines,
        };
        ckpt.validate()?;
        Ok(ckpt)
    }

    fn validate(&self) -> Result<(), CheckpointError> {
        let dims = self.params.dims();
        if dims.vocab != self.vocab.len() {
            return Err(CheckpointError::Inconsistent(format!(
                "model vocabulary {} vs vocabulary {}",
                dims.vocab,
                self.vocab.len()
            )));
        }
        if !self.params.shapes_consistent() {
            return Err(CheckpointError::Inconsistent("tensor shapes".into()));
        }
        if let Some(id) = self.corpus_lines.iter().flatten().find(|&&id| id as usize >= dims.vocab) {
            return Err(CheckpointError::Inconsistent(format!("corpus token id {id} out of range")));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let dims = self.params.dims();
        let mut out = Vec::with_capacity(32 + 8 * dims.parameter_count());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        for d in [dims.vocab, dims.embed, dims.hidden] {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for tok in self.vocab.tokens() {
            out.extend_from_slice(&(tok.len() as u32).to_le_bytes());
            out.extend_from_slice(tok.as_bytes());
        }
        for tensor in self.params.tensors() {
            for v in tensor.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out.extend_from_slice(&self.meta.epochs_completed.to_le_bytes());
        out.extend_from_slice(&self.meta.final_loss.to_le_bytes());
        out.extend_from_slice(&self.meta.seed.to_le_bytes());
        out.extend_from_slice(&(self.corpus_lines.len() as u32).to_le_bytes());
        for line in &self.corpus_lines {
            out.extend_from_slice(&(line.len() as u32).to_le_bytes());
            for id in line {
                out.extend_from_slice(&id.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CheckpointError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(CheckpointError::NotACheckpoint);
        }
        let mut r = Reader { bytes, pos: MAGIC.len() };
        let version = r.u32("version")?;
        if version != FORMAT_VERSION {
            return Err(CheckpointError::VersionMismatch { found: version });
        }
        let vocab_size = r.u32("V")? as usize;
        let embed = r.u32("E")? as usize;
        let hidden = r.u32("H")? as usize;
        if vocab_size < SPECIALS.len() || embed == 0 || hidden == 0 {
            return Err(CheckpointError::CorruptCheckpoint(format!(
                "invalid dimensions V={vocab_size} E={embed} H={hidden}"
            )));
        }
        let mut tokens = Vec::with_capacity(vocab_size);
        for _ in 0..vocab_size {
            let len = r.u32("token length")? as usize;
            let raw = r.take(len, "token")?;
            let tok = std::str::from_utf8(raw)
                .map_err(|_| CheckpointError::CorruptCheckpoint("token is not UTF-8".into()))?;
            tokens.push(tok.to_owned());
        }
        if tokens[..SPECIALS.len()] != SPECIALS {
            return Err(CheckpointError::CorruptCheckpoint("special tokens missing".into()));
        }
        let vocab = Vocabulary::from_tokens(tokens.into_iter().skip(SPECIALS.len()))
            .map_err(|e| CheckpointError::CorruptCheckpoint(e.to_string()))?;

        let dims = ModelDims { vocab: vocab_size, embed, hidden };
        let mut params = ModelParams::zeros(dims)
            .map_err(|e| CheckpointError::CorruptCheckpoint(e.to_string()))?;
        for tensor in params.tensors_mut() {
            for v in tensor.data_mut() {
                *v = r.f64("tensor")?;
            }
        }
        let meta = TrainingMeta {
            epochs_completed: r.u32("epochs")?,
            final_loss: r.f64("final loss")?,
            seed: r.u64("seed")?,
        };
        let line_count = r.u32("line count")? as usize;
        let mut corpus_lines = Vec::with_capacity(line_count.min(1 << 20));
        for _ in 0..line_count {
            let len = r.u32("line length")? as usize;
            let mut line = Vec::with_capacity(len.min(1 << 16));
            for _ in 0..len {
                line.push(r.u32("token id")?);
            }
            corpus_lines.push(line);
        }
        if r.pos != bytes.len() {
            return Err(CheckpointError::CorruptCheckpoint(format!(
                "{} trailing bytes",
                bytes.len() - r.pos
            )));
        }
        Self::new(vocab, params, meta, corpus_lines).map_err(|e| match e {
            CheckpointError::Inconsistent(m) => CheckpointError::CorruptCheckpoint(m),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CheckpointError> {
        std::fs::write(path, self.to_bytes()).map_err(|source| CheckpointError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CheckpointError> {
        let bytes = std::fs::read(path).map_err(|source| CheckpointError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], CheckpointError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| CheckpointError::CorruptCheckpoint(format!("truncated while reading {what}")))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self, what: &str) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}
