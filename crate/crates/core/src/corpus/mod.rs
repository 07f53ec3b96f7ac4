//! Corpus ingestion: normalization, line segmentation, tokenization and the
//! vocabulary.

mod tokenize;
mod vocab;

pub use tokenize::{is_word, tokenize};
pub use vocab::{build_vocab, TokenId, Vocabulary, BOS, EOL, PAD, SPECIALS, UNK};

use std::io;
use std::path::Path;

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus file not found: {0}")]
    NotFound(String),
    #[error("cannot read corpus {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("corpus is not valid UTF-8 (first bad byte at offset {offset})")]
    InvalidEncoding { offset: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("segmentation produced no lines with word content")]
    NoLines,
    #[error("corpus has no tokens")]
    NoTokens,
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("token id {id} out of range for vocabulary of size {size}")]
    InvalidId { id: TokenId, size: usize },
    #[error("invalid vocabulary token {0:?}")]
    InvalidToken(String),
    #[error("duplicate vocabulary token {0:?}")]
    DuplicateToken(String),
    #[error("vocabulary file does not start with the special-token header")]
    BadVocabularyHeader,
}

impl PartialEq for CorpusError {
    fn eq(&self, other: &Self) -> bool {
        use CorpusError::*;
        match (self, other) {
            (NotFound(a), NotFound(b)) => a == b,
            (Io { path: a, .. }, Io { path: b, .. }) => a == b,
            (InvalidEncoding { offset: a }, InvalidEncoding { offset: b }) => a == b,
            (InvalidId { id: a, size: s }, InvalidId { id: b, size: t }) => a == b && s == t,
            (InvalidToken(a), InvalidToken(b)) | (DuplicateToken(a), DuplicateToken(b)) => a == b,
            (EmptyCorpus, EmptyCorpus)
            | (NoLines, NoLines)
            | (NoTokens, NoTokens)
            | (InvalidMinCount, InvalidMinCount)
            | (BadVocabularyHeader, BadVocabularyHeader) => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub source_name: String,
    /// Normalized text: NFC, whitespace runs collapsed to one space,
    /// paragraphs separated by exactly `"\n\n"`.
    pub raw_text: String,
    /// Token sequences, one per segmented line. Empty until segmented.
    pub lines: Vec<Vec<String>>,
    pub token_count: usize,
}

impl Corpus {
    /// Normalizes `text` into an unsegmented corpus.
    pub fn from_text(source_name: impl Into<String>, text: &str) -> Result<Self, CorpusError> {
        let raw_text = normalize_text(text);
        if raw_text.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        Ok(Self {
            source_name: source_name.into(),
            raw_text,
            lines: Vec::new(),
            token_count: 0,
        })
    }

    /// Normalized, segmented and tokenized corpus from in-memory text.
    pub fn from_text_segmented(source_name: impl Into<String>, text: &str) -> Result<Self, CorpusError> {
        segment_lines(Self::from_text(source_name, text)?)
    }

    pub fn paragraphs(&self) -> impl Iterator<Item = &str> {
        self.raw_text.split("\n\n")
    }
}

pub fn load_corpus(path: &Path) -> Result<Corpus, CorpusError> {
    let display = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CorpusError::NotFound(display.clone()),
        _ => CorpusError::Io {
            path: display.clone(),
            source: e,
        },
    })?;
    let text = String::from_utf8(bytes).map_err(|e| CorpusError::InvalidEncoding {
        offset: e.utf8_error().valid_up_to(),
    })?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or(display);
    Corpus::from_text(name, &text)
}

fn normalize_text(text: &str) -> String {
    let nfc: String = text.nfc().collect();
    let mut paragraphs = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in nfc.lines() {
        if line.trim().is_empty() {
            if !current.is_empty() {
                paragraphs.push(collapse_whitespace(&current.join(" ")));
                current.clear();
            }
        } else {
            current.push(line);
        }
    }
    if !current.is_empty() {
        paragraphs.push(collapse_whitespace(&current.join(" ")));
    }
    paragraphs.join("\n\n")
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

const TERMINATORS: [char; 4] = ['.', '!', '?', '…'];
const CLOSERS: [char; 7] = ['"', '”', '’', '\'', ')', ']', '»'];

/// Splits normalized text into surface lines at sentence-final punctuation
/// and paragraph breaks. Lines without any word content are dropped.
pub fn split_sentences(raw_text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for paragraph in raw_text.split("\n\n") {
        let chars: Vec<char> = paragraph.chars().collect();
        let mut start = 0;
        let mut i = 0;
        while i < chars.len() {
            if TERMINATORS.contains(&chars[i]) {
                i += 1;
                while i < chars.len() && (TERMINATORS.contains(&chars[i]) || CLOSERS.contains(&chars[i])) {
                    i += 1;
                }
                push_line(&mut out, &chars[start..i]);
                start = i;
            } else {
                i += 1;
            }
        }
        push_line(&mut out, &chars[start..]);
    }
    out
}

fn push_line(out: &mut Vec<String>, chars: &[char]) {
    let line: String = chars.iter().collect();
    let line = line.trim();
    if line.chars().any(char::is_alphanumeric) {
        out.push(line.to_owned());
    }
}

/// Populates `lines` with the tokenized sentences of `raw_text`.
pub fn segment_lines(mut corpus: Corpus) -> Result<Corpus, CorpusError> {
    if corpus.raw_text.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    corpus.lines = split_sentences(&corpus.raw_text)
        .iter()
        .map(|s| tokenize(s))
        .filter(|t| !t.is_empty())
        .collect();
    if corpus.lines.is_empty() {
        return Err(CorpusError::NoLines);
    }
    corpus.token_count = corpus.lines.iter().map(Vec::len).sum();
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(bytes: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(bytes).unwrap();
        f
    }

    #[test]
    fn load_passes_text_through() {
        let f = write_temp("Die see praat.".as_bytes());
        let c = load_corpus(f.path()).unwrap();
        assert_eq!(c.raw_text, "Die see praat.");
    }

    #[test]
    fn load_errors_are_distinct() {
        let f = write_temp(b"");
        assert_eq!(load_corpus(f.path()), Err(CorpusError::EmptyCorpus));
        let f = write_temp(&[0xFF, 0xFE]);
        assert_eq!(
            load_corpus(f.path()),
            Err(CorpusError::InvalidEncoding { offset: 0 })
        );
        let missing = Path::new("/definitely/not/here.txt");
        assert!(matches!(load_corpus(missing), Err(CorpusError::NotFound(_))));
    }

    #[test]
    fn normalization_collapses_whitespace_and_composes() {
        // "e" + combining circumflex composes to "ê".
        let c = Corpus::from_text("t", "  die   we\u{0302}reld\r\n  draai \n\n\n\n tweede\tparagraaf ").unwrap();
        assert_eq!(c.raw_text, "die wêreld draai\n\ntweede paragraaf");
    }

    #[test]
    fn sentence_terminators_split() {
        let c = Corpus::from_text_segmented("t", "Afrika drink. Die landskap kantel.").unwrap();
        assert_eq!(c.lines.len(), 2);
        assert_eq!(c.lines[0], ["afrika", "drink", "."]);
        assert_eq!(c.token_count, 7);
    }

    #[test]
    fn paragraph_break_splits() {
        let c = Corpus::from_text_segmented("t", "een\n\ntwee").unwrap();
        assert_eq!(c.lines, vec![vec!["een"], vec!["twee"]]);
    }

    #[test]
    fn punctuation_only_has_no_lines() {
        assert_eq!(Corpus::from_text_segmented("t", "?!?"), Err(CorpusError::NoLines));
    }

    #[test]
    fn closing_quotes_stay_with_their_sentence() {
        let lines = split_sentences("“Kom hier!” sê sy. Wag…");
        assert_eq!(lines, ["“Kom hier!”", "sê sy.", "Wag…"]);
    }

    #[test]
    fn token_count_invariant() {
        let c = Corpus::from_text_segmented("t", "Een twee drie. Vier, vyf!\n\nSes").unwrap();
        assert_eq!(c.token_count, c.lines.iter().map(Vec::len).sum::<usize>());
        assert!(c.lines.iter().all(|l| !l.is_empty()));
    }
}
