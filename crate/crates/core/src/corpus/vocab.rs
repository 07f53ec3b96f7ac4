use std::collections::HashMap;

use super::{Corpus, CorpusError};

pub type TokenId = u32;

pub const PAD: TokenId = 0;
pub const UNK: TokenId = 1;
pub const BOS: TokenId = 2;
pub const EOL: TokenId = 3;

/// Surface forms of the reserved ids 0..4, in id order.
pub const SPECIALS: [&str; 4] = ["<pad>", "<unk>", "<bos>", "<eol>"];

/// Bidirectional token ↔ id map. Ids are dense, specials first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    id_to_token: Vec<String>,
    token_to_id: HashMap<String, TokenId>,
}

impl Vocabulary {
    /// Vocabulary holding the specials followed by `tokens` in the given order.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Self {
            id_to_token: Vec::new(),
            token_to_id: HashMap::new(),
        };
        for tok in SPECIALS.iter().map(|s| s.to_string()).chain(tokens.into_iter().map(Into::into)) {
            if tok.is_empty() || tok.contains(char::is_whitespace) {
                return Err(CorpusError::InvalidToken(tok));
            }
            let id = vocab.id_to_token.len() as TokenId;
            if vocab.token_to_id.insert(tok.clone(), id).is_some() {
                return Err(CorpusError::DuplicateToken(tok));
            }
            vocab.id_to_token.push(tok);
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<TokenId> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.id_to_token.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }

    pub fn is_special(id: TokenId) -> bool {
        id <= EOL
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<TokenId> {
        tokens.iter().map(|t| self.id(t.as_ref()).unwrap_or(UNK)).collect()
    }

    pub fn decode(&self, ids: &[TokenId]) -> Result<Vec<String>, CorpusError> {
        ids.iter()
            .map(|&id| {
                self.token(id).map(str::to_owned).ok_or(CorpusError::InvalidId {
                    id,
                    size: self.len(),
                })
            })
            .collect()
    }

    /// One token per line in id order; the first four lines are the specials.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for tok in &self.id_to_token {
            out.push_str(tok);
            out.push('\n');
        }
        out
    }

    pub fn from_file_string(text: &str) -> Result<Self, CorpusError> {
        let mut lines = text.lines();
        for expected in SPECIALS {
            match lines.next() {
                Some(l) if l == expected => {}
                _ => return Err(CorpusError::BadVocabularyHeader),
            }
        }
        Self::from_tokens(lines)
    }
}

/// Vocabulary of every token seen at least `min_count` times.
///
/// Ordering after the specials is by descending count, ties broken by the
/// token's byte order, so identical corpora always give identical ids.
pub fn build_vocab(corpus: &Corpus, min_count: usize) -> Result<Vocabulary, CorpusError> {
    if min_count == 0 {
        return Err(CorpusError::InvalidMinCount);
    }
    if corpus.token_count == 0 {
        return Err(CorpusError::NoTokens);
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for tok in corpus.lines.iter().flatten() {
        *counts.entry(tok.as_str()).or_default() += 1;
    }
    let mut kept: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(tok, n)| n >= min_count && !SPECIALS.contains(&tok))
        .collect();
    kept.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Vocabulary::from_tokens(kept.into_iter().map(|(t, _)| t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corpus_of(lines: &[&[&str]]) -> Corpus {
        let lines: Vec<Vec<String>> = lines
            .iter()
            .map(|l| l.iter().map(|t| t.to_string()).collect())
            .collect();
        Corpus {
            source_name: "test".into(),
            raw_text: String::new(),
            token_count: lines.iter().map(Vec::len).sum(),
            lines,
        }
    }

    #[test]
    fn specials_occupy_first_ids() {
        let v = Vocabulary::from_tokens(Vec::<String>::new()).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(v.id("<pad>"), Some(PAD));
        assert_eq!(v.id("<unk>"), Some(UNK));
        assert_eq!(v.id("<bos>"), Some(BOS));
        assert_eq!(v.id("<eol>"), Some(EOL));
    }

    #[test]
    fn counting_with_min_count_one() {
        let v = build_vocab(&corpus_of(&[&["a", "b", "a"]]), 1).unwrap();
        assert_eq!(v.len(), 6);
        assert_eq!(v.id("a"), Some(4));
        assert_eq!(v.id("b"), Some(5));
    }

    #[test]
    fn threshold_drops_rare_tokens() {
        let v = build_vocab(&corpus_of(&[&["a", "b", "a"]]), 2).unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v.encode(&["a", "b"]), vec![4, UNK]);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert_eq!(build_vocab(&corpus_of(&[]), 1), Err(CorpusError::NoTokens));
        assert_eq!(
            build_vocab(&corpus_of(&[&["a"]]), 0),
            Err(CorpusError::InvalidMinCount)
        );
    }

    #[test]
    fn decode_rejects_out_of_range() {
        let v = build_vocab(&corpus_of(&[&["a"]]), 1).unwrap();
        let size = v.len() as TokenId;
        assert_eq!(
            v.decode(&[size + 5]),
            Err(CorpusError::InvalidId { id: size + 5, size: v.len() })
        );
    }

    #[test]
    fn vocabulary_file_round_trip() {
        let v = build_vocab(&corpus_of(&[&["die", "see", "die", "’n"]]), 1).unwrap();
        let text = v.to_file_string();
        assert!(text.starts_with("<pad>\n<unk>\n<bos>\n<eol>\ndie\n"));
        assert_eq!(Vocabulary::from_file_string(&text).unwrap(), v);
        assert_eq!(
            Vocabulary::from_file_string("die\nsee\n"),
            Err(CorpusError::BadVocabularyHeader)
        );
    }

    #[test]
    fn duplicates_rejected() {
        assert_eq!(
            Vocabulary::from_tokens(["x", "x"]),
            Err(CorpusError::DuplicateToken("x".into()))
        );
    }

    proptest! {
        #[test]
        fn decode_encode_replaces_only_oov(
            known in prop::collection::vec("[a-e]{1,3}", 1..20),
            probe in prop::collection::vec("[a-h]{1,3}", 0..30),
        ) {
            let refs: Vec<&str> = known.iter().map(String::as_str).collect();
            let v = build_vocab(&corpus_of(&[&refs]), 1).unwrap();
            let decoded = v.decode(&v.encode(&probe)).unwrap();
            for (orig, back) in probe.iter().zip(&decoded) {
                if v.id(orig).is_some() {
                    prop_assert_eq!(orig, back);
                } else {
                    prop_assert_eq!(back.as_str(), SPECIALS[UNK as usize]);
                }
            }
        }

        #[test]
        fn ids_are_exact_inverses(known in prop::collection::vec("[a-z]{1,4}", 1..40)) {
            let refs: Vec<&str> = known.iter().map(String::as_str).collect();
            let v = build_vocab(&corpus_of(&[&refs]), 1).unwrap();
            for (id, tok) in v.tokens().iter().enumerate() {
                prop_assert_eq!(v.id(tok), Some(id as TokenId));
            }
        }
    }
}
