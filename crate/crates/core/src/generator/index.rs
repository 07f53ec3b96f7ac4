use crate::corpus::{TokenId, UNK};

const SEPARATOR: TokenId = TokenId::MAX;

/// Where the longest shared run of a probe was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SharedRun {
    pub len: usize,
    /// Start of the run inside the probe.
    pub probe_start: usize,
    /// Corpus line containing it.
    pub line: usize,
}

/// Exact longest-common-substring lookup against the training lines.
///
/// Lines are concatenated with a separator and indexed by a suffix array, so a
/// match can never span two lines. `<unk>` is stored as a separator too: an
/// unknown word in the corpus does not match an unknown word in a probe.
#[derive(Debug, Clone)]
pub struct CorpusIndex {
    text: Vec<TokenId>,
    suffixes: Vec<u32>,
    line_starts: Vec<usize>,
}

impl CorpusIndex {
    pub fn build(lines: &[Vec<TokenId>]) -> Self {
        let mut text = Vec::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
        let mut line_starts = Vec::with_capacity(lines.len());
        for line in lines {
            line_starts.push(text.len());
            text.extend(line.iter().map(|&id| if id == UNK { SEPARATOR } else { id }));
            text.push(SEPARATOR);
        }
        let mut suffixes: Vec<u32> = (0..text.len() as u32)
            .filter(|&i| text[i as usize] != SEPARATOR)
            .collect();
        suffixes.sort_unstable_by(|&a, &b| text[a as usize..].cmp(&text[b as usize..]));
        Self {
            text,
            suffixes,
            line_starts,
        }
    }

    pub fn line_count(&self) -> usize {
        self.line_starts.len()
    }

    pub fn token_count(&self) -> usize {
        self.suffixes.len()
    }

    /// Whether `ngram` occurs contiguously inside one corpus line.
    pub fn contains(&self, ngram: &[TokenId]) -> bool {
        ngram.is_empty() || self.matching_len(ngram).0 == ngram.len()
    }

    /// Longest prefix of `probe` present in the corpus, with the suffix-array
    /// slot of one occurrence.
    fn matching_len(&self, probe: &[TokenId]) -> (usize, usize) {
        let (mut lo, mut hi) = (0, self.suffixes.len());
        let mut depth = 0;
        while depth < probe.len() {
            let tok = probe[depth];
            if tok == SEPARATOR || tok == UNK {
                break;
            }
            let at = |s: u32| self.text[s as usize + depth];
            let range = &self.suffixes[lo..hi];
            let first = range.partition_point(|&s| at(s) < tok);
            let last = range.partition_point(|&s| at(s) <= tok);
            if first == last {
                break;
            }
            hi = lo + last;
            lo += first;
            depth += 1;
        }
        (depth, lo)
    }

    pub fn longest_shared(&self, probe: &[TokenId]) -> Option<SharedRun> {
        let mut best: Option<SharedRun> = None;
        for start in 0..probe.len() {
            if best.is_some_and(|b| b.len >= probe.len() - start) {
                break;
            }
            let (len, slot) = self.matching_len(&probe[start..]);
            if len > 0 && best.is_none_or(|b| len > b.len) {
                let pos = self.suffixes[slot] as usize;
                let line = self.line_starts.partition_point(|&s| s <= pos) - 1;
                best = Some(SharedRun {
                    len,
                    probe_start: start,
                    line,
                });
            }
        }
        best
    }
}

/// Length of the longest contiguous token run `tokens` shares with a corpus
/// line.
pub fn ngram_overlap(tokens: &[TokenId], index: &CorpusIndex) -> usize {
    index.longest_shared(tokens).map_or(0, |r| r.len)
}
