//! Orthographic sound-device detection, word frequencies and overlap
//! statistics for generated sets.
//!
//! The detectors work on spelling alone. Alliteration compares initial
//! letters; assonance compares runs of two or more vowel letters (`aa`, `ie`,
//! `oei`, ...), which is how long vowels and diphthongs are written in
//! Afrikaans.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use crate::corpus::{is_word, tokenize, Corpus, TokenId};
use crate::generator::{ngram_overlap, CorpusIndex};

/// Largest index distance between neighbouring members of a group, so that
/// each linked pair falls inside a window of four tokens.
pub const DEVICE_WINDOW_GAP: usize = 3;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_af.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// One word per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .flat_map(tokenize)
                .collect(),
        )
    }

    pub fn afrikaans() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn none() -> Self {
        Self(HashSet::new())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(Into::into).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeviceGroup {
    /// Shared initial letter or vowel cluster.
    pub key: String,
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeviceReport {
    pub line: String,
    pub tokens: Vec<String>,
    pub alliterations: Vec<DeviceGroup>,
    pub assonances: Vec<DeviceGroup>,
}

impl DeviceReport {
    pub fn is_empty(&self) -> bool {
        self.alliterations.is_empty() && self.assonances.is_empty()
    }
}

fn is_vowel(c: char) -> bool {
    matches!(
        c,
        'a' | 'e' | 'i' | 'o' | 'u' | 'y' | 'á' | 'à' | 'â' | 'ä' | 'é' | 'è' | 'ê' | 'ë' | 'í' | 'ì' | 'î' | 'ï'
            | 'ó' | 'ò' | 'ô' | 'ö' | 'ú' | 'ù' | 'û' | 'ü' | 'ý'
    )
}

/// Maximal runs of two or more vowel letters in a lowercase word.
pub fn vowel_clusters(word: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut run = String::new();
    for c in word.chars().chain(std::iter::once(' ')) {
        if is_vowel(c) {
            run.push(c);
        } else {
            if run.chars().count() >= 2 {
                out.push(run.clone());
            }
            run.clear();
        }
    }
    out
}

/// Chains same-key positions whose neighbours are at most
/// [`DEVICE_WINDOW_GAP`] apart; chains of one are dropped.
fn group(keyed: Vec<(String, usize)>) -> Vec<DeviceGroup> {
    let mut by_key: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (key, pos) in keyed {
        let positions = by_key.entry(key).or_default();
        if positions.last() != Some(&pos) {
            positions.push(pos);
        }
    }
    let mut groups = Vec::new();
    for (key, positions) in by_key {
        let mut chain: Vec<usize> = Vec::new();
        for pos in positions {
            if chain.last().is_some_and(|&last| pos - last > DEVICE_WINDOW_GAP) {
                if chain.len() >= 2 {
                    groups.push(DeviceGroup { key: key.clone(), positions: std::mem::take(&mut chain) });
                }
                chain.clear();
            }
            chain.push(pos);
        }
        if chain.len() >= 2 {
            groups.push(DeviceGroup { key, positions: chain });
        }
    }
    groups.sort_by(|a, b| (a.positions[0], &a.key).cmp(&(b.positions[0], &b.key)));
    groups
}

fn content_words<'a, S: AsRef<str>>(
    tokens: &'a [S],
    stopwords: &'a Stopwords,
) -> impl Iterator<Item = (usize, String)> + 'a {
    tokens.iter().enumerate().filter_map(|(i, t)| {
        let lower = t.as_ref().to_lowercase();
        (is_word(&lower) && !stopwords.contains(&lower)).then_some((i, lower))
    })
}

/// Content words within a four-token window sharing their first letter.
pub fn detect_alliteration<S: AsRef<str>>(tokens: &[S], stopwords: &Stopwords) -> Vec<DeviceGroup> {
    group(
        content_words(tokens, stopwords)
            .filter_map(|(i, w)| w.chars().find(|c| c.is_alphabetic()).map(|c| (c.to_string(), i)))
            .collect(),
    )
}

/// Content words within a four-token window sharing a vowel cluster.
pub fn detect_assonance<S: AsRef<str>>(tokens: &[S], stopwords: &Stopwords) -> Vec<DeviceGroup> {
    group(
        content_words(tokens, stopwords)
            .flat_map(|(i, w)| vowel_clusters(&w).into_iter().map(move |c| (c, i)))
            .collect(),
    )
}

pub fn analyze_line(line: &str, stopwords: &Stopwords) -> DeviceReport {
    let tokens = tokenize(line);
    DeviceReport {
        line: line.to_owned(),
        alliterations: detect_alliteration(&tokens, stopwords),
        assonances: detect_assonance(&tokens, stopwords),
        tokens,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyTable {
    /// Descending count, ties in byte order of the token.
    pub entries: Vec<(String, usize)>,
    /// Tokens left out: stopwords and punctuation.
    pub excluded: usize,
}

impl FrequencyTable {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|(_, c)| c).sum()
    }

    pub fn top(&self, n: usize) -> &[(String, usize)] {
        &self.entries[..n.min(self.entries.len())]
    }
}

pub fn frequency_table(corpus: &Corpus, stopwords: &Stopwords) -> FrequencyTable {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut excluded = 0;
    for tok in corpus.lines.iter().flatten() {
        if is_word(tok) && !stopwords.contains(tok) {
            *counts.entry(tok).or_default() += 1;
        } else {
            excluded += 1;
        }
    }
    let mut entries: Vec<(String, usize)> = counts.into_iter().map(|(t, c)| (t.to_owned(), c)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    FrequencyTable { entries, excluded }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapReport {
    pub lines: usize,
    /// Longest shared run length → number of lines.
    pub histogram: BTreeMap<usize, usize>,
    pub fractions: BTreeMap<usize, f64>,
    pub mean: f64,
    pub max: usize,
}

pub fn overlap_report<L: AsRef<[TokenId]>>(lines: &[L], index: &CorpusIndex) -> OverlapReport {
    let mut histogram = BTreeMap::new();
    let mut sum = 0;
    for line in lines {
        let score = ngram_overlap(line.as_ref(), index);
        *histogram.entry(score).or_insert(0) += 1;
        sum += score;
    }
    let n = lines.len();
    let fractions = histogram.iter().map(|(&k, &c)| (k, c as f64 / n as f64)).collect();
    OverlapReport {
        lines: n,
        max: histogram.keys().next_back().copied().unwrap_or(0),
        mean: if n == 0 { 0.0 } else { sum as f64 / n as f64 },
        histogram,
        fractions,
    }
}
