use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory as G};

fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        G::ConnectorPunctuation
            | G::DashPunctuation
            | G::OpenPunctuation
            | G::ClosePunctuation
            | G::InitialPunctuation
            | G::FinalPunctuation
            | G::OtherPunctuation
    )
}

/// Lowercases, removes every punctuation character and collapses whitespace.
/// Two texts that normalize equally differ only in case and punctuation.
pub fn normalize_for_edit(text: &str) -> String {
    let stripped: String = text.to_lowercase().chars().filter(|&c| !is_punctuation(c)).collect();
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffOp {
    Keep,
    Remove,
    Insert,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffWord {
    pub op: DiffOp,
    pub word: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditVerdict {
    pub accepted: bool,
    pub normalized_original: String,
    pub normalized_edited: String,
    /// Word-level diff of the normalized texts.
    pub diff: Vec<DiffWord>,
    pub summary: String,
}

fn word_diff(a: &[&str], b: &[&str]) -> Vec<DiffWord> {
    let (n, m) = (a.len(), b.len());
    let mut lcs = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    let word = |op, w: &str| DiffWord { op, word: w.to_owned() };
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] {
            out.push(word(DiffOp::Keep, a[i]));
            i += 1;
            j += 1;
        } else if j == m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1]) {
            out.push(word(DiffOp::Remove, a[i]));
            i += 1;
        } else {
            out.push(word(DiffOp::Insert, b[j]));
            j += 1;
        }
    }
    out
}

/// Accepts exactly when the two texts have the same words in the same order,
/// ignoring case and punctuation.
pub fn validate_edit(original: &str, edited: &str) -> EditVerdict {
    let normalized_original = normalize_for_edit(original);
    let normalized_edited = normalize_for_edit(edited);
    let accepted = normalized_original == normalized_edited;
    let a: Vec<&str> = normalized_original.split(' ').filter(|w| !w.is_empty()).collect();
    let b: Vec<&str> = normalized_edited.split(' ').filter(|w| !w.is_empty()).collect();
    let diff = word_diff(&a, &b);
    let summary = if accepted {
        "only case or punctuation changed".to_owned()
    } else {
        let changes: Vec<String> = diff
            .iter()
            .filter_map(|d| match d.op {
                DiffOp::Keep => None,
                DiffOp::Remove => Some(format!("-{}", d.word)),
                DiffOp::Insert => Some(format!("+{}", d.word)),
            })
            .collect();
        if changes.is_empty() {
            "word boundaries changed".to_owned()
        } else {
            format!("words changed: {}", changes.join(" "))
        }
    };
    EditVerdict {
        accepted,
        normalized_original,
        normalized_edited,
        diff,
        summary,
    }
}
