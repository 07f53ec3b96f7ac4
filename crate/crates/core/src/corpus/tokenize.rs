//! Word-level tokenizer.
//!
//! Words are lowercased runs of alphanumerics, with `'`, `’` and `-` allowed
//! between two alphanumerics. Every other non-space character is a token of
//! its own. The Afrikaans clitics `'n` and `'s` stay whole and are written with
//! the typographic apostrophe, so `'n` and `’n` share one vocabulary entry.

const APOSTROPHES: [char; 4] = ['\'', '’', '‘', '`'];
const CLITIC_APOSTROPHE: char = '’';

fn is_apostrophe(c: char) -> bool {
    APOSTROPHES.contains(&c)
}

fn is_word_joiner(c: char) -> bool {
    is_apostrophe(c) || c == '-'
}

/// The clitic letter when a clitic (`’n`, `’s`) starts at `i`.
fn clitic_at(chars: &[char], i: usize) -> Option<char> {
    if !is_apostrophe(chars[i]) {
        return None;
    }
    if i > 0 && chars[i - 1].is_alphanumeric() {
        return None;
    }
    let letter = chars.get(i + 1)?.to_lowercase().next()?;
    if letter != 'n' && letter != 's' {
        return None;
    }
    match chars.get(i + 2) {
        Some(c) if c.is_alphanumeric() => None,
        _ => Some(letter),
    }
}

pub fn tokenize(line: &str) -> Vec<String> {
    let chars: Vec<char> = line.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if let Some(letter) = clitic_at(&chars, i) {
            tokens.push(format!("{CLITIC_APOSTROPHE}{letter}"));
            i += 2;
        } else if c.is_alphanumeric() {
            let start = i;
            i += 1;
            while i < chars.len() {
                if chars[i].is_alphanumeric() {
                    i += 1;
                } else if is_word_joiner(chars[i])
                    && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
                {
                    i += 2;
                } else {
                    break;
                }
            }
            let word: String = chars[start..i].iter().collect();
            tokens.push(word.to_lowercase());
        } else {
            tokens.push(c.to_string());
            i += 1;
        }
    }
    tokens
}

/// True for tokens that carry word content (as opposed to punctuation).
pub fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}
