//! Text normalization shared by matchers, parsers and metrics.
//!
//! Normalized form: lowercase whitespace tokens with surrounding punctuation
//! removed, stopwords dropped and numbers in canonical shortest form. A
//! coordinate token `(5.0,1.0)` becomes `(5,1)`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub const STOPWORDS: &[&str] = &[
    "a", "an", "the", "at", "is", "are", "was", "were", "be", "been", "there", "on", "in", "of", "to", "and", "or",
    "it", "its", "i", "we", "you", "this", "that", "with", "for", "as", "has", "have", "by", "from", "please", "all",
    "any", "so", "now", "also", "here",
];

pub fn is_stopword(word: &str) -> bool {
    let lower = word.to_lowercase();
    STOPWORDS.contains(&lower.as_str())
}

const TRAILING: &[char] = &['.', ',', ';', ':', '!', '?', '"', '\''];

/// Canonical form of a decimal literal, or `None` if `s` is not one.
pub fn canonical_number(s: &str) -> Option<String> {
    let body = s.strip_prefix('-').unwrap_or(s);
    let mut parts = body.split('.');
    let int = parts.next()?;
    let frac = parts.next();
    if parts.next().is_some() || int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if let Some(f) = frac {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
    }
    let v: f64 = s.parse().ok()?;
    let v = if v == 0.0 { 0.0 } else { v };
    Some(alloc::format!("{v}"))
}

/// Parses `(x,y)` into its two numbers.
pub fn parse_coordinate(token: &str) -> Option<(f64, f64)> {
    let t = token.trim_end_matches(TRAILING);
    let inner = t.strip_prefix('(')?.strip_suffix(')')?;
    let (x, y) = inner.split_once(',')?;
    canonical_number(x)?;
    canonical_number(y)?;
    Some((x.parse().ok()?, y.parse().ok()?))
}

/// Renders a coordinate with one decimal, as the agents write it.
pub fn format_coordinate(x: f64, y: f64) -> String {
    alloc::format!("({x:.1},{y:.1})")
}

/// Normalizes one whitespace token; `None` if it vanishes.
pub fn normalize_token(token: &str) -> Option<String> {
    let t = token.trim_end_matches(TRAILING);
    if let Some((x, y)) = parse_coordinate(t) {
        return Some(alloc::format!("({x},{y})"));
    }
    let t = t.trim_matches(|c: char| TRAILING.contains(&c) || c == '(' || c == ')');
    if t.is_empty() || !t.chars().any(char::is_alphanumeric) {
        return None;
    }
    if let Some(n) = canonical_number(t) {
        return Some(n);
    }
    let lower = t.to_lowercase();
    if STOPWORDS.contains(&lower.as_str()) {
        return None;
    }
    Some(lower)
}

pub fn normalize(text: &str) -> Vec<String> {
    text.split_whitespace().filter_map(normalize_token).collect()
}

pub fn normalize_joined(text: &str) -> String {
    normalize(text).join(" ")
}

/// True if `needle` occurs as a contiguous run inside `hay`.
pub fn contains_sequence(hay: &[String], needle: &[String]) -> bool {
    if needle.is_empty() {
        return true;
    }
    hay.windows(needle.len()).any(|w| w == needle)
}

/// Splits text into sentences. A sentence ends at a token ending in `.`,
/// `!` or `?`, or at a newline. Returned sentences keep their tokens
/// verbatim, joined by single spaces.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines() {
        let mut cur: Vec<&str> = Vec::new();
        for tok in line.split_whitespace() {
            cur.push(tok);
            if ends_sentence(tok) {
                out.push(cur.join(" "));
                cur.clear();
            }
        }
        if !cur.is_empty() {
            out.push(cur.join(" "));
        }
    }
    out
}

pub fn ends_sentence(token: &str) -> bool {
    token.ends_with(['.', '!', '?'])
}

/// Collapses runs of whitespace to one space.
pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Case-insensitive token test against a list.
pub fn word_in(word: &str, list: &[&str]) -> bool {
    let w = word.trim_end_matches(TRAILING).to_lowercase();
    list.iter().any(|x| *x == w)
}

pub fn strip_trailing_punct(token: &str) -> &str {
    token.trim_end_matches(TRAILING)
}

pub fn to_strings(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_canonical() {
        assert_eq!(canonical_number("5.0").as_deref(), Some("5"));
        assert_eq!(canonical_number("41.50").as_deref(), Some("41.5"));
        assert_eq!(canonical_number("-0.0").as_deref(), Some("0"));
        assert_eq!(canonical_number("1e5"), None);
        assert_eq!(canonical_number("T03"), None);
        assert_eq!(canonical_number("3."), None);
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(
            normalize_joined("The thermal sensor T03: 41.5 C at (2.0,3.5)."),
            "thermal sensor t03 41.5 c (2,3.5)"
        );
        assert_eq!(normalize_joined("I placed the cup at (5.0,1.0) as instructed."), "placed cup (5,1) instructed");
        assert_eq!(normalize_joined("  ,  . "), "");
    }

    #[test]
    fn sentence_split() {
        assert_eq!(split_sentences("Robot at (2,3). Moving."), ["Robot at (2,3).", "Moving."]);
        assert_eq!(split_sentences("a b\nc d! e"), ["a b", "c d!", "e"]);
        assert!(split_sentences("   ").is_empty());
    }

    #[test]
    fn containment() {
        let hay = normalize("At rack R3 there is dust on the floor.");
        assert!(contains_sequence(&hay, &normalize("R3 dust")));
        assert!(!contains_sequence(&hay, &normalize("R4 dust")));
    }
}
