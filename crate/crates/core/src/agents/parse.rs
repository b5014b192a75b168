//! Token-level readers shared by the mock agents.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::KbEntry;
use crate::lexicon::{AISLES, RACKS};
use crate::text::{normalize, strip_trailing_punct};

const KB_HEADER: &str = "Knowledge update:";

/// `t03`-style normalized sensor id.
pub fn is_sensor_id(tok: &str) -> bool {
    let b = tok.as_bytes();
    b.len() == 3
        && matches!(b[0].to_ascii_lowercase(), b't' | b'c' | b'l' | b's')
        && b[1].is_ascii_digit()
        && b[2].is_ascii_digit()
}

/// Rack or aisle label, any case.
pub fn is_place(tok: &str) -> bool {
    RACKS.iter().chain(AISLES).any(|p| p.eq_ignore_ascii_case(tok))
}

/// Normalized coordinate token `(x,y)` to numbers.
pub fn norm_coordinate(tok: &str) -> Option<(f64, f64)> {
    let inner = tok.strip_prefix('(')?.strip_suffix(')')?;
    let (x, y) = inner.split_once(',')?;
    Some((x.parse().ok()?, y.parse().ok()?))
}

pub fn norm_number(tok: &str) -> Option<f64> {
    if tok.starts_with(|c: char| c.is_ascii_digit() || c == '-') {
        tok.parse().ok()
    } else {
        None
    }
}

/// Sensor ids mentioned in raw text, uppercased, first-seen order.
pub fn sensor_ids(text: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for t in normalize(text) {
        if is_sensor_id(&t) {
            let id = t.to_uppercase();
            if !out.contains(&id) {
                out.push(id);
            }
        }
    }
    out
}

/// Renders KB entries as the preload message sent to the robot.
pub fn kb_to_text(entries: &[KbEntry]) -> String {
    if entries.is_empty() {
        return String::new();
    }
    let body: Vec<String> = entries.iter().map(|e| format!("Key item {}, example {}.", e.class, e.example)).collect();
    format!("{KB_HEADER} {}", body.join(" ")).replacen("Key item", "key item", 1)
}

/// Parses a (possibly corrupted) preload message. Each class is the run
/// of words between `item` and `example`; the example runs to the
/// sentence end.
pub fn kb_from_text(text: &str) -> Vec<KbEntry> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        if !strip_trailing_punct(toks[i]).eq_ignore_ascii_case("item") {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        let mut class = Vec::new();
        while j < toks.len() && !strip_trailing_punct(toks[j]).eq_ignore_ascii_case("example") {
            if strip_trailing_punct(toks[j]).eq_ignore_ascii_case("item") {
                break;
            }
            class.push(strip_trailing_punct(toks[j]));
            j += 1;
        }
        if j >= toks.len() || !strip_trailing_punct(toks[j]).eq_ignore_ascii_case("example") {
            i = j;
            continue;
        }
        let mut example = Vec::new();
        j += 1;
        while j < toks.len() {
            let t = toks[j];
            example.push(strip_trailing_punct(t));
            j += 1;
            if t.ends_with(['.', '!', '?']) {
                break;
            }
        }
        let class = class.join(" ").to_lowercase();
        if !class.is_empty() {
            out.push(KbEntry { class, example: example.join(" ") });
        }
        i = j;
    }
    out
}

/// `x` rendered for a sentence: `T03, C05 and L02`.
pub fn list_phrase(items: &[String]) -> String {
    match items.len() {
        0 => String::new(),
        1 => items[0].to_string(),
        n => format!("{} and {}", items[..n - 1].join(", "), items[n - 1]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kb_text_round_trip() {
        let e = alloc::vec![
            KbEntry { class: "dust".into(), example: "R3 dust".into() },
            KbEntry { class: "moisture".into(), example: "A2 moisture".into() },
        ];
        let t = kb_to_text(&e);
        assert_eq!(t, "Knowledge update: key item dust, example R3 dust. Key item moisture, example A2 moisture.");
        assert_eq!(kb_from_text(&t), e);
        assert!(kb_from_text("").is_empty());
        assert_eq!(kb_from_text("Knowledge update: key item dust, vase R3 dust.").len(), 0);
    }

    #[test]
    fn ids_and_places() {
        assert_eq!(sensor_ids("report T03, c05 and T03."), ["T03", "C05"]);
        assert!(is_place("r3") && is_place("A1") && !is_place("R9"));
        assert_eq!(norm_coordinate("(5,1.5)"), Some((5.0, 1.5)));
        assert_eq!(list_phrase(&["a".into(), "b".into(), "c".into()]), "a, b and c");
    }
}
