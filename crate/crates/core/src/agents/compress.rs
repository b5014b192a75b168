//! Rule-based message compressor.
//!
//! Steps run in order until the character ratio reaches the target:
//! filler sentences are removed (last first) and the rest merged into one
//! clause list, stopwords dropped, words abbreviated, clauses without a
//! protected token dropped, and finally every clause cut to its protected
//! core in one pass.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::AgentKnowledge;
use crate::lexicon::{ABBREVIATIONS, BS_FILLERS, BS_OPENINGS, COMMAND_WORDS, ROBOT_FILLERS_CASE1, ROBOT_FILLERS_CASE2};
use crate::semantic::{marker_index, EMPTY};
use crate::text::{is_stopword, split_sentences, strip_trailing_punct};

const UNITS: &[&str] = &["C", "lux", "m", "dB"];

/// Sentence the compressor treats as redundant.
pub fn is_filler(sentence: &str) -> bool {
    let s = sentence.trim();
    s.starts_with("To confirm,")
        || ROBOT_FILLERS_CASE1.iter().chain(ROBOT_FILLERS_CASE2).chain(BS_OPENINGS).chain(BS_FILLERS).any(|f| *f == s)
}

/// Tokens compression must keep.
pub struct Protection {
    words: Vec<String>,
}

impl Protection {
    pub fn new(knowledge: &AgentKnowledge) -> Self {
        let mut words = knowledge.class_words();
        words.extend(knowledge.identifiers.iter().map(|w| w.to_lowercase()));
        words.extend(COMMAND_WORDS.iter().map(|w| w.to_string()));
        Self { words }
    }

    pub fn protects(&self, token: &str) -> bool {
        let t = strip_trailing_punct(token);
        if t.chars().any(|c| c.is_ascii_digit()) || marker_index(t).is_some() || t == EMPTY || UNITS.contains(&t) {
            return true;
        }
        let lower = t.to_lowercase();
        self.words.contains(&lower)
    }
}

fn chars(clauses: &[Vec<String>], merged: bool) -> usize {
    render(clauses, merged).chars().count()
}

fn render(clauses: &[Vec<String>], merged: bool) -> String {
    if !merged {
        return clauses.iter().map(|c| c.join(" ")).collect::<Vec<_>>().join(" ");
    }
    let parts: Vec<String> = clauses.iter().filter(|c| !c.is_empty()).map(|c| c.join(" ")).collect();
    if parts.is_empty() {
        return String::new();
    }
    parts.join("; ") + "."
}

fn trailing(tok: &str) -> &str {
    &tok[strip_trailing_punct(tok).len()..]
}

/// Removes token `j` of `clause`, handing its trailing punctuation to the
/// previous token.
fn drop_token(clause: &mut Vec<String>, j: usize) {
    let tok = clause.remove(j);
    let p = trailing(&tok);
    if !p.is_empty() && j > 0 && trailing(&clause[j - 1]).is_empty() {
        clause[j - 1].push_str(p);
    }
}

fn abbreviate(tok: &str) -> Option<String> {
    let body = strip_trailing_punct(tok);
    ABBREVIATIONS.iter().find(|(w, _)| w.eq_ignore_ascii_case(body)).map(|(_, a)| String::from(*a) + trailing(tok))
}

fn is_key(token: &str) -> bool {
    let body = strip_trailing_punct(token);
    marker_index(body).is_some() || body.chars().any(|c| c.is_ascii_digit())
}

/// Every digit or marker token of clause `i` also occurs in another clause.
fn restated(clauses: &[Vec<String>], i: usize) -> bool {
    clauses[i].iter().filter(|t| is_key(t)).all(|t| {
        let body = strip_trailing_punct(t);
        clauses.iter().enumerate().any(|(j, c)| j != i && c.iter().any(|u| strip_trailing_punct(u) == body))
    })
}

/// Compresses `text` toward `target` = chars(out)/chars(in).
pub fn compress(text: &str, knowledge: &AgentKnowledge, target: f64) -> String {
    if target >= 1.0 || text.trim().is_empty() {
        return text.to_string();
    }
    let total = text.chars().count().max(1) as f64;
    let prot = Protection::new(knowledge);
    let mut clauses: Vec<Vec<String>> =
        split_sentences(text).iter().map(|s| s.split_whitespace().map(|t| t.to_string()).collect()).collect();
    let mut merged = false;
    let done = |c: &[Vec<String>], m: bool| chars(c, m) as f64 / total <= target;

    // 1. fillers, last first; then merge
    for i in (0..clauses.len()).rev() {
        if done(&clauses, merged) {
            return render(&clauses, merged);
        }
        if clauses.len() > 1 && is_filler(&clauses[i].join(" ")) && restated(&clauses, i) {
            clauses.remove(i);
        }
    }
    if done(&clauses, merged) {
        return render(&clauses, merged);
    }
    for c in &mut clauses {
        if let Some(last) = c.last_mut() {
            let body = strip_trailing_punct(last).len();
            last.truncate(body);
        }
        c.retain(|t| !t.is_empty());
    }
    clauses.retain(|c| !c.is_empty());
    merged = true;

    // 2. stopwords, last first
    for i in (0..clauses.len()).rev() {
        for j in (0..clauses[i].len()).rev() {
            if done(&clauses, merged) {
                return render(&clauses, merged);
            }
            if clauses[i].len() > 1
                && is_stopword(strip_trailing_punct(&clauses[i][j]))
                && !prot.protects(&clauses[i][j])
            {
                drop_token(&mut clauses[i], j);
            }
        }
    }

    // 3. abbreviations
    for i in (0..clauses.len()).rev() {
        for j in (0..clauses[i].len()).rev() {
            if done(&clauses, merged) {
                return render(&clauses, merged);
            }
            if !prot.protects(&clauses[i][j]) {
                if let Some(a) = abbreviate(&clauses[i][j]) {
                    clauses[i][j] = a;
                }
            }
        }
    }

    // 4. clauses with nothing protected, last first
    for i in (0..clauses.len()).rev() {
        if done(&clauses, merged) {
            return render(&clauses, merged);
        }
        if clauses.len() > 1 && !clauses[i].iter().any(|t| prot.protects(t)) {
            clauses.remove(i);
        }
    }
    if done(&clauses, merged) {
        return render(&clauses, merged);
    }

    // 5. protected core
    if clauses.iter().any(|c| c.iter().any(|t| prot.protects(t))) {
        for c in &mut clauses {
            for j in (0..c.len()).rev() {
                if !prot.protects(&c[j]) {
                    drop_token(c, j);
                }
            }
            for t in c.iter_mut() {
                let body = strip_trailing_punct(t).len();
                if t.ends_with([',', ';']) {
                    t.truncate(body);
                }
            }
        }
        clauses.retain(|c| !c.is_empty());
    }
    render(&clauses, merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kn() -> AgentKnowledge {
        AgentKnowledge::default()
    }

    #[test]
    fn identity_at_full_ratio() {
        let t = "Hello robot, thank you for your help with this task. Please locate the cup.";
        assert_eq!(compress(t, &kn(), 1.0), t);
    }

    #[test]
    fn drops_fillers_first() {
        let t = "I found the cup at (2.0,3.0). The room is quiet and nothing else has changed.";
        let c = compress(t, &kn(), 0.7);
        assert_eq!(c, "I found the cup at (2.0,3.0).");
    }

    #[test]
    fn core_keeps_digits_and_classes() {
        let t = "At rack R3 there is dust on the shelves, cleaning is recommended. \
                 At aisle A1 there is an oil stain on the floor, cleaning is recommended.";
        let c = compress(t, &kn(), 0.05);
        assert_eq!(c, "R3; aisle A1 oil stain.");
        let mut k = kn();
        k.inject(&[super::super::KbEntry { class: "dust".into(), example: "R3 dust".into() }]);
        assert_eq!(compress(t, &k, 0.05), "R3 dust; aisle A1 oil stain.");
    }

    #[test]
    fn never_empty() {
        let t = "Everything else in this area looks normal to me.";
        assert!(!compress(t, &kn(), 0.01).is_empty());
    }
}
