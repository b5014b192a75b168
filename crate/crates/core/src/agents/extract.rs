//! Key-item extraction with position markers, and the inverse
//! reconstruction at the receiver.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{AgentKnowledge, KeyItem, KeyItemSet, Reconstruction};
use crate::semantic::{marker, marker_index, EMPTY, MAX_MARKERS};
use crate::text::{canonical_number, split_sentences, strip_trailing_punct};

const UNITS: &[&str] = &["C", "lux", "m", "dB"];

struct Tok<'a> {
    start: usize,
    text: &'a str,
}

fn tokens(text: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Tok { start: s, text: &text[s..i] });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Tok { start: s, text: &text[s..] });
    }
    out
}

/// Which tokens are key items under `knowledge`.
fn key_flags(toks: &[Tok<'_>], knowledge: &AgentKnowledge) -> Vec<bool> {
    let bodies: Vec<String> = toks.iter().map(|t| strip_trailing_punct(t.text).to_lowercase()).collect();
    let mut key: Vec<bool> = toks
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let body = strip_trailing_punct(t.text);
            body.chars().any(|c| c.is_ascii_digit())
                || (i > 0
                    && UNITS.contains(&body)
                    && canonical_number(strip_trailing_punct(toks[i - 1].text)).is_some())
                || knowledge.identifiers.iter().any(|w| w.eq_ignore_ascii_case(body))
        })
        .collect();
    for class in &knowledge.extractor_classes {
        let words: Vec<String> = class.split_whitespace().map(|w| w.to_lowercase()).collect();
        if words.is_empty() || words.len() > bodies.len() {
            continue;
        }
        for i in 0..=bodies.len() - words.len() {
            if bodies[i..i + words.len()] == words[..] {
                key[i..i + words.len()].iter_mut().for_each(|k| *k = true);
            }
        }
    }
    key
}

/// Marks maximal runs of key tokens with `[K1]`, `[K2]`, ... A trailing
/// `:` keeps a run open; `, ; . ! ?` closes it and stays in the text.
pub fn extract(text: &str, knowledge: &AgentKnowledge) -> (KeyItemSet, String) {
    let toks = tokens(text);
    let key = key_flags(&toks, knowledge);
    // (byte start, byte end) of each span
    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut open: Option<usize> = None;
    for (i, t) in toks.iter().enumerate() {
        if !key[i] {
            if let Some(s) = open.take() {
                let prev = &toks[i - 1];
                spans.push((s, prev.start + prev.text.len()));
            }
            continue;
        }
        let s = *open.get_or_insert(t.start);
        let closes = t.text.ends_with([',', ';', '.', '!', '?']);
        if closes {
            let body = t.text.trim_end_matches([',', ';', '.', '!', '?', ':', '"', '\'']);
            spans.push((s, t.start + body.len()));
            open = None;
        }
    }
    if let Some(s) = open {
        let last = &toks[toks.len() - 1];
        spans.push((s, last.start + last.text.len()));
    }
    spans.truncate(MAX_MARKERS);

    let mut items = Vec::with_capacity(spans.len());
    let mut marked = String::with_capacity(text.len());
    let mut at = 0;
    for (j, &(s, e)) in spans.iter().enumerate() {
        let m = marker(j + 1);
        marked.push_str(&text[at..s]);
        marked.push_str(&m);
        items.push(KeyItem { marker: m, text: text[s..e].to_string(), position: text[..s].chars().count() });
        at = e;
    }
    marked.push_str(&text[at..]);
    (KeyItemSet { items }, marked)
}

/// `[K1] T03: 41.5 C [K2] (2.0,3.5)`; the item list sent at the stronger
/// budget.
pub fn serialize_items(items: &KeyItemSet) -> String {
    items.items.iter().map(|i| format!("{} {}", i.marker, i.text)).collect::<Vec<_>>().join(" ")
}

/// Re-inserts values from `part1` into the markers of `part2` and merges
/// `part3` by the order labels (2 or 3 per sentence, or the first-use order
/// of the parts). Without usable labels part3 is appended.
pub fn reconstruct(part1: &str, part2: &str, part3: &str, order: &[u8]) -> Reconstruction {
    let clean = |p: &str| if p.trim() == EMPTY { String::new() } else { p.trim().to_string() };
    let (part1, part2, part3) = (clean(part1), clean(part2), clean(part3));

    let mut values: BTreeMap<usize, String> = BTreeMap::new();
    let mut orphans: Vec<String> = Vec::new();
    let mut current: Option<usize> = None;
    let mut buf: Vec<&str> = Vec::new();
    let mut flush = |cur: Option<usize>, buf: &mut Vec<&str>, values: &mut BTreeMap<usize, String>| {
        if !buf.is_empty() {
            let v = buf.join(" ");
            match cur {
                Some(j) if !values.contains_key(&j) => {
                    values.insert(j, v);
                }
                _ => orphans.push(v),
            }
        }
        buf.clear();
    };
    for tok in part1.split_whitespace() {
        if let Some(j) = marker_index(tok) {
            flush(current, &mut buf, &mut values);
            current = Some(j);
        } else {
            buf.push(tok);
        }
    }
    flush(current, &mut buf, &mut values);

    let mut unresolved = 0;
    let mut used: Vec<usize> = Vec::new();
    let filled: Vec<String> = part2
        .split_whitespace()
        .map(|tok| {
            let body = strip_trailing_punct(tok);
            match marker_index(body) {
                Some(j) => match values.get(&j) {
                    Some(v) => {
                        used.push(j);
                        format!("{v}{}", &tok[body.len()..])
                    }
                    None => {
                        log::debug!("unresolved marker {body}");
                        unresolved += 1;
                        tok.to_string()
                    }
                },
                None => tok.to_string(),
            }
        })
        .collect();
    let part2 = filled.join(" ");
    for (j, v) in &values {
        if !used.contains(j) {
            orphans.push(v.clone());
        }
    }

    let s2 = split_sentences(&part2);
    let s3 = split_sentences(&part3);
    let mut out: Vec<String> = Vec::new();
    let full = order.len() == s2.len() + s3.len() && order.iter().filter(|&&o| o == 2).count() == s2.len();
    if full && !order.is_empty() {
        let (mut a, mut b) = (s2.into_iter(), s3.into_iter());
        for &o in order {
            out.extend(if o == 2 { a.next() } else { b.next() });
        }
    } else if order.first() == Some(&3) {
        out.extend(s3);
        out.extend(s2);
    } else {
        out.extend(s2);
        out.extend(s3);
    }
    let mut text = out.join(" ");
    for o in orphans {
        if text.contains(o.as_str()) {
            continue;
        }
        unresolved += 1;
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(&o);
    }
    Reconstruction { text, unresolved }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kn() -> AgentKnowledge {
        AgentKnowledge::default()
    }

    #[test]
    fn marks_readings() {
        let t = "The thermal sensor T03: 41.5 C at (2.0,3.5). Everything looks normal.";
        let (items, marked) = extract(t, &kn());
        assert_eq!(marked, "The thermal sensor [K1] at [K2]. Everything looks normal.");
        assert_eq!(items.items[0].text, "T03: 41.5 C");
        assert_eq!(items.items[0].position, 19);
        assert_eq!(items.items[1].text, "(2.0,3.5)");
        assert_eq!(serialize_items(&items), "[K1] T03: 41.5 C [K2] (2.0,3.5)");
    }

    #[test]
    fn kb_classes_become_key_items() {
        let t = "At rack R3 there is dust on the shelves.";
        let (base, _) = extract(t, &kn());
        assert_eq!(base.items.len(), 1);
        let mut k = kn();
        k.inject(&[super::super::KbEntry { class: "dust".into(), example: "R3 dust".into() }]);
        let (aug, marked) = extract(t, &k);
        assert_eq!(aug.items.iter().map(|i| i.text.as_str()).collect::<Vec<_>>(), ["R3", "dust"]);
        assert_eq!(marked, "At rack [K1] there is [K2] on the shelves.");
    }

    #[test]
    fn no_key_items() {
        let t = "Everything else looks normal.";
        let (items, marked) = extract(t, &kn());
        assert!(items.items.is_empty());
        assert_eq!(marked, t);
    }

    #[test]
    fn reconstruct_substitutes_and_orders() {
        let r = reconstruct("[K1] T03: 41.5 C [K2] (2.0,3.5)", "The sensor [K1] at [K2].", "Fine.", &[3, 2]);
        assert_eq!(r.text, "Fine. The sensor T03: 41.5 C at (2.0,3.5).");
        assert_eq!(r.unresolved, 0);
    }

    #[test]
    fn corrupted_marker_stays_literal_and_value_is_appended() {
        let r = reconstruct("[K1] T03 [K2] (2.0,3.5)", "Sensor [K1] at [K9].", "", &[2]);
        assert_eq!(r.text, "Sensor T03 at [K9]. (2.0,3.5)");
        assert_eq!(r.unresolved, 2);
        let empty = reconstruct("EMPTY", "Sensor [K1].", "EMPTY", &[]);
        assert_eq!(empty.text, "Sensor [K1].");
        assert_eq!(reconstruct("EMPTY", "EMPTY", "EMPTY", &[]).text, "");
    }
}
