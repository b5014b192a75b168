use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub const PAD: &str = "<pad>";
pub const OOV: &str = "<oov>";
pub const EMPTY: &str = "EMPTY";
pub const MAX_MARKERS: usize = 99;

pub fn marker(j: usize) -> String {
    format!("[K{j}]")
}

/// Index of a `[Kj]` marker token, if `token` is one.
pub fn marker_index(token: &str) -> Option<usize> {
    let j: usize = token.strip_prefix("[K")?.strip_suffix(']')?.parse().ok()?;
    (1..=MAX_MARKERS).contains(&j).then_some(j)
}

/// Ordered word list. Index 0 is the pad token, index 1 the OOV token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    words: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, u32>,
    #[serde(skip)]
    lower: BTreeMap<String, u32>,
}

impl Vocabulary {
    /// Pad, OOV, the markers and the sentinel, then `words` in first-seen
    /// order with duplicates removed.
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut list: Vec<String> = alloc::vec![PAD.to_string(), OOV.to_string()];
        list.extend((1..=MAX_MARKERS).map(marker));
        list.push(EMPTY.to_string());
        list.extend(words.into_iter().map(|w| w.as_ref().to_string()));
        Self::from_list(list)
    }

    /// Rebuilds lookups over an exported word list.
    pub fn from_list(list: Vec<String>) -> Self {
        let mut words = Vec::with_capacity(list.len());
        let mut index = BTreeMap::new();
        let mut lower = BTreeMap::new();
        for w in list {
            if w.is_empty() || w.chars().any(char::is_whitespace) || index.contains_key(&w) {
                continue;
            }
            let i = words.len() as u32;
            index.insert(w.clone(), i);
            lower.entry(w.to_lowercase()).or_insert(i);
            words.push(w);
        }
        Self { words, index, lower }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, i: u32) -> &str {
        &self.words[i as usize]
    }

    pub fn lookup(&self, word: &str) -> Option<u32> {
        self.index.get(word).or_else(|| self.lower.get(&word.to_lowercase())).copied()
    }

    /// Stable 64-bit FNV-1a digest of the word list.
    pub fn digest(&self) -> u64 {
        let mut h = crate::rng::label("");
        for w in &self.words {
            h ^= crate::rng::label(w);
            h = h.rotate_left(5).wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_and_lookup() {
        let v = Vocabulary::new(["The", "cup", "cup", "the"]);
        assert_eq!(v.word(0), PAD);
        assert_eq!(v.word(1), OOV);
        assert_eq!(v.lookup("[K1]"), Some(2));
        assert_eq!(v.lookup("EMPTY"), Some(101));
        assert_eq!(v.lookup("The"), Some(102));
        assert_eq!(v.lookup("the"), Some(104));
        assert_eq!(v.lookup("CUP"), Some(103));
        assert_eq!(v.lookup("dog"), None);
        assert_eq!(v.len(), 105);
        assert_eq!(marker_index("[K12]"), Some(12));
        assert_eq!(marker_index("[K100]"), None);
        assert_eq!(Vocabulary::from_list(v.words().to_vec()), v);
    }
}
