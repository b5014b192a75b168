//! Canonical byte-level Huffman code with an end-of-text symbol.

use alloc::collections::BinaryHeap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::error::{invalid, Result};

pub const SYMBOLS: usize = 257;
pub const EOT: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanCodebook {
    lengths: Vec<u8>,
    codes: Vec<u64>,
    /// Decode tree: `(child0, child1)`; values `>= SYMBOLS as u32 + 1`
    /// index internal nodes, smaller values are leaves `symbol`.
    tree: Vec<[u32; 2]>,
}

const LEAF_FLAG: u32 = 1 << 31;

impl HuffmanCodebook {
    /// Builds the code from byte frequencies of `corpus`, each count raised
    /// by one so every byte (and the end marker) gets a codeword.
    pub fn build(corpus: &str) -> Result<Self> {
        if corpus.is_empty() {
            return invalid("Huffman corpus is empty");
        }
        let mut freq = vec![1u64; SYMBOLS];
        for b in corpus.bytes() {
            freq[b as usize] += 1;
        }
        Self::from_frequencies(&freq)
    }

    pub fn from_frequencies(freq: &[u64]) -> Result<Self> {
        if freq.len() != SYMBOLS || freq.contains(&0) {
            return invalid("need a positive frequency for each of the 257 symbols");
        }
        // Ties break on node id; leaves get ids 0..257, merged nodes count up.
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
            freq.iter().enumerate().map(|(s, &f)| Reverse((f, s))).collect();
        let mut parent = vec![usize::MAX; 2 * SYMBOLS - 1];
        let mut next = SYMBOLS;
        while heap.len() > 1 {
            let Reverse((fa, a)) = heap.pop().unwrap();
            let Reverse((fb, b)) = heap.pop().unwrap();
            parent[a] = next;
            parent[b] = next;
            heap.push(Reverse((fa + fb, next)));
            next += 1;
        }
        let lengths = (0..SYMBOLS)
            .map(|s| {
                let mut d = 0u32;
                let mut n = s;
                while parent[n] != usize::MAX {
                    n = parent[n];
                    d += 1;
                }
                d
            })
            .collect::<Vec<u32>>();
        if lengths.iter().any(|&l| l > 63) {
            return invalid("code length exceeds 63 bits");
        }
        Self::from_lengths(&lengths.iter().map(|&l| l as u8).collect::<Vec<_>>())
    }

    /// Rebuilds the canonical code from its code lengths.
    pub fn from_lengths(lengths: &[u8]) -> Result<Self> {
        if lengths.len() != SYMBOLS || lengths.iter().any(|&l| l == 0 || l > 63) {
            return invalid("need 257 code lengths in 1..=63");
        }
        let kraft: u128 = lengths.iter().map(|&l| 1u128 << (63 - l)).sum();
        if kraft != 1u128 << 63 {
            return invalid("code lengths do not form a complete prefix code");
        }
        let mut order: Vec<usize> = (0..SYMBOLS).collect();
        order.sort_by_key(|&s| (lengths[s], s));
        let mut codes = vec![0u64; SYMBOLS];
        let mut code = 0u64;
        let mut prev_len = lengths[order[0]];
        for (i, &s) in order.iter().enumerate() {
            if i > 0 {
                code = (code + 1) << (lengths[s] - prev_len);
            }
            codes[s] = code;
            prev_len = lengths[s];
        }
        let mut tree: Vec<[u32; 2]> = vec![[u32::MAX; 2]];
        for s in 0..SYMBOLS {
            let len = lengths[s];
            let mut node = 0usize;
            for i in (0..len).rev() {
                let bit = ((codes[s] >> i) & 1) as usize;
                if i == 0 {
                    tree[node][bit] = LEAF_FLAG | s as u32;
                } else {
                    if tree[node][bit] == u32::MAX {
                        tree.push([u32::MAX; 2]);
                        tree[node][bit] = (tree.len() - 1) as u32;
                    }
                    node = tree[node][bit] as usize;
                }
            }
        }
        Ok(Self { lengths: lengths.to_vec(), codes, tree })
    }

    pub fn lengths(&self) -> &[u8] {
        &self.lengths
    }

    pub fn code_length(&self, symbol: usize) -> u8 {
        self.lengths[symbol]
    }

    pub fn kraft_sum(&self) -> f64 {
        self.lengths.iter().map(|&l| libm::ldexp(1.0, -i32::from(l))).sum()
    }

    fn push_symbol(&self, s: usize, out: &mut Vec<u8>) {
        let len = self.lengths[s];
        for i in (0..len).rev() {
            out.push(((self.codes[s] >> i) & 1) as u8);
        }
    }

    /// Encodes the UTF-8 bytes of `text` followed by the end marker.
    pub fn encode(&self, text: &str) -> Vec<u8> {
        let mut out = Vec::new();
        for b in text.bytes() {
            self.push_symbol(b as usize, &mut out);
        }
        self.push_symbol(EOT, &mut out);
        out
    }

    /// Best-effort decode: stops at the first end marker, and a truncated
    /// trailing codeword becomes U+FFFD. Never fails.
    pub fn decode(&self, bits: &[u8]) -> String {
        let mut bytes = Vec::new();
        let mut node = 0usize;
        let mut saw_eot = false;
        for &b in bits {
            let next = self.tree[node][(b & 1) as usize];
            if next & LEAF_FLAG != 0 {
                let s = (next & !LEAF_FLAG) as usize;
                node = 0;
                if s == EOT {
                    saw_eot = true;
                    break;
                }
                bytes.push(s as u8);
            } else {
                node = next as usize;
            }
        }
        let mut text = String::from_utf8_lossy(&bytes).into_owned();
        if !saw_eot && node != 0 {
            text.push('\u{FFFD}');
        }
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequent_bytes_get_shorter_codes() {
        let cb = HuffmanCodebook::build("aaab").unwrap();
        assert!(cb.code_length(b'a' as usize) <= cb.code_length(b'b' as usize));
        assert!((cb.kraft_sum() - 1.0).abs() < 1e-12);
        assert!(HuffmanCodebook::build("").is_err());
    }

    #[test]
    fn roundtrip_and_empty() {
        let cb = HuffmanCodebook::build("Please pick up the cup at (5.0,1.0).").unwrap();
        for t in ["", "cup", "Ünïcødé ✓ text", "\u{0}\u{7f}"] {
            assert_eq!(cb.decode(&cb.encode(t)), t);
        }
        assert_eq!(cb.encode("").len(), usize::from(cb.code_length(EOT)));
    }

    #[test]
    fn single_bit_flips_change_output_and_terminate() {
        let cb = HuffmanCodebook::build("the cup is on the table").unwrap();
        let text = "the cup";
        let bits = cb.encode(text);
        for i in 0..bits.len() {
            let mut c = bits.clone();
            c[i] ^= 1;
            assert_ne!(cb.decode(&c), text, "flip at {i}");
        }
    }

    #[test]
    fn lengths_roundtrip() {
        let cb = HuffmanCodebook::build("hello world").unwrap();
        let again = HuffmanCodebook::from_lengths(cb.lengths()).unwrap();
        assert_eq!(cb, again);
        let mut bad = cb.lengths().to_vec();
        bad[0] = 1;
        assert!(HuffmanCodebook::from_lengths(&bad).is_err());
    }
}
