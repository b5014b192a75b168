//! Sentence codec modelled as a calibrated word-substitution channel.
//!
//! Text is cut into sentences, sentences into `L`-word chunks padded to full
//! length. Each chunk costs a fixed bit budget; each non-pad word is replaced
//! by a different random vocabulary word with the calibrated word error rate
//! at the link's effective SNR.

pub mod calibration;
pub mod vocab;

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use calibration::{CalibrationRow, CalibrationTable, Repair};
pub use vocab::{marker, marker_index, Vocabulary, EMPTY, MAX_MARKERS, OOV, PAD};

use crate::error::{invalid, Result};
use crate::rng::rng_for;
use crate::text::split_sentences;

pub const PAD_INDEX: u32 = 0;
pub const OOV_INDEX: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticCodecConfig {
    /// Words per chunk.
    pub l: usize,
    pub n_bits: u32,
    /// Budget for key-item parts.
    pub n_prime_bits: u32,
}

impl Default for SemanticCodecConfig {
    fn default() -> Self {
        Self { l: 30, n_bits: 1000, n_prime_bits: 2000 }
    }
}

impl SemanticCodecConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return invalid("L must be at least 1");
        }
        if self.n_bits == 0 || self.n_prime_bits <= self.n_bits {
            return invalid("need 0 < n_bits < n_prime_bits");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceChunk {
    pub tokens: Vec<u32>,
    pub pad_count: usize,
    /// Set on the last chunk of a sentence.
    pub ends_sentence: bool,
    /// Sentence terminator carried as side information.
    pub terminator: Option<char>,
}

/// Shared codec state: vocabulary, calibration and chunking parameters.
#[derive(Debug, Clone)]
pub struct SemanticCodec {
    pub config: SemanticCodecConfig,
    pub vocab: Vocabulary,
    pub table: CalibrationTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticOutcome {
    pub text: String,
    pub bits_on_air: u64,
    pub chunks: usize,
    pub wer: f64,
    pub substitutions: usize,
    pub words: usize,
}

fn clean_token(tok: &str) -> (&str, Option<char>) {
    let term = tok.chars().last().filter(|c| matches!(c, '.' | '!' | '?'));
    let body = tok.trim_end_matches(['.', '!', '?']).trim_end_matches([',', ';', ':']);
    (body, term)
}

impl SemanticCodec {
    pub fn new(config: SemanticCodecConfig, vocab: Vocabulary, table: CalibrationTable) -> Result<Self> {
        config.validate()?;
        Ok(Self { config, vocab, table })
    }

    pub fn segment(&self, text: &str) -> Vec<SentenceChunk> {
        let l = self.config.l;
        let mut out = Vec::new();
        for sentence in split_sentences(text) {
            let mut ids = Vec::new();
            let mut terminator = None;
            for tok in sentence.split_whitespace() {
                let (body, term) = clean_token(tok);
                terminator = term;
                if body.is_empty() {
                    continue;
                }
                ids.push(self.vocab.lookup(body).unwrap_or_else(|| {
                    log::debug!("out-of-vocabulary word {body:?}");
                    OOV_INDEX
                }));
            }
            if ids.is_empty() {
                continue;
            }
            let n_chunks = ids.len().div_ceil(l);
            for (c, part) in ids.chunks(l).enumerate() {
                let mut tokens = part.to_vec();
                let pad_count = l - tokens.len();
                tokens.resize(l, PAD_INDEX);
                let last = c + 1 == n_chunks;
                out.push(SentenceChunk {
                    tokens,
                    pad_count,
                    ends_sentence: last,
                    terminator: if last { terminator } else { None },
                });
            }
        }
        out
    }

    pub fn desegment(&self, chunks: &[SentenceChunk]) -> String {
        let mut out = String::new();
        let mut sentence: Vec<&str> = Vec::new();
        for ch in chunks {
            sentence.extend(ch.tokens.iter().filter(|&&t| t != PAD_INDEX).map(|&t| self.vocab.word(t)));
            if ch.ends_sentence {
                if !out.is_empty() {
                    out.push(' ');
                }
                out.push_str(&sentence.join(" "));
                if let Some(t) = ch.terminator {
                    out.push(t);
                }
                sentence.clear();
            }
        }
        if !sentence.is_empty() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(&sentence.join(" "));
        }
        out
    }

    /// Bits needed for `text` at `n_bits` per chunk; channel independent.
    pub fn bits_on_air(&self, text: &str, n_bits: u32) -> u64 {
        u64::from(n_bits) * self.segment(text).len() as u64
    }

    /// Sends `text` through the word channel at effective SNR `esnr_db`.
    /// An infinite ESNR is the noiseless limit and gives WER 0.
    pub fn send(&self, text: &str, n_bits: u32, esnr_db: f64, seed: u64) -> Result<SemanticOutcome> {
        let wer = self.table.wer(n_bits, esnr_db)?;
        let wer = if esnr_db == f64::INFINITY { 0.0 } else { wer };
        let mut chunks = self.segment(text);
        // Separate streams: for one seed the error pattern at a lower WER
        // is a subset of the pattern at a higher one.
        let mut hits = rng_for(seed, &[0x5e3a]);
        let mut subs = rng_for(seed, &[0x5e3b]);
        let vocab_len = self.vocab.len() as u32;
        let (mut words, mut substitutions) = (0, 0);
        for ch in &mut chunks {
            for t in ch.tokens.iter_mut().filter(|t| **t != PAD_INDEX) {
                words += 1;
                let u = hits.gen::<f64>();
                let x = subs.gen::<f64>();
                if u < wer && vocab_len > 3 {
                    // Uniform over [2, len) minus the original word.
                    let pick = |m: u32| 2 + ((x * f64::from(m)) as u32).min(m - 1);
                    *t = if *t < 2 {
                        pick(vocab_len - 2)
                    } else {
                        let r = pick(vocab_len - 3);
                        if r >= *t {
                            r + 1
                        } else {
                            r
                        }
                    };
                    substitutions += 1;
                }
            }
        }
        Ok(SemanticOutcome {
            text: self.desegment(&chunks),
            bits_on_air: u64::from(n_bits) * chunks.len() as u64,
            chunks: chunks.len(),
            wer,
            substitutions,
            words,
        })
    }
}

/// `(received_text, bits_on_air)` form of [`SemanticCodec::send`].
pub fn send_semantic(codec: &SemanticCodec, text: &str, n_bits: u32, esnr_db: f64, seed: u64) -> Result<(String, u64)> {
    let o = codec.send(text, n_bits, esnr_db, seed)?;
    Ok((o.text, o.bits_on_air))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::collapse_whitespace;

    fn codec() -> SemanticCodec {
        let words = "Robot at (2,3) Moving the cup is a b c d e f g h i j".split(' ');
        SemanticCodec::new(SemanticCodecConfig::default(), Vocabulary::new(words), CalibrationTable::anchored())
            .unwrap()
    }

    fn words(n: usize) -> String {
        let pool = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];
        (0..n).map(|i| pool[i % pool.len()]).collect::<Vec<_>>().join(" ") + "."
    }

    #[test]
    fn chunking() {
        let c = codec();
        let one = c.segment(&words(30));
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].pad_count, 0);
        let two = c.segment(&words(31));
        assert_eq!(two.len(), 2);
        assert_eq!(two[1].pad_count, 29);
        assert_eq!(c.segment("Robot at (2,3). Moving.").len(), 2);
        assert!(c.segment("").is_empty());
    }

    #[test]
    fn desegment_inverts_segment() {
        let c = codec();
        for t in ["Robot at (2,3). Moving.", &words(31), &words(30)] {
            assert_eq!(c.desegment(&c.segment(t)), collapse_whitespace(t));
        }
        assert_eq!(c.desegment(&c.segment("the cup, is a: b; c")), "the cup is a b c");
    }

    #[test]
    fn oov_maps_to_reserved_token() {
        let c = codec();
        let ch = c.segment("zebra cup.");
        assert_eq!(ch[0].tokens[0], OOV_INDEX);
    }

    #[test]
    fn clean_channel_and_accounting() {
        let c = codec();
        let t = "Robot at (2,3). Moving the cup.";
        let o = c.send(t, 1000, f64::INFINITY, 1).unwrap();
        assert_eq!(o.text, t);
        assert_eq!(o.bits_on_air, 2000);
        assert_eq!(o.bits_on_air, c.bits_on_air(t, 1000));
        let two_sentences = words(40) + " " + &words(20);
        assert_eq!(c.bits_on_air(&two_sentences, 1000), 3000);
        assert!(c.send(t, 1234, 5.0, 1).is_err());
    }

    #[test]
    fn substitutes_differ_and_skip_reserved() {
        let c = codec();
        let t = words(3000);
        let src = c.segment(&t);
        let o = c.send(&t, 1000, 0.0, 9).unwrap();
        assert!(o.substitutions > 0);
        assert_eq!(o.words, 3000);
        assert!(!o.text.contains(PAD) && !o.text.contains(OOV));
        assert_eq!(o.text.split_whitespace().count(), c.desegment(&src).split_whitespace().count());
    }
}
