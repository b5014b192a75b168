//! The classic baseline: Huffman source coding, rate-1/2 LDPC, hard bits
//! over the fading link, min-sum decoding and best-effort Huffman decoding.

pub mod huffman;
pub mod ldpc;

use alloc::string::String;
use alloc::vec::Vec;

pub use huffman::HuffmanCodebook;
pub use ldpc::{Decoded, LdpcCode};

use crate::error::Result;
use crate::phy::{bit_error_profile, transmit_bits, ChannelRealization, McsProfile};

/// Channel LLR of a hard bit from a binary symmetric channel with
/// crossover probability `p`. Positive favours 0.
pub fn bsc_llr(bit: u8, p: f64) -> f64 {
    let p = p.clamp(1e-15, 0.5);
    let mag = libm::log((1.0 - p) / p);
    if bit & 1 == 0 {
        mag
    } else {
        -mag
    }
}

/// Shared codebook and code for both link ends.
#[derive(Debug, Clone)]
pub struct ClassicCodec {
    pub codebook: HuffmanCodebook,
    pub code: LdpcCode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicOutcome {
    pub text: String,
    pub bits_on_air: u64,
    pub blocks: usize,
    pub failed_blocks: usize,
}

impl ClassicCodec {
    pub fn new(codebook: HuffmanCodebook, code: LdpcCode) -> Self {
        Self { codebook, code }
    }

    /// Codeword bits needed for `text`; independent of the channel.
    pub fn bits_on_air(&self, text: &str) -> u64 {
        let src = self.codebook.encode(text).len();
        (src.div_ceil(self.code.k()) * self.code.n()) as u64
    }

    /// Sends `text` over every subcarrier of `realization`.
    pub fn send(
        &self,
        text: &str,
        realization: &ChannelRealization,
        mcs: &McsProfile,
        seed: u64,
    ) -> Result<ClassicOutcome> {
        let indices = realization.all_indices();
        self.send_on(text, realization, &indices, mcs, seed)
    }

    pub fn send_on(
        &self,
        text: &str,
        realization: &ChannelRealization,
        indices: &[usize],
        mcs: &McsProfile,
        seed: u64,
    ) -> Result<ClassicOutcome> {
        let (k, n) = (self.code.k(), self.code.n());
        let mut src = self.codebook.encode(text);
        let blocks = src.len().div_ceil(k);
        src.resize(blocks * k, 0);
        let mut tx = Vec::with_capacity(blocks * n);
        for block in src.chunks(k) {
            tx.extend(self.code.encode(block)?);
        }
        let rx = transmit_bits(&tx, realization, indices, mcs, seed)?;
        let p = bit_error_profile(rx.len(), realization, indices, mcs);
        let mut decoded = Vec::with_capacity(blocks * k);
        let mut failed_blocks = 0;
        for (b, chunk) in rx.chunks(n).enumerate() {
            let llr: Vec<f64> = chunk.iter().zip(&p[b * n..(b + 1) * n]).map(|(&bit, &pe)| bsc_llr(bit, pe)).collect();
            let d = self.code.decode(&llr)?;
            if !d.converged {
                failed_blocks += 1;
            }
            decoded.extend(d.info);
        }
        Ok(ClassicOutcome {
            text: self.codebook.decode(&decoded),
            bits_on_air: (blocks * n) as u64,
            blocks,
            failed_blocks,
        })
    }
}

/// Convenience wrapper returning `(received_text, bits_on_air)`.
pub fn send_classic(
    codec: &ClassicCodec,
    text: &str,
    realization: &ChannelRealization,
    mcs: &McsProfile,
    seed: u64,
) -> Result<(String, u64)> {
    let out = codec.send(text, realization, mcs, seed)?;
    Ok((out.text, out.bits_on_air))
}
