//! Seed-deterministic simulator for semantic agent-to-agent communication
//! over frequency-selective OFDM links.
//!
//! The crate is `no_std` (with `alloc`) and contains every algorithmic
//! piece of the simulator: the PHY abstraction, the classic Huffman + LDPC
//! stack, the word-error semantic codec model, the deterministic mock agents,
//! importance-aware framing, the multi-round session engine and the metrics.
//! File formats, the CLI and the HTTP agent backend live in the `agentcomm`
//! companion crate.

#![no_std]
#![forbid(unsafe_code)]
// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod ablation;
pub mod agents;
pub mod classic;
pub mod error;
pub mod importance;
pub mod lexicon;
pub mod metrics;
pub mod phy;
pub mod rng;
pub mod scenario;
pub mod semantic;
pub mod session;
pub mod text;

pub use crate::error::{Error, Result};
