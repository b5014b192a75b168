//! Importance-aware framing: key items, marked sentences and the remainder
//! travel as three parts over subchannel groups of decreasing quality.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::agents::extract::serialize_items;
use crate::agents::{AgentBackend, AgentKnowledge, KeyItemSet};
use crate::error::Result;
use crate::phy::{group_esnr, linear_to_db, partition_subchannels, ChannelRealization};
use crate::rng::derive_seed;
use crate::semantic::{marker_index, SemanticCodec, EMPTY};
use crate::text::{split_sentences, strip_trailing_punct};

/// Which compressor runs on the parts.
#[derive(Debug, Clone, Copy)]
pub enum Side<'a> {
    /// Base station, with its dialogue history.
    Downlink(&'a [String]),
    Uplink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionedMessage {
    pub part1: String,
    pub part2: String,
    pub part3: String,
    /// Part label (2 or 3) per sentence, the first-use order of the parts,
    /// or empty when neither survives compression.
    pub order: Vec<u8>,
    pub items: KeyItemSet,
}

impl PartitionedMessage {
    pub fn parts(&self) -> [&str; 3] {
        [&self.part1, &self.part2, &self.part3]
    }
}

fn markers_in(text: &str) -> Vec<usize> {
    text.split_whitespace().filter_map(|t| marker_index(strip_trailing_punct(t))).collect()
}

pub fn partition(
    message: &str,
    agents: &dyn AgentBackend,
    knowledge: &AgentKnowledge,
    target: f64,
    side: Side<'_>,
) -> Result<PartitionedMessage> {
    let (items, marked) = agents.extract(message, knowledge)?;
    let sentences = split_sentences(&marked);
    let labels: Vec<u8> = sentences.iter().map(|s| if markers_in(s).is_empty() { 3 } else { 2 }).collect();
    let pick = |l: u8| {
        sentences.iter().zip(&labels).filter(|(_, &x)| x == l).map(|(s, _)| s.as_str()).collect::<Vec<_>>().join(" ")
    };
    let (raw2, raw3) = (pick(2), pick(3));
    let squeeze = |t: &str| -> Result<String> {
        if t.is_empty() {
            return Ok(String::new());
        }
        match side {
            Side::Downlink(h) => agents.compress_downlink(t, knowledge, h, target),
            Side::Uplink => agents.compress_uplink(t, knowledge, target),
        }
    };
    let (part2, part3) = (squeeze(&raw2)?, squeeze(&raw3)?);

    let kept = markers_in(&part2);
    let items = KeyItemSet {
        items: items.items.into_iter().filter(|i| marker_index(&i.marker).is_some_and(|j| kept.contains(&j))).collect(),
    };
    let part1 = serialize_items(&items);

    let n_in = |l: u8| labels.iter().filter(|&&x| x == l).count();
    let (out2, out3) = (split_sentences(&part2).len(), split_sentences(&part3).len());
    let order = if out2 == n_in(2) && out3 == n_in(3) {
        labels
    } else if out2 <= 1 && out3 <= 1 {
        let mut first: Vec<u8> = Vec::new();
        for l in labels {
            if !first.contains(&l) && ((l == 2 && out2 > 0) || (l == 3 && out3 > 0)) {
                first.push(l);
            }
        }
        first
    } else {
        Vec::new()
    };
    Ok(PartitionedMessage { part1, part2, part3, order, items })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceivedParts {
    pub texts: [String; 3],
    pub sent: [String; 3],
    pub esnr_db: [f64; 3],
    pub bits_on_air: [u64; 3],
    pub budgets: [u32; 3],
    pub wer: [f64; 3],
    pub order: Vec<u8>,
}

impl ReceivedParts {
    pub fn total_bits(&self) -> u64 {
        self.bits_on_air.iter().sum()
    }
}

/// Sends the three parts with budgets `(n', n, n)` over their groups. An
/// empty part is replaced by the `EMPTY` sentinel. A group of infinite-SNR
/// subcarriers is noiseless.
pub fn transmit_partitioned(
    pm: &PartitionedMessage,
    realization: &ChannelRealization,
    codec: &SemanticCodec,
    beta: f64,
    seed: u64,
) -> Result<ReceivedParts> {
    let budgets = [codec.config.n_prime_bits, codec.config.n_bits, codec.config.n_bits];
    let sent: [String; 3] = pm.parts().map(|p| if p.trim().is_empty() { EMPTY.to_string() } else { p.to_string() });
    let lengths: [u64; 3] = core::array::from_fn(|g| codec.bits_on_air(&sent[g], budgets[g]));
    let plan = partition_subchannels(realization, lengths)?;
    let mut texts: [String; 3] = Default::default();
    let mut esnr_db = [0.0; 3];
    let mut bits_on_air = [0u64; 3];
    let mut wer = [0.0; 3];
    for g in 0..3 {
        let e = if plan.groups[g].iter().all(|&i| realization.snr_linear[i] == f64::INFINITY) {
            f64::INFINITY
        } else if plan.groups[g].is_empty() {
            realization.esnr_db(beta)
        } else {
            linear_to_db(group_esnr(realization, &plan, g + 1, beta)?)
        };
        let o = codec.send(&sent[g], budgets[g], e, derive_seed(seed, &[g as u64 + 1]))?;
        texts[g] = o.text;
        esnr_db[g] = e;
        bits_on_air[g] = o.bits_on_air;
        wer[g] = o.wer;
    }
    Ok(ReceivedParts { texts, sent, esnr_db, bits_on_air, budgets, wer, order: pm.order.clone() })
}

/// Reconstruction of the received parts, with the count of unresolved
/// markers and orphan values.
pub fn reassemble(received: &ReceivedParts, agents: &dyn AgentBackend) -> Result<(String, usize)> {
    let [a, b, c] = &received.texts;
    let r = agents.reconstruct(a, b, c, &received.order)?;
    if r.unresolved > 0 {
        log::debug!("{} unresolved key items after reassembly", r.unresolved);
    }
    Ok((r.text, r.unresolved))
}
