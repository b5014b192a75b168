//! Frequency-selective OFDM link abstraction.
//!
//! The link is modelled by the per-subcarrier SNRs of one fading draw. The
//! draws come from a seeded exponential-decay tapped delay line whose tap
//! vector is normalized to unit energy, so every realization has exactly the
//! requested mean SNR (for `K >= taps`) and differs only in how that power is
//! spread over frequency.
//!
//! All SNRs are linear inside this module; dB only appears in constructor
//! arguments and in the `*_db` helpers.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{rng_for, SimRng};

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * libm::log10(linear)
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// Modulation and coding scheme of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsProfile {
    pub modulation_order: u32,
    pub code_rate_num: u32,
    pub code_rate_den: u32,
    /// Shape parameter of the exponential effective-SNR mapping.
    pub beta: f64,
}

impl McsProfile {
    pub fn new(modulation_order: u32, code_rate_num: u32, code_rate_den: u32, beta: f64) -> Result<Self> {
        if modulation_order < 2 || !modulation_order.is_power_of_two() {
            return invalid("modulation order must be a power of two >= 2");
        }
        if code_rate_den == 0 || code_rate_num == 0 || code_rate_num > code_rate_den {
            return invalid("code rate must lie in (0, 1]");
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return invalid("beta must be positive");
        }
        Ok(Self { modulation_order, code_rate_num, code_rate_den, beta })
    }

    /// Gray-coded 4-QAM at rate 1/2 with `beta = 1`.
    pub fn qam4_half_rate() -> Self {
        Self { modulation_order: 4, code_rate_num: 1, code_rate_den: 2, beta: 1.0 }
    }

    pub fn code_rate(&self) -> f64 {
        f64::from(self.code_rate_num) / f64::from(self.code_rate_den)
    }

    /// Uncoded bit error probability at per-symbol SNR `snr` (linear).
    ///
    /// BPSK uses `Q(sqrt(2 snr))`; square M-QAM with Gray mapping uses the
    /// nearest-neighbour approximation, which is exact for 4-QAM:
    /// `Q(sqrt(snr))`.
    pub fn bit_error_rate(&self, snr: f64) -> f64 {
        if snr.is_infinite() && snr > 0.0 {
            return 0.0;
        }
        let m = f64::from(self.modulation_order);
        let p = if self.modulation_order == 2 {
            q_function(libm::sqrt(2.0 * snr))
        } else {
            let bits = libm::log2(m);
            (4.0 / bits) * (1.0 - 1.0 / libm::sqrt(m)) * q_function(libm::sqrt(3.0 * snr / (m - 1.0)))
        };
        p.clamp(0.0, 0.5)
    }
}

impl Default for McsProfile {
    fn default() -> Self {
        Self::qam4_half_rate()
    }
}

/// Tapped-delay-line fading profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub taps: usize,
    /// Power ratio between consecutive taps.
    pub decay: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self { taps: 8, decay: 0.5 }
    }
}

/// Per-subcarrier SNRs of one fading draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub snr_linear: Vec<f64>,
    pub mean_snr_db: f64,
    pub seed: u64,
}

impl ChannelRealization {
    /// A flat channel where every subcarrier sees `snr_db`.
    pub fn flat(k: usize, snr_db: f64) -> Result<Self> {
        if k == 0 {
            return invalid("K must be at least 1");
        }
        Ok(Self { snr_linear: alloc::vec![db_to_linear(snr_db); k], mean_snr_db: snr_db, seed: 0 })
    }

    /// Builds a realization from explicit linear SNRs.
    pub fn from_linear(snr_linear: Vec<f64>) -> Result<Self> {
        if snr_linear.is_empty() {
            return invalid("K must be at least 1");
        }
        if snr_linear.iter().any(|s| !(*s > 0.0) || s.is_nan()) {
            return invalid("subcarrier SNRs must be positive");
        }
        let mean = snr_linear.iter().sum::<f64>() / snr_linear.len() as f64;
        Ok(Self { snr_linear, mean_snr_db: linear_to_db(mean), seed: 0 })
    }

    pub fn k(&self) -> usize {
        self.snr_linear.len()
    }

    pub fn all_indices(&self) -> Vec<usize> {
        (0..self.k()).collect()
    }

    /// Effective SNR over the whole band, in dB.
    pub fn esnr_db(&self, beta: f64) -> f64 {
        linear_to_db(effective_snr(&self.snr_linear, beta).expect("realization is nonempty"))
    }
}

fn standard_normal(rng: &mut SimRng) -> f64 {
    // Box-Muller; u1 is kept away from zero.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * PI * u2)
}

impl ChannelModel {
    pub fn sample(&self, seed: u64, k: usize, mean_snr_db: f64) -> Result<ChannelRealization> {
        if k == 0 {
            return invalid("K must be at least 1");
        }
        if self.taps == 0 || !(self.decay > 0.0) {
            return invalid("channel model needs at least one tap and a positive decay");
        }
        let mut rng = rng_for(seed, &[0x7a95]);
        let mut profile: Vec<f64> = (0..self.taps).map(|i| libm::pow(self.decay, i as f64)).collect();
        let total: f64 = profile.iter().sum();
        profile.iter_mut().for_each(|p| *p /= total);

        let mut taps: Vec<(f64, f64)> = profile
            .iter()
            .map(|p| {
                let s = libm::sqrt(p / 2.0);
                (standard_normal(&mut rng) * s, standard_normal(&mut rng) * s)
            })
            .collect();
        let energy: f64 = taps.iter().map(|(re, im)| re * re + im * im).sum();
        let norm = libm::sqrt(energy.max(1e-300));
        taps.iter_mut().for_each(|(re, im)| {
            *re /= norm;
            *im /= norm;
        });

        let gamma = db_to_linear(mean_snr_db);
        let snr_linear = (0..k)
            .map(|sc| {
                let (mut re, mut im) = (0.0, 0.0);
                for (i, (hr, hi)) in taps.iter().enumerate() {
                    let phase = -2.0 * PI * (i * sc) as f64 / k as f64;
                    let (s, c) = (libm::sin(phase), libm::cos(phase));
                    re += hr * c - hi * s;
                    im += hr * s + hi * c;
                }
                ((re * re + im * im) * gamma).max(f64::MIN_POSITIVE)
            })
            .collect();
        Ok(ChannelRealization { snr_linear, mean_snr_db, seed })
    }
}

/// Draws a realization from the default 8-tap, 0.5-decay profile.
pub fn sample_channel(seed: u64, k: usize, mean_snr_db: f64) -> Result<ChannelRealization> {
    ChannelModel::default().sample(seed, k, mean_snr_db)
}

/// Exponential effective SNR: `-beta * ln(mean_k exp(-snr_k / beta))`.
///
/// Evaluated relative to the smallest SNR so that the exponentials never
/// underflow for large SNRs. The result is clamped into `[min, max]`.
pub fn effective_snr(snr_linear: &[f64], beta: f64) -> Result<f64> {
    if snr_linear.is_empty() {
        return invalid("effective SNR of an empty subcarrier set");
    }
    if !(beta > 0.0) {
        return invalid("beta must be positive");
    }
    if snr_linear.iter().any(|s| !s.is_finite()) {
        return invalid("subcarrier SNRs must be finite");
    }
    let min = snr_linear.iter().copied().fold(f64::INFINITY, f64::min);
    let max = snr_linear.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean_exp = snr_linear.iter().map(|s| libm::exp(-(s - min) / beta)).sum::<f64>() / snr_linear.len() as f64;
    let esnr = min - beta * libm::log(mean_exp);
    Ok(esnr.clamp(min, max))
}

/// Three disjoint subcarrier groups ordered by decreasing channel quality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubchannelPlan {
    pub groups: [Vec<usize>; 3],
    /// Priority of each group (1 = best protected).
    pub priorities: [u8; 3],
}

impl SubchannelPlan {
    pub fn group(&self, group: usize) -> Result<&[usize]> {
        match group {
            1..=3 => Ok(&self.groups[group - 1]),
            _ => invalid("group index must be 1, 2 or 3"),
        }
    }
}

/// Splits `total` into parts proportional to `weights` by largest remainder.
/// Ties in the remainder go to the lower index.
pub(crate) fn largest_remainder(total: usize, weights: &[u64]) -> Vec<usize> {
    let sum: u128 = weights.iter().map(|&w| u128::from(w)).sum();
    let mut sizes: Vec<usize> = Vec::with_capacity(weights.len());
    let mut rems: Vec<(u128, usize)> = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let scaled = u128::from(w) * total as u128;
        sizes.push((scaled / sum) as usize);
        rems.push((scaled % sum, i));
    }
    let assigned: usize = sizes.iter().sum();
    rems.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in rems.iter().take(total - assigned) {
        sizes[i] += 1;
    }
    sizes
}

/// Assigns the best subcarriers to part 1, the next to part 2, the rest to
/// part 3, with group sizes proportional to the part bit lengths.
///
/// Every part with a nonzero length gets at least one subcarrier when `K`
/// allows it; the subcarrier is taken from the largest group.
pub fn partition_subchannels(realization: &ChannelRealization, part_bit_lengths: [u64; 3]) -> Result<SubchannelPlan> {
    if part_bit_lengths.iter().all(|&l| l == 0) {
        return invalid("all part lengths are zero");
    }
    let k = realization.k();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        realization.snr_linear[b]
            .partial_cmp(&realization.snr_linear[a])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut sizes = largest_remainder(k, &part_bit_lengths);
    let nonzero = part_bit_lengths.iter().filter(|&&l| l > 0).count();
    if k >= nonzero {
        for i in 0..3 {
            if part_bit_lengths[i] > 0 && sizes[i] == 0 {
                let donor = (0..3).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a))).unwrap();
                sizes[donor] -= 1;
                sizes[i] += 1;
            }
        }
    }
    let mut groups: [Vec<usize>; 3] = Default::default();
    let mut cursor = 0;
    for (g, &size) in sizes.iter().enumerate() {
        groups[g] = order[cursor..cursor + size].to_vec();
        cursor += size;
    }
    Ok(SubchannelPlan { groups, priorities: [1, 2, 3] })
}

/// Effective SNR (linear) over one group of a plan.
pub fn group_esnr(realization: &ChannelRealization, plan: &SubchannelPlan, group: usize, beta: f64) -> Result<f64> {
    let indices = plan.group(group)?;
    if indices.is_empty() {
        return invalid("subchannel group is empty");
    }
    let snrs: Vec<f64> = indices.iter().map(|&i| realization.snr_linear[i]).collect();
    effective_snr(&snrs, beta)
}

/// Passes hard bits through the link.
///
/// Bit `j` rides on subcarrier `indices[j % indices.len()]` and is flipped
/// independently with that subcarrier's uncoded bit error probability.
pub fn transmit_bits(
    bits: &[u8],
    realization: &ChannelRealization,
    indices: &[usize],
    mcs: &McsProfile,
    seed: u64,
) -> Result<Vec<u8>> {
    if indices.is_empty() {
        return invalid("no subcarriers to transmit on");
    }
    if let Some(&bad) = indices.iter().find(|&&i| i >= realization.k()) {
        return invalid(alloc::format!("subcarrier index {bad} out of range"));
    }
    let bers: Vec<f64> = indices.iter().map(|&i| mcs.bit_error_rate(realization.snr_linear[i])).collect();
    let mut rng = rng_for(seed, &[0xb175]);
    Ok(bits
        .iter()
        .enumerate()
        .map(|(j, &b)| {
            let p = bers[j % bers.len()];
            if rng.gen::<f64>() < p {
                b ^ 1
            } else {
                b
            }
        })
        .collect())
}

/// Per-bit crossover probabilities matching [`transmit_bits`]' assignment.
pub fn bit_error_profile(
    len: usize,
    realization: &ChannelRealization,
    indices: &[usize],
    mcs: &McsProfile,
) -> Vec<f64> {
    let bers: Vec<f64> = indices.iter().map(|&i| mcs.bit_error_rate(realization.snr_linear[i])).collect();
    (0..len).map(|j| bers[j % bers.len()]).collect()
}
