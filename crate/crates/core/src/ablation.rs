//! Single-message ablation of the compressor and the sentence codec.
//!
//! The robot's clean reports for a scenario form one message. It is
//! compressed and/or coded, sent once over a fading realization and scored
//! against the scenario checklist. Bandwidth curves sweep the compression
//! target (LC), the bit budget per sentence (SC) or both (LC+SC); the SNR
//! curve fixes the budget and sweeps the mean SNR.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::agents::mock::{plan, respond};
use crate::agents::{AgentBackend, AgentKnowledge, BsDecision, BsKnowledge, RoundView};
use crate::error::{Error, Result};
use crate::metrics::{success_rate, Stat};
use crate::rng::{derive_seed, label};
use crate::scenario::{Scenario, ScenarioKind};
use crate::semantic::SemanticCodec;
use crate::session::{Method, Resources, Seeds, SessionConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AblationConfig {
    pub scenario: ScenarioKind,
    pub seeds: u64,
    pub first_seed: u64,
    /// Mean SNR of the bandwidth curves.
    pub bandwidth_snr_db: f64,
    /// Nominal bandwidth ratios of the bandwidth curves.
    pub ratios: Vec<f64>,
    /// Mean SNRs of the SNR curve.
    pub snrs_db: Vec<f64>,
    /// Bits per sentence that define ratio 1 for the sentence codec.
    pub reference_n_bits: u32,
    /// LC+SC compresses down to this ratio, then shrinks the codec budget.
    pub lc_floor: f64,
    /// Compression target of LC and LC+SC on the SNR curve.
    pub snr_compression_target: f64,
    pub verbosity: f64,
}

impl Default for AblationConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::Case1,
            seeds: 50,
            first_seed: 0,
            bandwidth_snr_db: 20.0,
            ratios: alloc::vec![1.0, 0.8, 0.6, 0.4, 0.2],
            snrs_db: alloc::vec![0.0, 2.5, 5.0, 7.5, 10.0],
            reference_n_bits: 1000,
            lc_floor: 0.6,
            snr_compression_target: 0.6,
            verbosity: 2.0,
        }
    }
}

impl AblationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.seeds == 0 {
            return bad("seeds must be positive");
        }
        if self.ratios.is_empty() || self.ratios.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return bad("ratios must lie in (0, 1]");
        }
        if self.snrs_db.iter().any(|s| !s.is_finite()) || !self.bandwidth_snr_db.is_finite() {
            return bad("SNRs must be finite");
        }
        if self.reference_n_bits == 0 {
            return bad("reference_n_bits must be positive");
        }
        if !(self.lc_floor > 0.0 && self.lc_floor <= 1.0) || !(self.snr_compression_target > 0.0) {
            return bad("compression targets must be positive");
        }
        if self.verbosity < 1.0 {
            return bad("verbosity must be at least 1");
        }
        Ok(())
    }

    /// Codec budgets the sweeps need.
    pub fn budgets(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.ratios.iter().map(|&r| self.sc_bits(r)).collect();
        v.extend(self.ratios.iter().map(|&r| self.lcsc_plan(r).1));
        v.push(self.reference_n_bits);
        v.sort_unstable();
        v.dedup();
        v
    }

    fn sc_bits(&self, ratio: f64) -> u32 {
        (libm::round(ratio * f64::from(self.reference_n_bits)) as u32).max(1)
    }

    /// (compression target, bits per sentence) for an LC+SC ratio.
    fn lcsc_plan(&self, ratio: f64) -> (f64, u32) {
        if ratio >= self.lc_floor {
            (ratio, self.reference_n_bits)
        } else {
            (self.lc_floor, self.sc_bits(ratio / self.lc_floor))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Curve {
    Bandwidth,
    Snr,
}

/// One message sent at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationPoint {
    pub curve: Curve,
    pub method: String,
    /// Nominal ratio on bandwidth curves, mean SNR on the SNR curve.
    pub x: f64,
    pub snr_db: f64,
    pub seed: u64,
    /// Bits sent over the reference bits of the method.
    pub bandwidth_ratio: f64,
    pub bits: u64,
    pub sr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub curve: Curve,
    pub method: String,
    pub x: f64,
    pub count: usize,
    pub bandwidth_ratio: Stat,
    pub sr: Stat,
}

/// Concatenated robot answers of a noiseless dialogue.
pub fn reference_message(scenario: &Scenario, verbosity: f64) -> String {
    let bs = BsKnowledge::for_scenario(scenario);
    let mut env = scenario.env.clone();
    let mut history: Vec<RoundView> = Vec::new();
    while let BsDecision::Query { text, step } = plan(&history, &bs) {
        let response = respond(&text, &mut env, verbosity);
        history.push(RoundView { step, query: text, response, unresolved: 0 });
    }
    history.iter().map(|r| r.response.as_str()).collect::<Vec<_>>().join(" ")
}

struct Job<'a> {
    cfg: &'a AblationConfig,
    res: &'a Resources,
    codec: &'a SemanticCodec,
    agents: &'a dyn AgentBackend,
}

impl Job<'_> {
    fn point(&self, curve: Curve, method: Method, x: f64, snr_db: f64, seed: u64) -> Result<AblationPoint> {
        let scenario = Scenario::generate(self.cfg.scenario, seed);
        let message = reference_message(&scenario, self.cfg.verbosity);
        let session = SessionConfig::new(method, self.cfg.scenario, snr_db, seed);
        let seeds = Seeds::from_run(derive_seed(seed, &[label("ablation")]));
        let r = session.channel.sample(seeds.channel, session.subcarriers, snr_db)?;
        let knowledge = AgentKnowledge::default();
        let squeeze = |target: f64| self.agents.compress_uplink(&message, &knowledge, target);

        let (target, n_bits) = match (curve, method) {
            (Curve::Bandwidth, Method::Lc) => (x, 0),
            (Curve::Bandwidth, Method::Sc) => (1.0, self.cfg.sc_bits(x)),
            (Curve::Bandwidth, Method::LcSc) => self.cfg.lcsc_plan(x),
            (Curve::Snr, Method::Lc) => (self.cfg.snr_compression_target, 0),
            (Curve::Snr, Method::Sc) => (1.0, self.cfg.reference_n_bits),
            (Curve::Snr, Method::LcSc) => (self.cfg.snr_compression_target, self.cfg.reference_n_bits),
            (_, m) => return Err(Error::Config(alloc::format!("{} is not part of the ablation", m.name()))),
        };
        let sent = squeeze(target)?;
        let (received, bits, ratio) = if method == Method::Lc {
            let o = self.res.classic.send(&sent, &r, &session.mcs, seeds.noise)?;
            let book = &self.res.classic.codebook;
            let ratio = book.encode(&sent).len() as f64 / book.encode(&message).len() as f64;
            (o.text, o.bits_on_air, ratio)
        } else {
            let o = self.codec.send(&sent, n_bits, r.esnr_db(session.mcs.beta), seeds.noise)?;
            let reference = self.codec.bits_on_air(&message, self.cfg.reference_n_bits);
            let ratio = o.bits_on_air as f64 / reference as f64;
            (o.text, o.bits_on_air, ratio)
        };
        Ok(AblationPoint {
            curve,
            method: method.name().to_string(),
            x,
            snr_db,
            seed,
            bandwidth_ratio: ratio,
            bits,
            sr: success_rate(&received, &scenario.checklist),
        })
    }
}

/// The sweep points, in output order.
pub fn plan_points(cfg: &AblationConfig) -> Vec<(Curve, Method, f64, f64)> {
    let mut v = Vec::new();
    for m in [Method::Lc, Method::Sc, Method::LcSc] {
        for &r in &cfg.ratios {
            v.push((Curve::Bandwidth, m, r, cfg.bandwidth_snr_db));
        }
    }
    for m in [Method::Lc, Method::Sc, Method::LcSc] {
        for &s in &cfg.snrs_db {
            v.push((Curve::Snr, m, s, s));
        }
    }
    v
}

/// Sentence codec of `res` with its table extended to the sweep budgets.
pub fn ablation_codec(cfg: &AblationConfig, res: &Resources) -> Result<SemanticCodec> {
    let mut budgets = res.semantic.table.bit_budgets();
    budgets.extend(cfg.budgets());
    budgets.sort_unstable();
    budgets.dedup();
    let table = res.semantic.table.extend_log_linear(&budgets)?;
    SemanticCodec::new(res.semantic.config.clone(), res.semantic.vocab.clone(), table)
}

/// Runs one sweep point over all seeds.
pub fn run_point(
    cfg: &AblationConfig,
    res: &Resources,
    codec: &SemanticCodec,
    agents: &dyn AgentBackend,
    point: (Curve, Method, f64, f64),
) -> Result<Vec<AblationPoint>> {
    let job = Job { cfg, res, codec, agents };
    let (curve, method, x, snr) = point;
    (cfg.first_seed..cfg.first_seed + cfg.seeds).map(|s| job.point(curve, method, x, snr, s)).collect()
}

/// All sweeps, sequentially.
pub fn run_ablation(cfg: &AblationConfig, res: &Resources, agents: &dyn AgentBackend) -> Result<Vec<AblationPoint>> {
    cfg.validate()?;
    let codec = ablation_codec(cfg, res)?;
    let mut out = Vec::new();
    for p in plan_points(cfg) {
        out.extend(run_point(cfg, res, &codec, agents, p)?);
    }
    Ok(out)
}

/// Mean and spread per (curve, method, x), in first-seen order.
pub fn summarize(points: &[AblationPoint]) -> Vec<AblationRow> {
    let mut order: Vec<(Curve, String, i64)> = Vec::new();
    let mut cells: BTreeMap<(Curve, String, i64), Vec<&AblationPoint>> = BTreeMap::new();
    for p in points {
        let key = (p.curve, p.method.clone(), libm::round(p.x * 1000.0) as i64);
        if !cells.contains_key(&key) {
            order.push(key.clone());
        }
        cells.entry(key).or_default().push(p);
    }
    order
        .into_iter()
        .map(|k| {
            let mut ps = cells.remove(&k).unwrap_or_default();
            ps.sort_by_key(|p| p.seed);
            let col = |f: fn(&AblationPoint) -> f64| Stat::of(&ps.iter().map(|p| f(p)).collect::<Vec<_>>());
            AblationRow {
                curve: k.0,
                method: k.1,
                x: ps[0].x,
                count: ps.len(),
                bandwidth_ratio: col(|p| p.bandwidth_ratio),
                sr: col(|p| p.sr),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{contains_sequence, normalize};

    #[test]
    fn reference_message_holds_every_fact() {
        for kind in [ScenarioKind::Case1, ScenarioKind::Case2] {
            let s = Scenario::generate(kind, 4);
            let m = normalize(&reference_message(&s, 2.0));
            for g in &s.checklist.goals {
                assert!(contains_sequence(&m, &normalize(&g.matcher)), "{}", g.matcher);
            }
        }
    }

    #[test]
    fn lcsc_switches_at_the_floor() {
        let c = AblationConfig::default();
        assert_eq!(c.lcsc_plan(0.8), (0.8, 1000));
        assert_eq!(c.lcsc_plan(0.3), (0.6, 500));
        assert_eq!(c.budgets(), [200, 333, 400, 600, 667, 800, 1000]);
    }

    #[test]
    fn rejects_bad_config() {
        let c = AblationConfig { ratios: alloc::vec![1.5], ..AblationConfig::default() };
        assert!(c.validate().is_err());
        let c = AblationConfig { seeds: 0, ..AblationConfig::default() };
        assert!(c.validate().is_err());
    }
}
