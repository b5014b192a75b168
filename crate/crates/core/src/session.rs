//! Multi-round BS-robot protocol driver.
//!
//! Each round the base station plans a query, the query crosses the
//! downlink with the session's method, the robot answers and the answer
//! crosses the uplink. Every transmission draws its own channel
//! realization from the configured seeds.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::agents::mock::{decorate_query, respond};
use crate::agents::parse::{kb_from_text, kb_to_text};
use crate::agents::{
    AgentBackend, AgentKnowledge, BsDecision, BsKnowledge, KbEntry, Phase, PlanStep, RoundView, TaskRequest,
};
use crate::classic::{ClassicCodec, HuffmanCodebook, LdpcCode};
use crate::error::{Error, Result};
use crate::importance::{partition, reassemble, transmit_partitioned, Side};
use crate::lexicon::{ANOMALY_CLASSES, HOUSEHOLD_ITEMS, SENSOR_KINDS};
use crate::metrics::{distinct_1, success_rate, RunResult};
use crate::phy::{ChannelModel, ChannelRealization, McsProfile};
use crate::rng::{derive_seed, label};
use crate::scenario::{
    Environment, GoalChecklist, Scenario, ScenarioKind, ROOM_DEPTH, ROOM_WIDTH, WAREHOUSE_DEPTH, WAREHOUSE_WIDTH,
};
use crate::semantic::{CalibrationTable, SemanticCodec, SemanticCodecConfig, Vocabulary};
use crate::text::format_coordinate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    Direct,
    Lc,
    LcSc,
    LcScIm,
    LcScImKb,
    /// Semantic codec without compression; used by the ablation.
    Sc,
}

impl Method {
    pub const GRID: [Method; 5] = [Method::Direct, Method::Lc, Method::LcSc, Method::LcScIm, Method::LcScImKb];

    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "Direct",
            Method::Lc => "LC",
            Method::LcSc => "LC+SC",
            Method::LcScIm => "LC+SC(Im)",
            Method::LcScImKb => "LC+SC(Im+KB)",
            Method::Sc => "SC",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let t = s.trim();
        [Method::Direct, Method::Lc, Method::LcSc, Method::LcScIm, Method::LcScImKb, Method::Sc]
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(t))
    }

    pub fn compresses(self) -> bool {
        !matches!(self, Method::Direct | Method::Sc)
    }

    pub fn importance(self) -> bool {
        matches!(self, Method::LcScIm | Method::LcScImKb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub channel: u64,
    pub noise: u64,
    pub scenario: u64,
}

impl Seeds {
    /// Run seed `s`: scenario `s`, channel and noise streams derived from it.
    pub fn from_run(s: u64) -> Self {
        Self { channel: derive_seed(s, &[label("channel")]), noise: derive_seed(s, &[label("noise")]), scenario: s }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub method: Method,
    pub scenario: ScenarioKind,
    pub mean_snr_db: f64,
    pub max_rounds: usize,
    pub seeds: Seeds,
    /// Character ratio for the compressor; 1 disables compression.
    pub compression_target: f64,
    pub verbosity: f64,
    pub user_id: String,
    pub subcarriers: usize,
    pub channel: ChannelModel,
    pub mcs: McsProfile,
    pub codec: SemanticCodecConfig,
}

pub fn default_compression_target(kind: ScenarioKind) -> f64 {
    match kind {
        ScenarioKind::Case1 => 0.3,
        ScenarioKind::Case2 => 0.4,
    }
}

impl SessionConfig {
    pub fn new(method: Method, scenario: ScenarioKind, mean_snr_db: f64, seed: u64) -> Self {
        Self {
            method,
            scenario,
            mean_snr_db,
            max_rounds: 5,
            seeds: Seeds::from_run(seed),
            compression_target: default_compression_target(scenario),
            verbosity: 2.0,
            user_id: String::from("user-1"),
            subcarriers: 64,
            channel: ChannelModel::default(),
            mcs: McsProfile::default(),
            codec: SemanticCodecConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be at least 1".into()));
        }
        if !(self.compression_target > 0.0 && self.compression_target <= 1.0) {
            return Err(Error::Config(format!("compression_target {} outside (0, 1]", self.compression_target)));
        }
        if !(self.verbosity >= 1.0) {
            return Err(Error::Config(format!("verbosity {} below 1", self.verbosity)));
        }
        if self.subcarriers == 0 {
            return Err(Error::Config("subcarriers must be at least 1".into()));
        }
        if self.mean_snr_db.is_nan() {
            return Err(Error::Config("mean SNR is NaN".into()));
        }
        if self.user_id.is_empty() {
            return Err(Error::Config("user_id is empty".into()));
        }
        self.codec.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

// ---------------------------------------------------------------- resources

/// Codebooks shared by every session: Huffman code, LDPC code and the
/// semantic codec with its vocabulary and calibration.
#[derive(Debug, Clone)]
pub struct Resources {
    pub classic: ClassicCodec,
    pub semantic: SemanticCodec,
}

const CORPUS_SEEDS: u64 = 24;

fn codec_word(tok: &str) -> &str {
    tok.trim_end_matches(['.', '!', '?']).trim_end_matches([',', ';', ':'])
}

/// Sample traffic: clean dialogues of both scenarios, their compressed and
/// marked forms, and a knowledge-update message.
pub fn build_corpus() -> String {
    let agents = crate::agents::MockAgents;
    let mut out: Vec<String> = Vec::new();
    let mut kn = AgentKnowledge::default();
    let extra: Vec<KbEntry> = ANOMALY_CLASSES
        .iter()
        .map(|c| KbEntry { class: c.name.to_string(), example: format!("R1 {}", c.name) })
        .collect();
    out.push(kb_to_text(&extra));
    kn.inject(&extra);
    for kind in [ScenarioKind::Case1, ScenarioKind::Case2] {
        for seed in 0..CORPUS_SEEDS {
            let s = Scenario::generate(kind, seed);
            let bs = BsKnowledge::for_scenario(&s);
            let mut env = s.env.clone();
            let mut history: Vec<RoundView> = Vec::new();
            out.push(s.user_request.clone());
            while let BsDecision::Query { text, step } = crate::agents::mock::plan(&history, &bs) {
                let q = decorate_query(&text, &step, &bs, 2.0);
                let a = respond(&text, &mut env, 2.0);
                for t in [&q, &a] {
                    out.push(t.clone());
                    for target in [0.6, 0.3] {
                        out.push(crate::agents::compress::compress(t, &kn, target));
                        if let Ok(pm) = partition(t, &agents, &kn, target, Side::Uplink) {
                            out.extend([pm.part1, pm.part2, pm.part3]);
                        }
                    }
                }
                history.push(RoundView { step, query: text, response: a, unresolved: 0 });
                if history.len() > 8 {
                    break;
                }
            }
        }
    }
    out.join("\n")
}

/// Words the codec must know beyond the sample traffic: every value,
/// coordinate and name the generators can emit.
fn enumerated_words() -> BTreeSet<String> {
    let mut w = BTreeSet::new();
    let mut grid = |width: f64, depth: f64, step: f64| {
        for i in 0..=(width / step) as u32 {
            for j in 0..=(depth / step) as u32 {
                w.insert(format_coordinate(f64::from(i) * step, f64::from(j) * step));
            }
        }
    };
    grid(WAREHOUSE_WIDTH, WAREHOUSE_DEPTH, 0.5);
    grid(ROOM_WIDTH, ROOM_DEPTH, 1.0);
    for v in 36..=70u32 {
        w.insert(format!("{:.1}", f64::from(v) * 0.5));
    }
    for v in 12..=90u32 {
        w.insert(format!("{}", v * 10));
    }
    for v in 5..=95u32 {
        w.insert(format!("{:.1}", f64::from(v) * 0.1));
    }
    for v in 35..=85u32 {
        w.insert(format!("{v}"));
    }
    for (prefix, kind, unit) in SENSOR_KINDS {
        w.insert(kind.to_string());
        w.insert(unit.to_string());
        for i in 1..=22 {
            w.insert(format!("{prefix}{i:02}"));
        }
    }
    for c in ANOMALY_CLASSES {
        w.extend(c.phrase.split_whitespace().map(|s| s.to_string()));
        w.insert(c.action.to_string());
    }
    w.extend(HOUSEHOLD_ITEMS.iter().map(|s| s.to_string()));
    w
}

impl Resources {
    pub fn build(table: CalibrationTable, codec: SemanticCodecConfig) -> Result<Self> {
        let corpus = build_corpus();
        let mut words: BTreeSet<String> = enumerated_words();
        for tok in corpus.split_whitespace() {
            let w = codec_word(tok);
            if !w.is_empty() {
                words.insert(w.to_string());
            }
        }
        let vocab = Vocabulary::new(words);
        let codebook = HuffmanCodebook::build(&corpus)?;
        Ok(Self {
            classic: ClassicCodec::new(codebook, LdpcCode::standard()),
            semantic: SemanticCodec::new(codec, vocab, table)?,
        })
    }

    pub fn anchored() -> Result<Self> {
        Self::build(CalibrationTable::anchored(), SemanticCodecConfig::default())
    }
}

// ---------------------------------------------------------------- knowledge store

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredEntry {
    #[serde(flatten)]
    pub entry: KbEntry,
    /// Session that produced the entry.
    pub origin: String,
}

/// Task knowledge per user and task; append-only.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeStore {
    pub users: BTreeMap<String, BTreeMap<String, Vec<StoredEntry>>>,
}

impl KnowledgeStore {
    pub fn lookup(&self, user: &str, task: &str) -> Vec<KbEntry> {
        self.users
            .get(user)
            .and_then(|t| t.get(task))
            .map(|v| v.iter().map(|s| s.entry.clone()).collect())
            .unwrap_or_default()
    }

    /// True once `(user, task)` has been evaluated, even with no entries.
    pub fn contains_task(&self, user: &str, task: &str) -> bool {
        self.users.get(user).is_some_and(|t| t.contains_key(task))
    }

    /// Appends entries whose class is new for `(user, task)`; returns how
    /// many were added. The task is recorded even when nothing is new.
    pub fn append(&mut self, user: &str, task: &str, entries: &[KbEntry], origin: &str) -> usize {
        let list = self.users.entry(user.to_string()).or_default().entry(task.to_string()).or_default();
        let mut added = 0;
        for e in entries {
            if !list.iter().any(|s| s.entry.class == e.class) {
                list.push(StoredEntry { entry: e.clone(), origin: origin.to_string() });
                added += 1;
            }
        }
        added
    }

    pub fn len(&self) -> usize {
        self.users.values().flat_map(|t| t.values()).map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

// ---------------------------------------------------------------- transcript

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Downlink,
    Uplink,
}

/// Everything that went over the air in one transmission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub direction: Direction,
    /// `classic`, `semantic`, `importance` or `kb`.
    pub kind: String,
    pub sent: Vec<String>,
    pub received: Vec<String>,
    pub budgets: Vec<u32>,
    pub esnr_db: Vec<f64>,
    pub bits: Vec<u64>,
    pub failed_blocks: usize,
}

impl Frame {
    pub fn total_bits(&self) -> u64 {
        self.bits.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub step: PlanStep,
    pub q: String,
    pub q_sent: String,
    pub q_hat: String,
    pub a: String,
    pub a_sent: String,
    pub a_hat: String,
    pub downlink_bits: u64,
    pub uplink_bits: u64,
    pub unresolved_downlink: usize,
    pub unresolved_uplink: usize,
    pub frames: Vec<Frame>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    CompletedByBS,
    RoundCapHit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub task_id: String,
    pub config: SessionConfig,
    pub kb_entries: Vec<KbEntry>,
    pub kb_preload: Option<Frame>,
    pub rounds: Vec<RoundRecord>,
    pub outcome: Outcome,
}

impl SessionTranscript {
    /// Everything the base station received from the robot.
    pub fn bs_received(&self) -> Vec<String> {
        self.rounds.iter().map(|r| r.a_hat.clone()).collect()
    }

    pub fn final_report(&self) -> String {
        self.bs_received().join("\n")
    }

    pub fn kb_preload_bits(&self) -> u64 {
        self.kb_preload.as_ref().map_or(0, Frame::total_bits)
    }

    pub fn sent_texts(&self) -> Vec<String> {
        let mut v = Vec::new();
        for r in &self.rounds {
            v.push(r.q_sent.clone());
            v.push(r.a_sent.clone());
        }
        v
    }
}

/// `(downlink_bits, uplink_bits, rounds)`; the preload counts as downlink.
pub fn bandwidth_report(t: &SessionTranscript) -> (u64, u64, usize) {
    let down = t.rounds.iter().map(|r| r.downlink_bits).sum::<u64>() + t.kb_preload_bits();
    let up = t.rounds.iter().map(|r| r.uplink_bits).sum();
    (down, up, t.rounds.len())
}

pub fn run_result(t: &SessionTranscript, checklist: &GoalChecklist) -> RunResult {
    let (down, up, rounds) = bandwidth_report(t);
    let sr = success_rate(&t.final_report(), checklist);
    RunResult {
        scenario: t.config.scenario.name().to_string(),
        method: t.config.method.name().to_string(),
        snr_db: t.config.mean_snr_db,
        seed: t.config.seeds.scenario,
        sr,
        distinct1: distinct_1(&t.sent_texts()).unwrap_or(0.0),
        downlink_bits: down,
        uplink_bits: up,
        rounds,
        completed: t.outcome == Outcome::CompletedByBS,
        user_complete: sr >= 100.0,
        kb_preload_bits: t.kb_preload_bits(),
    }
}

// ---------------------------------------------------------------- engine

struct Link<'a> {
    cfg: &'a SessionConfig,
    res: &'a Resources,
    agents: &'a dyn AgentBackend,
}

struct Delivery {
    sent: String,
    received: String,
    unresolved: usize,
    frame: Frame,
}

impl Link<'_> {
    fn realization(&self, round: usize, dir: Direction) -> Result<ChannelRealization> {
        let seed = derive_seed(self.cfg.seeds.channel, &[round as u64, dir as u64]);
        self.cfg.channel.sample(seed, self.cfg.subcarriers, self.cfg.mean_snr_db)
    }

    fn noise(&self, round: usize, dir: Direction) -> u64 {
        derive_seed(self.cfg.seeds.noise, &[round as u64, dir as u64])
    }

    fn send(
        &self,
        text: &str,
        round: usize,
        dir: Direction,
        knowledge: &AgentKnowledge,
        history: &[String],
    ) -> Result<Delivery> {
        let cfg = self.cfg;
        let r = self.realization(round, dir)?;
        let seed = self.noise(round, dir);
        let target = cfg.compression_target;
        let squeeze = |t: &str| -> Result<String> {
            if !cfg.method.compresses() {
                return Ok(t.to_string());
            }
            match dir {
                Direction::Downlink => self.agents.compress_downlink(t, knowledge, history, target),
                Direction::Uplink => self.agents.compress_uplink(t, knowledge, target),
            }
        };
        let frame = |kind: &str, sent: Vec<String>, received: Vec<String>| Frame {
            direction: dir,
            kind: kind.to_string(),
            sent,
            received,
            budgets: Vec::new(),
            esnr_db: Vec::new(),
            bits: Vec::new(),
            failed_blocks: 0,
        };
        match cfg.method {
            Method::Direct | Method::Lc => {
                let sent = squeeze(text)?;
                let o = self.res.classic.send(&sent, &r, &cfg.mcs, seed)?;
                let mut f = frame("classic", alloc::vec![sent.clone()], alloc::vec![o.text.clone()]);
                f.bits.push(o.bits_on_air);
                f.esnr_db.push(r.esnr_db(cfg.mcs.beta));
                f.failed_blocks = o.failed_blocks;
                Ok(Delivery { sent, received: o.text, unresolved: 0, frame: f })
            }
            Method::LcSc | Method::Sc => {
                let sent = squeeze(text)?;
                let e = r.esnr_db(cfg.mcs.beta);
                let n = cfg.codec.n_bits;
                let o = self.res.semantic.send(&sent, n, e, seed)?;
                let mut f = frame("semantic", alloc::vec![sent.clone()], alloc::vec![o.text.clone()]);
                f.bits.push(o.bits_on_air);
                f.esnr_db.push(e);
                f.budgets.push(n);
                Ok(Delivery { sent, received: o.text, unresolved: 0, frame: f })
            }
            Method::LcScIm | Method::LcScImKb => {
                let side = match dir {
                    Direction::Downlink => Side::Downlink(history),
                    Direction::Uplink => Side::Uplink,
                };
                let pm = partition(text, self.agents, knowledge, target, side)?;
                let rx = transmit_partitioned(&pm, &r, &self.res.semantic, cfg.mcs.beta, seed)?;
                let (received, unresolved) = reassemble(&rx, self.agents)?;
                let mut f = frame("importance", rx.sent.to_vec(), rx.texts.to_vec());
                f.bits = rx.bits_on_air.to_vec();
                f.esnr_db = rx.esnr_db.to_vec();
                f.budgets = rx.budgets.to_vec();
                Ok(Delivery { sent: rx.sent.join(" "), received, unresolved, frame: f })
            }
        }
    }

    /// Task knowledge sent once at the stronger budget over the full band.
    /// Sends the knowledge text at `n'` over the downlink block of `round`
    /// (0 before the dialogue).
    fn preload(&self, entries: &[KbEntry], round: usize) -> Result<(String, Frame)> {
        let text = kb_to_text(entries);
        let r = self.realization(round, Direction::Downlink)?;
        let e = r.esnr_db(self.cfg.mcs.beta);
        let n = self.cfg.codec.n_prime_bits;
        let o = self.res.semantic.send(&text, n, e, derive_seed(self.cfg.seeds.noise, &[label("kb"), round as u64]))?;
        let f = Frame {
            direction: Direction::Downlink,
            kind: "kb".to_string(),
            sent: alloc::vec![text],
            received: alloc::vec![o.text.clone()],
            budgets: alloc::vec![n],
            esnr_db: alloc::vec![e],
            bits: alloc::vec![o.bits_on_air],
            failed_blocks: 0,
        };
        Ok((o.text, f))
    }
}

/// Runs one session on the scenario given by the config's scenario seed.
pub fn run_session(
    cfg: &SessionConfig,
    res: &Resources,
    agents: &dyn AgentBackend,
    store: &KnowledgeStore,
) -> Result<SessionTranscript> {
    cfg.validate()?;
    let scenario = Scenario::generate(cfg.scenario, cfg.seeds.scenario);
    let request = TaskRequest {
        user_text: scenario.user_request.clone(),
        user_id: cfg.user_id.clone(),
        task_id: scenario.task_id(),
    };
    let link = Link { cfg, res, agents };
    let mut world = scenario.env.clone();

    let mut bs_knowledge = AgentKnowledge::default();
    let mut robot_knowledge = AgentKnowledge::default();
    let mut bs = BsKnowledge::for_scenario(&scenario);
    let mut kb_entries = Vec::new();
    let mut kb_preload = None;
    if cfg.method == Method::LcScImKb {
        kb_entries = store.lookup(&cfg.user_id, &request.task_id);
        if store.contains_task(&cfg.user_id, &request.task_id) {
            bs = bs.with_task_knowledge(&kb_entries);
        }
        if !kb_entries.is_empty() {
            let (received, frame) = link.preload(&kb_entries, 0)?;
            robot_knowledge.inject(&kb_from_text(&received));
            bs_knowledge.inject(&kb_entries);
            kb_preload = Some(frame);
        }
    }

    let mut history: Vec<RoundView> = Vec::new();
    let mut sent_queries: Vec<String> = Vec::new();
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut outcome = Outcome::RoundCapHit;
    for round in 1..=cfg.max_rounds + 1 {
        let BsDecision::Query { text, step } = agents.bs_plan(&history, &bs, &request)? else {
            outcome = Outcome::CompletedByBS;
            break;
        };
        if round > cfg.max_rounds {
            break;
        }
        let q = decorate_query(&text, &step, &bs, cfg.verbosity);
        // An anomaly re-query may mean the robot lost the knowledge update.
        let mut resent = None;
        if !kb_entries.is_empty() && step.phase == Phase::Anomalies && step.attempt > 0 {
            let (received, frame) = link.preload(&kb_entries, round)?;
            robot_knowledge.inject(&kb_from_text(&received));
            resent = Some(frame);
        }
        let down = link.send(&q, round, Direction::Downlink, &bs_knowledge, &sent_queries)?;
        let a = agents.robot_respond(&down.received, &mut world, &robot_knowledge, cfg.verbosity)?;
        let up = link.send(&a, round, Direction::Uplink, &robot_knowledge, &[])?;
        sent_queries.push(down.sent.clone());
        history.push(RoundView {
            step: step.clone(),
            query: text,
            response: up.received.clone(),
            unresolved: up.unresolved,
        });
        rounds.push(RoundRecord {
            round,
            step,
            q,
            q_sent: down.sent,
            q_hat: down.received,
            a,
            a_sent: up.sent,
            a_hat: up.received,
            downlink_bits: down.frame.total_bits() + resent.as_ref().map_or(0, Frame::total_bits),
            uplink_bits: up.frame.total_bits(),
            unresolved_downlink: down.unresolved,
            unresolved_uplink: up.unresolved,
            frames: resent.into_iter().chain([down.frame, up.frame]).collect(),
        });
    }
    Ok(SessionTranscript { task_id: request.task_id, config: cfg.clone(), kb_entries, kb_preload, rounds, outcome })
}

/// Appends the task evaluation of `t` to the store; returns the entries
/// added.
pub fn kb_update(
    t: &SessionTranscript,
    feedback: Option<&GoalChecklist>,
    agents: &dyn AgentBackend,
    store: &mut KnowledgeStore,
) -> Result<Vec<KbEntry>> {
    let entries = agents.evaluate_task(&t.bs_received(), feedback)?;
    let origin = format!("{}@{}", t.config.method.name(), t.config.mean_snr_db);
    let before = store.lookup(&t.config.user_id, &t.task_id);
    store.append(&t.config.user_id, &t.task_id, &entries, &origin);
    Ok(store.lookup(&t.config.user_id, &t.task_id).into_iter().filter(|e| !before.contains(e)).collect())
}

/// Runs `cfg`. For Im+KB on a task never evaluated a warm-up Im session on
/// the same task is evaluated first (user feedback = checklist) and the
/// main session uses fresh channel and noise streams.
pub fn run_with_kb_cycle(
    cfg: &SessionConfig,
    res: &Resources,
    agents: &dyn AgentBackend,
    store: &mut KnowledgeStore,
) -> Result<SessionTranscript> {
    if cfg.method != Method::LcScImKb {
        return run_session(cfg, res, agents, store);
    }
    let scenario = Scenario::generate(cfg.scenario, cfg.seeds.scenario);
    let mut main = cfg.clone();
    if !store.contains_task(&cfg.user_id, &scenario.task_id()) {
        let mut warm = cfg.clone();
        warm.method = Method::LcScIm;
        let t = run_session(&warm, res, agents, store)?;
        kb_update(&t, Some(&scenario.checklist), agents, store)?;
        main.seeds.channel = derive_seed(cfg.seeds.channel, &[label("after-kb")]);
        main.seeds.noise = derive_seed(cfg.seeds.noise, &[label("after-kb")]);
    }
    let mut t = run_session(&main, res, agents, store)?;
    t.config.seeds = cfg.seeds;
    Ok(t)
}

/// Scenario environment for a config, exposed for exports and tests.
pub fn scenario_for(cfg: &SessionConfig) -> Scenario {
    Scenario::generate(cfg.scenario, cfg.seeds.scenario)
}

pub fn environment_for(cfg: &SessionConfig) -> Environment {
    scenario_for(cfg).env
}
