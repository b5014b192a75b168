//! Agent roles and their deterministic mock implementation.
//!
//! The base station plans queries, the robot answers from its environment,
//! and both ends share the compressor, the key-item extractor and the
//! reconstructor. [`AgentBackend`] is the seam between the session engine
//! and an implementation; [`mock::MockAgents`] is the rule-based one.

pub mod compress;
pub mod extract;
pub mod mock;
pub mod parse;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lexicon::{BASE_KEY_CLASSES, HOUSEHOLD_ITEMS};
use crate::scenario::{Environment, GoalChecklist, Scenario};

pub use mock::MockAgents;

/// One stored piece of task knowledge: a key-item class and an example.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KbEntry {
    pub class: String,
    pub example: String,
}

/// Knowledge carried by an agent's compressor and extractor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentKnowledge {
    pub compressor_prompt: String,
    /// Key-item classes (multi-word phrases allowed). Always contains the
    /// base classes.
    pub extractor_classes: Vec<String>,
    /// Object names the extractor treats as identifiers.
    pub identifiers: Vec<String>,
    pub task_knowledge: Vec<KbEntry>,
}

impl Default for AgentKnowledge {
    fn default() -> Self {
        Self {
            compressor_prompt: String::from(
                "Compress the message. Keep every number, identifier, coordinate and position marker.",
            ),
            extractor_classes: BASE_KEY_CLASSES.iter().map(|s| s.to_string()).collect(),
            identifiers: HOUSEHOLD_ITEMS.iter().map(|s| s.to_string()).collect(),
            task_knowledge: Vec::new(),
        }
    }
}

impl AgentKnowledge {
    /// Appends task knowledge; classes become extractor classes.
    pub fn inject(&mut self, entries: &[KbEntry]) {
        for e in entries {
            if !self.task_knowledge.contains(e) {
                self.task_knowledge.push(e.clone());
            }
            if !self.extractor_classes.iter().any(|c| c == &e.class) {
                self.extractor_classes.push(e.class.clone());
            }
        }
    }

    /// Lowercase words of every key class.
    pub fn class_words(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.extractor_classes {
            for w in c.split_whitespace() {
                let w = w.to_lowercase();
                if !out.contains(&w) {
                    out.push(w);
                }
            }
        }
        out
    }
}

/// What the base station knows about the site before talking to the robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BsKnowledge {
    /// Installed sensors `(id, kind)` and the stored task knowledge, `None`
    /// when the task was never evaluated.
    Case1 { sensors: Vec<(String, String)>, task_knowledge: Option<Vec<KbEntry>> },
    /// Requested moves: `(item, target)`.
    Case2 { moves: Vec<(String, (f64, f64))> },
}

impl BsKnowledge {
    pub fn for_scenario(s: &Scenario) -> Self {
        match &s.env {
            Environment::Case1(w) => BsKnowledge::Case1 {
                sensors: w.readings.iter().map(|r| (r.id.clone(), r.kind.clone())).collect(),
                task_knowledge: None,
            },
            Environment::Case2(h) => {
                BsKnowledge::Case2 { moves: h.items.iter().map(|i| (i.name.clone(), i.target)).collect() }
            }
        }
    }

    pub fn with_task_knowledge(mut self, entries: &[KbEntry]) -> Self {
        if let BsKnowledge::Case1 { task_knowledge, .. } = &mut self {
            task_knowledge.get_or_insert_with(Vec::new).extend_from_slice(entries);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskRequest {
    pub user_text: String,
    pub user_id: String,
    pub task_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Readings,
    Anomalies,
    Locate,
    Place,
    /// Steps of a backend without a scripted plan.
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStep {
    pub phase: Phase,
    /// 0 for a first query, 1 for the immediate re-query.
    pub attempt: u32,
    pub subjects: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BsDecision {
    Query { text: String, step: PlanStep },
    TaskComplete,
}

/// What the base station remembers of one finished round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundView {
    pub step: PlanStep,
    pub query: String,
    /// Response as received and reconstructed at the base station.
    pub response: String,
    /// Markers or key items the reconstructor could not place.
    pub unresolved: usize,
}

/// Key item with its marker and character offset in the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyItem {
    pub marker: String,
    pub text: String,
    pub position: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyItemSet {
    pub items: Vec<KeyItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub text: String,
    pub unresolved: usize,
}

/// The agent functions used by the session engine.
pub trait AgentBackend: Sync {
    fn bs_plan(&self, history: &[RoundView], bs: &BsKnowledge, request: &TaskRequest) -> Result<BsDecision>;

    /// Answers `query` and applies any actions to `env`, the session's
    /// live copy of the world.
    fn robot_respond(
        &self,
        query: &str,
        env: &mut Environment,
        knowledge: &AgentKnowledge,
        verbosity: f64,
    ) -> Result<String>;

    /// Base-station compressor; may use the dialogue history.
    fn compress_downlink(
        &self,
        text: &str,
        knowledge: &AgentKnowledge,
        history: &[String],
        target: f64,
    ) -> Result<String>;

    /// Robot compressor; the robot keeps no history.
    fn compress_uplink(&self, text: &str, knowledge: &AgentKnowledge, target: f64) -> Result<String>;

    fn extract(&self, text: &str, knowledge: &AgentKnowledge) -> Result<(KeyItemSet, String)>;

    fn reconstruct(&self, part1: &str, part2: &str, part3: &str, order: &[u8]) -> Result<Reconstruction>;

    fn evaluate_task(&self, received: &[String], feedback: Option<&GoalChecklist>) -> Result<Vec<KbEntry>>;
}
