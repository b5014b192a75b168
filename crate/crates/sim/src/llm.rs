//! Chat-completion HTTP backend.
//!
//! Planning, answering, compression and key-item extraction are delegated
//! to a model behind an OpenAI-style `/chat/completions` endpoint.
//! Reconstruction and task evaluation stay rule-based. Demo grade: replies
//! are not validated beyond their shape.

use std::path::Path;
use std::thread::sleep;
use std::time::Duration;

use agentcomm_core::agents::{
    AgentBackend, AgentKnowledge, BsDecision, BsKnowledge, KbEntry, KeyItem, KeyItemSet, MockAgents, Phase, PlanStep,
    Reconstruction, RoundView, TaskRequest,
};
use agentcomm_core::scenario::{Environment, GoalChecklist};
use agentcomm_core::semantic::marker;
use agentcomm_core::Result as CoreResult;
use serde_json::{json, Value};

use crate::config::LlmSection;
use crate::error::{Error, Result};
use crate::fsutil::read_to_string;

#[derive(Debug, Clone, PartialEq)]
pub struct Templates {
    pub compressor: String,
    pub extractor: String,
    pub robot: String,
    pub planner: String,
}

/// Drops the leading `#` note lines of a template file.
fn strip_note(t: &str) -> String {
    t.lines().skip_while(|l| l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

impl Templates {
    pub fn builtin() -> Self {
        Self {
            compressor: strip_note(include_str!("../prompts/compressor.txt")),
            extractor: strip_note(include_str!("../prompts/extractor.txt")),
            robot: strip_note(include_str!("../prompts/robot.txt")),
            planner: strip_note(include_str!("../prompts/planner.txt")),
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let f = |name: &str| read_to_string(&dir.join(format!("{name}.txt"))).map(|t| strip_note(&t));
        Ok(Self {
            compressor: f("compressor")?,
            extractor: f("extractor")?,
            robot: f("robot")?,
            planner: f("planner")?,
        })
    }
}

/// Replaces `{{key}}` placeholders; every placeholder must be bound.
pub fn render(template: &str, vars: &[(&str, &str)]) -> Result<String> {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("{{{{{k}}}}}"), v);
    }
    if let Some(at) = out.find("{{") {
        let name: String = out[at + 2..].chars().take_while(|&c| c != '}').collect();
        return Err(Error::Backend(format!("template placeholder '{name}' has no value")));
    }
    Ok(out)
}

pub struct ChatClient {
    agent: ureq::Agent,
    url: String,
    model: String,
    token: Option<String>,
    retries: u32,
    temperature: f64,
}

impl ChatClient {
    pub fn new(cfg: &LlmSection) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs_f64(cfg.timeout_s)).build();
        Self {
            agent,
            url: format!("{}/chat/completions", cfg.base_url.trim_end_matches('/')),
            model: cfg.model.clone(),
            token: std::env::var(&cfg.token_env).ok().filter(|t| !t.is_empty()),
            retries: cfg.retries,
            temperature: cfg.temperature,
        }
    }

    /// Sends one exchange; retries transport errors, 429 and 5xx.
    pub fn chat(&self, system: &str, user: &str) -> Result<String> {
        let body = json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        });
        let mut last = String::new();
        for attempt in 0..=self.retries {
            if attempt > 0 {
                sleep(Duration::from_millis(200 << attempt.min(6)));
            }
            let mut req = self.agent.post(&self.url).set("Content-Type", "application/json");
            if let Some(t) = &self.token {
                req = req.set("Authorization", &format!("Bearer {t}"));
            }
            match req.send_json(&body) {
                Ok(resp) => {
                    let v: Value = resp.into_json().map_err(|e| Error::Backend(format!("bad response body: {e}")))?;
                    return v["choices"][0]["message"]["content"]
                        .as_str()
                        .map(|s| s.trim().to_string())
                        .ok_or_else(|| Error::Backend("response has no choices[0].message.content".into()));
                }
                Err(ureq::Error::Status(code, resp)) if code != 429 && code < 500 => {
                    let text = resp.into_string().unwrap_or_default();
                    return Err(Error::Backend(format!("HTTP {code}: {}", text.trim())));
                }
                Err(e) => {
                    log::warn!("chat attempt {} failed: {e}", attempt + 1);
                    last = e.to_string();
                }
            }
        }
        Err(Error::Backend(format!("giving up after {} attempt(s): {last}", self.retries + 1)))
    }
}

/// Finds each listed item in `text` (in order, without overlaps) and
/// replaces it with its marker.
pub fn mark_items(text: &str, items: &[String]) -> (KeyItemSet, String) {
    let mut spans: Vec<(usize, usize)> = Vec::new();
    for item in items.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let mut from = 0;
        while let Some(i) = text[from..].find(item) {
            let (a, b) = (from + i, from + i + item.len());
            if spans.iter().all(|&(s, e)| b <= s || a >= e) {
                spans.push((a, b));
                break;
            }
            from = a + item.len();
        }
    }
    spans.sort_unstable();
    let mut set = KeyItemSet::default();
    let mut marked = String::new();
    let mut at = 0;
    for (j, &(a, b)) in spans.iter().enumerate() {
        marked.push_str(&text[at..a]);
        let m = marker(j + 1);
        marked.push_str(&m);
        set.items.push(KeyItem { marker: m, text: text[a..b].to_string(), position: text[..a].chars().count() });
        at = b;
    }
    marked.push_str(&text[at..]);
    (set, marked)
}

pub struct HttpAgents {
    client: ChatClient,
    templates: Templates,
    rules: MockAgents,
}

impl HttpAgents {
    pub fn new(cfg: &LlmSection, templates: Templates) -> Self {
        Self { client: ChatClient::new(cfg), templates, rules: MockAgents }
    }

    fn compress(&self, text: &str, knowledge: &AgentKnowledge, history: &str, target: f64) -> Result<String> {
        let pct = format!("{:.0}", target * 100.0);
        let prompt = render(
            &self.templates.compressor,
            &[
                ("knowledge", &knowledge.compressor_prompt),
                ("target_percent", &pct),
                ("history", history),
                ("message", text),
            ],
        )?;
        self.client.chat("You are a message compressor.", &prompt)
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap_or_default()
}

impl AgentBackend for HttpAgents {
    fn bs_plan(&self, history: &[RoundView], bs: &BsKnowledge, request: &TaskRequest) -> CoreResult<BsDecision> {
        let dialogue = if history.is_empty() {
            "(none)".to_string()
        } else {
            history.iter().map(|r| format!("BS: {}\nRobot: {}", r.query, r.response)).collect::<Vec<_>>().join("\n")
        };
        let prompt = render(
            &self.templates.planner,
            &[("request", &request.user_text), ("knowledge", &to_json(bs)), ("history", &dialogue)],
        )
        .map_err(core_err)?;
        let reply = self.client.chat("You are the base station agent.", &prompt).map_err(core_err)?;
        // A session has at least one round.
        if !history.is_empty() && reply.to_lowercase().contains("task complete") {
            return Ok(BsDecision::TaskComplete);
        }
        let step = PlanStep { phase: Phase::Free, attempt: history.len() as u32, subjects: Vec::new() };
        Ok(BsDecision::Query { text: reply, step })
    }

    fn robot_respond(
        &self,
        query: &str,
        env: &mut Environment,
        _knowledge: &AgentKnowledge,
        _verbosity: f64,
    ) -> CoreResult<String> {
        let prompt =
            render(&self.templates.robot, &[("environment", &to_json(env)), ("query", query)]).map_err(core_err)?;
        self.client.chat("You are the robot agent.", &prompt).map_err(core_err)
    }

    fn compress_downlink(
        &self,
        text: &str,
        knowledge: &AgentKnowledge,
        history: &[String],
        target: f64,
    ) -> CoreResult<String> {
        let h = if history.is_empty() { "(none)".to_string() } else { history.join("\n") };
        self.compress(text, knowledge, &h, target).map_err(core_err)
    }

    fn compress_uplink(&self, text: &str, knowledge: &AgentKnowledge, target: f64) -> CoreResult<String> {
        self.compress(text, knowledge, "(none)", target).map_err(core_err)
    }

    fn extract(&self, text: &str, knowledge: &AgentKnowledge) -> CoreResult<(KeyItemSet, String)> {
        let prompt = render(
            &self.templates.extractor,
            &[
                ("classes", &knowledge.extractor_classes.join(", ")),
                ("identifiers", &knowledge.identifiers.join(", ")),
                ("message", text),
            ],
        )
        .map_err(core_err)?;
        let reply = self.client.chat("You are a key-item extractor.", &prompt).map_err(core_err)?;
        let items: Vec<String> =
            reply.lines().map(|l| l.trim().trim_start_matches(['-', '*']).trim().to_string()).collect();
        Ok(mark_items(text, &items))
    }

    fn reconstruct(&self, part1: &str, part2: &str, part3: &str, order: &[u8]) -> CoreResult<Reconstruction> {
        self.rules.reconstruct(part1, part2, part3, order)
    }

    fn evaluate_task(&self, received: &[String], feedback: Option<&GoalChecklist>) -> CoreResult<Vec<KbEntry>> {
        self.rules.evaluate_task(received, feedback)
    }
}

fn core_err(e: Error) -> agentcomm_core::Error {
    agentcomm_core::Error::Backend(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_binds_every_placeholder() {
        assert_eq!(render("a {{x}} b {{x}}", &[("x", "1")]).unwrap(), "a 1 b 1");
        assert!(render("a {{x}} {{y}}", &[("x", "1")]).unwrap_err().to_string().contains("'y'"));
    }

    #[test]
    fn builtin_templates_render() {
        let t = Templates::builtin();
        assert!(!t.compressor.starts_with('#'));
        let vars = [("knowledge", "k"), ("target_percent", "40"), ("history", "h"), ("message", "m")];
        assert!(render(&t.compressor, &vars).is_ok());
        assert!(render(&t.robot, &[("environment", "{}"), ("query", "q")]).is_ok());
    }

    #[test]
    fn marks_items_in_order() {
        let text = "Sensor T03 reads 41.5 C at (2.0,3.5), T03 again.";
        let items = vec!["41.5 C".to_string(), "T03".into(), "T03".into(), "missing".into()];
        let (set, marked) = mark_items(text, &items);
        assert_eq!(marked, "Sensor [K1] reads [K2] at (2.0,3.5), [K3] again.");
        assert_eq!(set.items[1].text, "41.5 C");
        assert_eq!(set.items[1].position, 17);
    }
}
