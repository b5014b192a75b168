//! Deterministic rule-based agents.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::compress::compress;
use super::extract;
use super::parse::{is_place, is_sensor_id, list_phrase, norm_coordinate, norm_number, sensor_ids};
use super::{
    AgentBackend, AgentKnowledge, BsDecision, BsKnowledge, KbEntry, KeyItemSet, Phase, PlanStep, Reconstruction,
    RoundView, TaskRequest,
};
use crate::error::Result;
use crate::lexicon::{
    ANOMALY_CLASSES, BASE_KEY_CLASSES, BS_FILLERS, BS_OPENINGS, CLARIFY_GENERIC, HOUSEHOLD_ITEMS, ROBOT_FILLERS_CASE1,
    ROBOT_FILLERS_CASE2,
};
use crate::scenario::{Environment, GoalChecklist, HouseholdState, WarehouseState, ROOM_DEPTH, ROOM_WIDTH};
use crate::text::{contains_sequence, format_coordinate, normalize, parse_coordinate, strip_trailing_punct};

/// Scripted base station and template robot.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockAgents;

impl AgentBackend for MockAgents {
    fn bs_plan(&self, history: &[RoundView], bs: &BsKnowledge, _request: &TaskRequest) -> Result<BsDecision> {
        Ok(plan(history, bs))
    }

    fn robot_respond(
        &self,
        query: &str,
        env: &mut Environment,
        _knowledge: &AgentKnowledge,
        verbosity: f64,
    ) -> Result<String> {
        Ok(respond(query, env, verbosity))
    }

    fn compress_downlink(
        &self,
        text: &str,
        knowledge: &AgentKnowledge,
        _history: &[String],
        target: f64,
    ) -> Result<String> {
        Ok(compress(text, knowledge, target))
    }

    fn compress_uplink(&self, text: &str, knowledge: &AgentKnowledge, target: f64) -> Result<String> {
        Ok(compress(text, knowledge, target))
    }

    fn extract(&self, text: &str, knowledge: &AgentKnowledge) -> Result<(KeyItemSet, String)> {
        Ok(extract::extract(text, knowledge))
    }

    fn reconstruct(&self, part1: &str, part2: &str, part3: &str, order: &[u8]) -> Result<Reconstruction> {
        Ok(extract::reconstruct(part1, part2, part3, order))
    }

    fn evaluate_task(&self, received: &[String], feedback: Option<&GoalChecklist>) -> Result<Vec<KbEntry>> {
        Ok(evaluate(received, feedback))
    }
}

// ---------------------------------------------------------------- robot

/// Interleaves `round((v-1) * facts)` fillers after the facts: filler `j`
/// follows fact `j % n`, even `j` restating the fact, odd `j` generic.
fn with_fillers(facts: &[(String, String)], verbosity: f64, generic: &[&str]) -> String {
    let n = facts.len();
    let count = if n == 0 { 0 } else { libm::round((verbosity - 1.0).max(0.0) * n as f64) as usize };
    let mut after: Vec<Vec<String>> = alloc::vec![Vec::new(); n];
    for j in 0..count {
        let s = if j % 2 == 0 { facts[j % n].1.clone() } else { generic[(j / 2) % generic.len()].to_string() };
        after[j % n].push(s);
    }
    let mut out: Vec<String> = Vec::new();
    for (i, (fact, _)) in facts.iter().enumerate() {
        out.push(fact.clone());
        out.append(&mut after[i]);
    }
    out.join(" ")
}

/// Robot answer to `query`; placements move items in `env`.
pub fn respond(query: &str, env: &mut Environment, verbosity: f64) -> String {
    match env {
        Environment::Case1(w) => respond_case1(query, w, verbosity),
        Environment::Case2(h) => respond_case2(query, h, verbosity),
    }
}

fn reading_fact(w: &WarehouseState, id: &str) -> (String, String) {
    match w.readings.iter().find(|r| r.id == id) {
        Some(r) => (
            format!("The {} sensor {}.", r.kind, r.fragment()),
            format!("To confirm, {}: {} {}.", r.id, r.value, r.unit),
        ),
        None => {
            let s = format!("There is no sensor {id} here, please confirm the sensor id.");
            (s.clone(), s)
        }
    }
}

fn respond_case1(query: &str, w: &WarehouseState, verbosity: f64) -> String {
    let words = normalize(query);
    let has = |opts: &[&str]| words.iter().any(|t| opts.contains(&t.as_str()));
    let ids = sensor_ids(query);
    let facts: Vec<(String, String)> = if !ids.is_empty() {
        ids.iter().map(|id| reading_fact(w, id)).collect()
    } else if has(&["anomalies", "anomaly"]) {
        if w.anomalies.is_empty() {
            let s = String::from("I found no anomalies on the racks and aisles.");
            alloc::vec![(s.clone(), s)]
        } else {
            w.anomalies
                .iter()
                .map(|a| {
                    let class = ANOMALY_CLASSES.iter().find(|c| c.name == a.class).expect("known anomaly class");
                    (
                        format!(
                            "At {} {} there is {}, {} is recommended.",
                            a.location_word(),
                            a.location,
                            class.phrase,
                            class.action
                        ),
                        format!("To confirm, {} {}.", a.location, a.class),
                    )
                })
                .collect()
        }
    } else if has(&["readings", "reading", "sensors", "snss", "sensor", "sns", "inspect", "insp"]) {
        w.readings.iter().map(|r| reading_fact(w, &r.id)).collect()
    } else {
        return String::from(CLARIFY_GENERIC);
    };
    with_fillers(&facts, verbosity, ROBOT_FILLERS_CASE1)
}

fn in_room(p: (f64, f64)) -> bool {
    (0.0..=ROOM_WIDTH).contains(&p.0) && (0.0..=ROOM_DEPTH).contains(&p.1)
}

/// Item mentions in order with the coordinates that follow each mention
/// up to the next item word.
fn item_mentions(query: &str) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut out: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for tok in query.split_whitespace() {
        let body = strip_trailing_punct(tok).to_lowercase();
        if HOUSEHOLD_ITEMS.contains(&body.as_str()) {
            out.push((body, Vec::new()));
        } else if let Some(c) = parse_coordinate(tok) {
            if let Some(last) = out.last_mut() {
                last.1.push(c);
            }
        }
    }
    out
}

fn respond_case2(query: &str, h: &mut HouseholdState, verbosity: f64) -> String {
    let mentions = item_mentions(query);
    if mentions.is_empty() {
        return String::from(CLARIFY_GENERIC);
    }
    let mut names: Vec<&str> = Vec::new();
    for (n, _) in &mentions {
        if !names.contains(&n.as_str()) {
            names.push(n);
        }
    }
    let mut moves: Vec<(String, (f64, f64))> = Vec::new();
    let facts: Vec<(String, String)> = names
        .iter()
        .map(|&name| {
            let Some(item) = h.items.iter().find(|i| i.name == name) else {
                let s = format!("There is no {name} in this room, please confirm the item.");
                return (s.clone(), s);
            };
            let (ox, oy) = item.origin;
            let groups: Vec<&Vec<(f64, f64)>> =
                mentions.iter().filter(|(n, _)| n == name).map(|(_, c)| c).filter(|c| !c.is_empty()).collect();
            if groups.is_empty() {
                return (
                    format!("I found the {name} at {}.", format_coordinate(ox, oy)),
                    format!("To confirm, the {name} is at {}.", format_coordinate(ox, oy)),
                );
            }
            let Some(coords) = groups.iter().find(|c| c.len() >= 2) else {
                let s = format!("The target of the {name} is unclear, please confirm it.");
                return (s.clone(), s);
            };
            let (origin, target) = (coords[0], coords[1]);
            if !in_room(target) {
                let s = format!("The target of the {name} is unclear, please confirm it.");
                (s.clone(), s)
            } else if origin != item.origin {
                let s = format!(
                    "The {name} is at {}, not at {}.",
                    format_coordinate(ox, oy),
                    format_coordinate(origin.0, origin.1)
                );
                (s.clone(), s)
            } else {
                moves.push((name.to_string(), target));
                (
                    format!("I placed the {name} at {} as instructed.", format_coordinate(target.0, target.1)),
                    format!("To confirm, the {name} is now at {}.", format_coordinate(target.0, target.1)),
                )
            }
        })
        .collect();
    for (name, to) in moves {
        if let Some(item) = h.items.iter_mut().find(|i| i.name == name) {
            item.origin = to;
        }
    }
    with_fillers(&facts, verbosity, ROBOT_FILLERS_CASE2)
}

// ---------------------------------------------------------------- base station

fn plausible(id: &str, value: f64, unit: &str) -> bool {
    let on_grid = |step: f64| {
        let k = value / step;
        libm::fabs(k - libm::round(k)) < 1e-6
    };
    match (id.as_bytes()[0].to_ascii_uppercase(), unit) {
        (b'T', "c") => (18.0..=35.0).contains(&value) && on_grid(0.5),
        (b'C', "lux") => (120.0..=900.0).contains(&value) && on_grid(10.0),
        (b'L', "m") => (0.5..=9.5).contains(&value) && on_grid(0.1),
        (b'S', "db") => (35.0..=85.0).contains(&value) && on_grid(1.0),
        _ => false,
    }
}

/// Sensor ids with a plausible `[id, value, unit]` triple in `text`.
fn readings_seen(text: &str) -> Vec<String> {
    let t = normalize(text);
    let mut out = Vec::new();
    for w in t.windows(3) {
        if is_sensor_id(&w[0]) {
            if let Some(v) = norm_number(&w[1]) {
                if plausible(&w[0], v, &w[2]) {
                    out.push(w[0].to_uppercase());
                }
            }
        }
    }
    out
}

fn anomalies_ok(text: &str, unresolved: usize, known_classes: &[String]) -> bool {
    if unresolved > 0 {
        return false;
    }
    let t = normalize(text);
    if contains_sequence(&t, &[String::from("no"), String::from("anomalies")]) {
        return true;
    }
    let places: Vec<usize> = (0..t.len()).filter(|&i| is_place(&t[i])).collect();
    if places.is_empty() {
        return false;
    }
    if known_classes.is_empty() {
        return true;
    }
    // With task knowledge every reported place must carry a known class.
    places.iter().all(|&i| {
        let window = &t[i + 1..t.len().min(i + 6)];
        known_classes.iter().any(|c| {
            let words: Vec<String> = c.split_whitespace().map(|w| w.to_lowercase()).collect();
            contains_sequence(window, &words)
        })
    })
}

struct Case2View {
    origin: Vec<Option<(f64, f64)>>,
    placed: Vec<bool>,
}

/// Item positions as reported so far. An item followed by its target is
/// placed, by another coordinate located there, by `not` unlocated again.
fn case2_view(history: &[RoundView], moves: &[(String, (f64, f64))]) -> Case2View {
    let mut v = Case2View { origin: alloc::vec![None; moves.len()], placed: alloc::vec![false; moves.len()] };
    for r in history {
        let t = normalize(&r.response);
        for (k, (name, target)) in moves.iter().enumerate() {
            for i in 0..t.len().saturating_sub(1) {
                if t[i] != *name {
                    continue;
                }
                let next = &t[i + 1];
                if next == "not" {
                    v.origin[k] = None;
                } else if let Some(c) = norm_coordinate(next) {
                    if c == *target {
                        v.placed[k] = true;
                    } else {
                        v.origin[k] = Some(c);
                    }
                }
            }
        }
    }
    v
}

/// Subjects still missing for `phase`, and whether a query can be issued.
fn pending(phase: Phase, history: &[RoundView], bs: &BsKnowledge) -> (Vec<String>, bool) {
    match (bs, phase) {
        (BsKnowledge::Case1 { sensors, .. }, Phase::Readings) => {
            let mut seen: Vec<String> = Vec::new();
            for r in history.iter().filter(|r| r.step.phase == Phase::Readings) {
                seen.extend(readings_seen(&r.response));
            }
            let p: Vec<String> = sensors.iter().map(|(id, _)| id.clone()).filter(|id| !seen.contains(id)).collect();
            let ok = !p.is_empty();
            (p, ok)
        }
        (BsKnowledge::Case1 { task_knowledge, .. }, Phase::Anomalies) => {
            let known: Vec<String> = match task_knowledge {
                None => Vec::new(),
                Some(kb) => {
                    BASE_KEY_CLASSES.iter().map(|c| c.to_string()).chain(kb.iter().map(|e| e.class.clone())).collect()
                }
            };
            let done = history
                .iter()
                .filter(|r| r.step.phase == Phase::Anomalies)
                .any(|r| anomalies_ok(&r.response, r.unresolved, &known));
            if done {
                (Vec::new(), false)
            } else {
                (alloc::vec![String::from("anomalies")], true)
            }
        }
        (BsKnowledge::Case2 { moves }, Phase::Locate) => {
            // Later locating rides along with the place queries.
            if history.iter().any(|r| r.step.phase == Phase::Locate) {
                (Vec::new(), false)
            } else {
                (moves.iter().map(|(n, _)| n.clone()).collect(), true)
            }
        }
        (BsKnowledge::Case2 { moves }, Phase::Place) => {
            let v = case2_view(history, moves);
            let p: Vec<String> = (0..moves.len()).filter(|&k| !v.placed[k]).map(|k| moves[k].0.clone()).collect();
            let ok = !p.is_empty();
            (p, ok)
        }
        _ => (Vec::new(), false),
    }
}

fn phases(bs: &BsKnowledge) -> &'static [Phase] {
    match bs {
        BsKnowledge::Case1 { .. } => &[Phase::Readings, Phase::Anomalies],
        BsKnowledge::Case2 { .. } => &[Phase::Locate, Phase::Place],
    }
}

fn query_text(step: &PlanStep, history: &[RoundView], bs: &BsKnowledge) -> String {
    match step.phase {
        Phase::Readings => {
            let asked_before = history.iter().any(|r| r.step.phase == Phase::Readings);
            let BsKnowledge::Case1 { sensors, .. } = bs else { unreachable!() };
            if !asked_before || step.subjects.len() == sensors.len() {
                String::from(
                    "Please inspect the warehouse and report the readings of all sensors together with their locations.",
                )
            } else {
                format!("Please report the readings of sensors {} again.", list_phrase(&step.subjects))
            }
        }
        Phase::Anomalies => String::from("Please check the racks and aisles and report any anomalies you find."),
        Phase::Locate => {
            format!("Please locate the following items in the living room: {}.", list_phrase(&step.subjects))
        }
        Phase::Place => {
            let BsKnowledge::Case2 { moves } = bs else { unreachable!() };
            let v = case2_view(history, moves);
            let mut place = String::new();
            let mut unknown: Vec<String> = Vec::new();
            for name in &step.subjects {
                let k = moves.iter().position(|(n, _)| n == name).expect("subject is a move");
                match v.origin[k] {
                    Some(o) => {
                        let t = moves[k].1;
                        place.push_str(&format!(
                            " Pick up the {name} at {} and place it at {}.",
                            format_coordinate(o.0, o.1),
                            format_coordinate(t.0, t.1)
                        ));
                    }
                    None => unknown.push(name.clone()),
                }
            }
            let mut s = String::new();
            if !place.is_empty() {
                s.push_str("Please place the following items at their targets.");
                s.push_str(&place);
            }
            if !unknown.is_empty() {
                if !s.is_empty() {
                    s.push(' ');
                }
                s.push_str(&format!(
                    "Please locate the following items in the living room: {}.",
                    list_phrase(&unknown)
                ));
            }
            s
        }
        Phase::Free => String::new(),
    }
}

/// Adds the base station's politeness: an opening and fillers. Place
/// queries restate targets.
pub fn decorate_query(core: &str, step: &PlanStep, bs: &BsKnowledge, verbosity: f64) -> String {
    if verbosity <= 1.0 {
        return core.to_string();
    }
    let mut s = format!("{} {}", BS_OPENINGS[0], core);
    let placing: Vec<&String> = step.subjects.iter().filter(|n| core.contains(&format!("Pick up the {n} "))).collect();
    let extra = match (step.phase, bs) {
        (Phase::Place, BsKnowledge::Case2 { moves }) if !placing.is_empty() => {
            let n = libm::round((verbosity - 1.0) * placing.len() as f64) as usize;
            (0..n)
                .map(|j| {
                    if j % 2 == 0 {
                        let name = placing[(j / 2) % placing.len()];
                        let t = moves.iter().find(|(m, _)| m == name).expect("subject is a move").1;
                        format!("To confirm, the {name} goes to {}.", format_coordinate(t.0, t.1))
                    } else {
                        BS_FILLERS[(j / 2) % BS_FILLERS.len()].to_string()
                    }
                })
                .collect::<Vec<_>>()
        }
        _ => alloc::vec![BS_FILLERS[step.attempt as usize % BS_FILLERS.len()].to_string()],
    };
    for e in extra {
        s.push(' ');
        s.push_str(&e);
    }
    s
}

pub fn plan(history: &[RoundView], bs: &BsKnowledge) -> BsDecision {
    let order = phases(bs);
    let state: Vec<(Vec<String>, bool)> = order.iter().map(|&p| pending(p, history, bs)).collect();
    if state.iter().all(|(p, _)| p.is_empty()) {
        return BsDecision::TaskComplete;
    }
    let mut step = None;
    if let Some(last) = history.last() {
        if last.step.attempt == 0 {
            if let Some(i) = order.iter().position(|&p| p == last.step.phase) {
                let (subjects, ok) = &state[i];
                if *ok {
                    step = Some(PlanStep { phase: order[i], attempt: 1, subjects: subjects.clone() });
                }
            }
        }
    }
    if step.is_none() {
        let start = history.last().and_then(|l| order.iter().position(|&p| p == l.step.phase)).map_or(0, |i| i + 1);
        for k in 0..order.len() {
            let i = (start + k) % order.len();
            let (subjects, ok) = &state[i];
            if *ok {
                step = Some(PlanStep { phase: order[i], attempt: 0, subjects: subjects.clone() });
                break;
            }
        }
    }
    match step {
        Some(step) => BsDecision::Query { text: query_text(&step, history, bs), step },
        // Nothing executable: report what was gathered.
        None => BsDecision::TaskComplete,
    }
}

// ---------------------------------------------------------------- evaluation

/// Missed goals whose class the base extractor lacks become KB entries.
pub fn evaluate(received: &[String], feedback: Option<&GoalChecklist>) -> Vec<KbEntry> {
    let Some(checklist) = feedback else {
        return Vec::new();
    };
    let hay = normalize(&received.join(" "));
    let mut out: Vec<KbEntry> = checklist
        .goals
        .iter()
        .filter(|g| g.class != "reading" && g.class != "placement" && !BASE_KEY_CLASSES.contains(&g.class.as_str()))
        .filter(|g| !contains_sequence(&hay, &normalize(&g.matcher)))
        .map(|g| KbEntry { class: g.class.clone(), example: g.matcher.clone() })
        .collect();
    out.sort();
    out.dedup_by(|a, b| a.class == b.class);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{Scenario, ScenarioKind};

    fn request(s: &Scenario) -> TaskRequest {
        TaskRequest { user_text: s.user_request.clone(), user_id: "u".into(), task_id: s.task_id() }
    }

    fn run_clean(s: &Scenario) -> (Vec<RoundView>, usize) {
        let bs = BsKnowledge::for_scenario(s);
        let mut env = s.env.clone();
        let mut h = Vec::new();
        for _ in 0..10 {
            match MockAgents.bs_plan(&h, &bs, &request(s)).unwrap() {
                BsDecision::TaskComplete => return (h.clone(), h.len()),
                BsDecision::Query { text, step } => {
                    let response = respond(&text, &mut env, 2.0);
                    h.push(RoundView { step, query: text, response, unresolved: 0 });
                }
            }
        }
        panic!("no termination")
    }

    #[test]
    fn clean_dialogue_finishes_in_two_rounds() {
        for kind in [ScenarioKind::Case1, ScenarioKind::Case2] {
            for seed in 0..20 {
                let s = Scenario::generate(kind, seed);
                let (h, rounds) = run_clean(&s);
                assert_eq!(rounds, 2, "{kind:?} {seed}");
                let all: Vec<String> = h.iter().map(|r| r.response.clone()).collect();
                let hay = normalize(&all.join(" "));
                for g in &s.checklist.goals {
                    assert!(contains_sequence(&hay, &normalize(&g.matcher)), "{}", g.matcher);
                }
            }
        }
    }

    #[test]
    fn case2_first_query_lists_items() {
        let s = Scenario::generate(ScenarioKind::Case2, 3);
        let Environment::Case2(h) = &s.env else { unreachable!() };
        let BsDecision::Query { text, step } = plan(&[], &BsKnowledge::for_scenario(&s)) else { panic!() };
        assert_eq!(step.phase, Phase::Locate);
        for i in &h.items {
            assert!(text.contains(&i.name));
        }
        assert!(!text.to_lowercase().contains("task complete"));
    }

    #[test]
    fn wrong_origin_reports_actual_position() {
        let s = Scenario::generate(ScenarioKind::Case2, 1);
        let Environment::Case2(h) = &s.env else { unreachable!() };
        let i = &h.items[0];
        let wrong = ((i.origin.0 + 1.0) % 10.0, i.origin.1);
        let q = format!(
            "Pick up the {} at {} and place it at {}.",
            i.name,
            format_coordinate(wrong.0, wrong.1),
            format_coordinate(i.target.0, i.target.1)
        );
        let r = respond(&q, &mut s.env.clone(), 1.0);
        assert!(r.contains(&format!("is at {}, not at", format_coordinate(i.origin.0, i.origin.1))), "{r}");
        let missing = format!("Pick up the {} and place it at (40.0,1.0).", i.name);
        assert!(respond(&missing, &mut s.env.clone(), 1.0).contains("unclear"));
    }

    #[test]
    fn verbosity_adds_fillers_only() {
        let s = Scenario::generate(ScenarioKind::Case1, 5);
        let q = "Please inspect the warehouse and report the readings of all sensors together with their locations.";
        let a = respond(q, &mut s.env.clone(), 1.0);
        let b = respond(q, &mut s.env.clone(), 2.0);
        assert!(b.len() > a.len());
        let ids = |t: &str| readings_seen(t);
        let (mut x, mut y) = (ids(&a), ids(&b));
        x.sort();
        x.dedup();
        y.sort();
        y.dedup();
        assert_eq!(x, y);
    }

    #[test]
    fn unknown_sensor_is_not_invented() {
        let s = Scenario::generate(ScenarioKind::Case1, 5);
        let r = respond("Please report the readings of sensors T99 again.", &mut s.env.clone(), 1.0);
        assert_eq!(r, "There is no sensor T99 here, please confirm the sensor id.");
    }

    #[test]
    fn requery_once_then_move_on() {
        let s = Scenario::generate(ScenarioKind::Case1, 2);
        let bs = BsKnowledge::for_scenario(&s);
        let BsDecision::Query { text, step } = plan(&[], &bs) else { panic!() };
        let bad = RoundView { step, query: text, response: "garbled".into(), unresolved: 0 };
        let BsDecision::Query { step: s1, .. } = plan(core::slice::from_ref(&bad), &bs) else { panic!() };
        assert_eq!((s1.phase, s1.attempt), (Phase::Readings, 1));
        let bad2 = RoundView { step: s1, ..bad.clone() };
        let BsDecision::Query { step: s2, .. } = plan(&[bad, bad2], &bs) else { panic!() };
        assert_eq!((s2.phase, s2.attempt), (Phase::Anomalies, 0));
    }

    #[test]
    fn evaluation_finds_missing_classes() {
        let s = Scenario::generate(ScenarioKind::Case1, 0);
        let lossless: Vec<String> = s.checklist.goals.iter().map(|g| g.matcher.clone()).collect();
        assert!(evaluate(&lossless, Some(&s.checklist)).is_empty());
        assert!(evaluate(&[], None).is_empty());
        let e1 = evaluate(&[], Some(&s.checklist));
        assert_eq!(e1, evaluate(&[], Some(&s.checklist)));
        assert!(e1.iter().all(|e| e.class == "dust" || e.class == "moisture"));
    }
}
