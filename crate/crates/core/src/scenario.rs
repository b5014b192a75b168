//! Seeded scenario generators: warehouse inspection (Case1) and living-room
//! tidying (Case2), each with its goal checklist.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::lexicon::{AISLES, ANOMALY_CLASSES, HOUSEHOLD_ITEMS, RACKS, SENSOR_KINDS};
use crate::rng::rng_for;
use crate::text::format_coordinate;

pub const WAREHOUSE_WIDTH: f64 = 12.0;
pub const WAREHOUSE_DEPTH: f64 = 15.0;
pub const ROOM_WIDTH: f64 = 10.0;
pub const ROOM_DEPTH: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Case1,
    Case2,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Case1 => "case1",
            ScenarioKind::Case2 => "case2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "case1" => Some(ScenarioKind::Case1),
            "case2" => Some(ScenarioKind::Case2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorReading {
    pub id: String,
    pub kind: String,
    /// Rendered value, e.g. `41.5`.
    pub value: String,
    pub unit: String,
    pub location: (f64, f64),
}

impl SensorReading {
    /// `T03: 41.5 C at (2.0,3.5)`
    pub fn fragment(&self) -> String {
        format!("{}: {} {} at {}", self.id, self.value, self.unit, format_coordinate(self.location.0, self.location.1))
    }

    pub fn fact(&self) -> String {
        format!("{} {} {}", self.id, self.value, self.unit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anomaly {
    pub class: String,
    /// Rack or aisle label such as `R3` or `A2`.
    pub location: String,
}

impl Anomaly {
    pub fn fact(&self) -> String {
        format!("{} {}", self.location, self.class)
    }

    pub fn location_word(&self) -> &'static str {
        if self.location.starts_with('A') {
            "aisle"
        } else {
            "rack"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarehouseState {
    pub readings: Vec<SensorReading>,
    pub anomalies: Vec<Anomaly>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdItem {
    pub name: String,
    pub origin: (f64, f64),
    pub target: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HouseholdPhase {
    Perception,
    Pickup,
    Verification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HouseholdState {
    pub items: Vec<HouseholdItem>,
    pub phases: Vec<HouseholdPhase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub id: String,
    /// `reading`, `placement` or the anomaly class name.
    pub class: String,
    /// Literal fact; matched after normalization.
    pub matcher: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalChecklist {
    pub goals: Vec<Goal>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Environment {
    Case1(WarehouseState),
    Case2(HouseholdState),
}

impl Environment {
    pub fn kind(&self) -> ScenarioKind {
        match self {
            Environment::Case1(_) => ScenarioKind::Case1,
            Environment::Case2(_) => ScenarioKind::Case2,
        }
    }
}

/// A generated scenario: environment, ground truth and the user's request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub seed: u64,
    pub env: Environment,
    pub checklist: GoalChecklist,
    pub user_request: String,
}

impl Scenario {
    pub fn generate(kind: ScenarioKind, seed: u64) -> Self {
        match kind {
            ScenarioKind::Case1 => {
                let (state, checklist) = gen_case1(seed);
                let user_request =
                    "Inspect the warehouse, report every sensor reading and every anomaly on the racks and aisles."
                        .to_string();
                Scenario { seed, env: Environment::Case1(state), checklist, user_request }
            }
            ScenarioKind::Case2 => {
                let (state, checklist) = gen_case2(seed);
                let moves: Vec<String> = state
                    .items
                    .iter()
                    .map(|i| format!("the {} to {}", i.name, format_coordinate(i.target.0, i.target.1)))
                    .collect();
                let user_request = format!("Tidy the living room by moving {}.", moves.join(", "));
                Scenario { seed, env: Environment::Case2(state), checklist, user_request }
            }
        }
    }

    pub fn kind(&self) -> ScenarioKind {
        self.env.kind()
    }

    /// Identifier used as the knowledge-store task key.
    pub fn task_id(&self) -> String {
        format!("{}-{}", self.kind().name(), self.seed)
    }
}

fn grid_point<R: Rng>(rng: &mut R, width: f64, depth: f64, step: f64) -> (f64, f64) {
    let nx = (width / step) as u32;
    let ny = (depth / step) as u32;
    (f64::from(rng.gen_range(0..=nx)) * step, f64::from(rng.gen_range(0..=ny)) * step)
}

pub fn gen_case1(seed: u64) -> (WarehouseState, GoalChecklist) {
    let mut rng = rng_for(seed, &[crate::rng::label("case1")]);
    let count = rng.gen_range(18..=22);
    let mut per_kind = [0u32; 4];
    let mut readings = Vec::with_capacity(count);
    for _ in 0..count {
        let k = rng.gen_range(0..SENSOR_KINDS.len());
        per_kind[k] += 1;
        let (prefix, kind, unit) = SENSOR_KINDS[k];
        let value = match prefix {
            'T' => format!("{:.1}", f64::from(rng.gen_range(36..=70u32)) * 0.5),
            'C' => format!("{}", rng.gen_range(12..=90u32) * 10),
            'L' => format!("{:.1}", f64::from(rng.gen_range(5..=95u32)) * 0.1),
            _ => format!("{}", rng.gen_range(35..=85u32)),
        };
        readings.push(SensorReading {
            id: format!("{prefix}{:02}", per_kind[k]),
            kind: kind.to_string(),
            value,
            unit: unit.to_string(),
            location: grid_point(&mut rng, WAREHOUSE_WIDTH, WAREHOUSE_DEPTH, 0.5),
        });
    }
    let n_anomalies = rng.gen_range(2..=6);
    let mut classes: Vec<usize> = (0..ANOMALY_CLASSES.len()).collect();
    classes.shuffle(&mut rng);
    let mut places: Vec<&str> = RACKS.iter().chain(AISLES).copied().collect();
    places.shuffle(&mut rng);
    let mut anomalies: Vec<Anomaly> = classes[..n_anomalies]
        .iter()
        .zip(&places)
        .map(|(&c, &p)| Anomaly { class: ANOMALY_CLASSES[c].name.to_string(), location: p.to_string() })
        .collect();
    anomalies.sort_by_key(|a| place_rank(&a.location));

    let mut goals: Vec<Goal> = readings
        .iter()
        .map(|r| Goal { id: format!("reading-{}", r.id), class: "reading".to_string(), matcher: r.fact(), weight: 1.0 })
        .collect();
    goals.extend(anomalies.iter().map(|a| Goal {
        id: format!("anomaly-{}", a.location),
        class: a.class.clone(),
        matcher: a.fact(),
        weight: 1.0,
    }));
    (WarehouseState { readings, anomalies }, GoalChecklist { goals })
}

fn place_rank(place: &str) -> usize {
    RACKS.iter().chain(AISLES).position(|p| *p == place).unwrap_or(usize::MAX)
}

pub fn gen_case2(seed: u64) -> (HouseholdState, GoalChecklist) {
    let mut rng = rng_for(seed, &[crate::rng::label("case2")]);
    let count = rng.gen_range(18..=22);
    let mut names: Vec<&str> = HOUSEHOLD_ITEMS.to_vec();
    names.shuffle(&mut rng);
    let mut cells: Vec<(f64, f64)> = (0..=ROOM_WIDTH as u32)
        .flat_map(|x| (0..=ROOM_DEPTH as u32).map(move |y| (f64::from(x), f64::from(y))))
        .collect();
    cells.shuffle(&mut rng);
    let items: Vec<HouseholdItem> = names[..count]
        .iter()
        .enumerate()
        .map(|(i, n)| HouseholdItem { name: n.to_string(), origin: cells[i], target: cells[count + i] })
        .collect();
    let goals = items
        .iter()
        .map(|i| Goal {
            id: format!("place-{}", i.name),
            class: "placement".to_string(),
            matcher: format!("{} {}", i.name, format_coordinate(i.target.0, i.target.1)),
            weight: 1.0,
        })
        .collect();
    let phases = alloc::vec![HouseholdPhase::Perception, HouseholdPhase::Pickup, HouseholdPhase::Verification];
    (HouseholdState { items, phases }, GoalChecklist { goals })
}

/// A parsed request for environment facts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactRequest {
    AllReadings,
    Readings(Vec<String>),
    ReadingsOfKind(String),
    Anomalies,
    AnomalyAt(String),
    Locate(Vec<String>),
}

/// Returns the stored facts matching `request`, verbatim. Unknown subjects
/// yield a `no reading for ...` fragment.
pub fn env_query(env: &Environment, request: &FactRequest) -> Vec<String> {
    match (env, request) {
        (Environment::Case1(w), FactRequest::AllReadings) => w.readings.iter().map(SensorReading::fragment).collect(),
        (Environment::Case1(w), FactRequest::Readings(ids)) => ids
            .iter()
            .map(|id| match w.readings.iter().find(|r| r.id.eq_ignore_ascii_case(id)) {
                Some(r) => r.fragment(),
                None => format!("no reading for {id}"),
            })
            .collect(),
        (Environment::Case1(w), FactRequest::ReadingsOfKind(kind)) => {
            let out: Vec<String> =
                w.readings.iter().filter(|r| r.kind.eq_ignore_ascii_case(kind)).map(SensorReading::fragment).collect();
            if out.is_empty() {
                alloc::vec![format!("no reading for {kind}")]
            } else {
                out
            }
        }
        (Environment::Case1(w), FactRequest::Anomalies) => w.anomalies.iter().map(Anomaly::fact).collect(),
        (Environment::Case1(w), FactRequest::AnomalyAt(place)) => {
            let out: Vec<String> =
                w.anomalies.iter().filter(|a| a.location.eq_ignore_ascii_case(place)).map(Anomaly::fact).collect();
            if out.is_empty() {
                alloc::vec![format!("no reading for {place}")]
            } else {
                out
            }
        }
        (Environment::Case2(h), FactRequest::Locate(names)) => names
            .iter()
            .map(|n| match h.items.iter().find(|i| i.name.eq_ignore_ascii_case(n)) {
                Some(i) => format!("{} at {}", i.name, format_coordinate(i.origin.0, i.origin.1)),
                None => format!("no reading for {n}"),
            })
            .collect(),
        (_, r) => alloc::vec![format!("no reading for {r:?}")],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(gen_case1(4), gen_case1(4));
        assert_eq!(gen_case2(4), gen_case2(4));
        assert_ne!(gen_case1(4), gen_case1(5));
    }

    #[test]
    fn case1_shape() {
        for seed in 0..100 {
            let (w, c) = gen_case1(seed);
            assert!((18..=22).contains(&w.readings.len()));
            assert!((2..=6).contains(&w.anomalies.len()));
            let mut locs: Vec<&str> = w.anomalies.iter().map(|a| a.location.as_str()).collect();
            locs.dedup();
            assert_eq!(locs.len(), w.anomalies.len());
            let anomaly_goals = c.goals.iter().filter(|g| g.id.starts_with("anomaly-")).count();
            assert_eq!(anomaly_goals, w.anomalies.len());
            for r in &w.readings {
                assert!(r.location.0 <= WAREHOUSE_WIDTH && r.location.1 <= WAREHOUSE_DEPTH);
            }
        }
    }

    #[test]
    fn case2_shape() {
        for seed in 0..100 {
            let (h, c) = gen_case2(seed);
            assert!((18..=22).contains(&h.items.len()));
            assert_eq!(c.goals.len(), h.items.len());
            for i in &h.items {
                assert_ne!(i.origin, i.target);
                assert!(i.target.0 <= ROOM_WIDTH && i.target.1 <= ROOM_DEPTH);
            }
        }
    }

    #[test]
    fn env_query_is_verbatim() {
        let s = Scenario::generate(ScenarioKind::Case1, 2);
        let Environment::Case1(w) = &s.env else { unreachable!() };
        let all = env_query(&s.env, &FactRequest::ReadingsOfKind("thermal".into()));
        let thermal: Vec<String> = w.readings.iter().filter(|r| r.kind == "thermal").map(|r| r.fragment()).collect();
        if !thermal.is_empty() {
            assert_eq!(all, thermal);
        }
        assert_eq!(env_query(&s.env, &FactRequest::AnomalyAt("R9".into())), ["no reading for R9"]);
    }
}
