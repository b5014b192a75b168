use agentcomm_core::ablation::reference_message;
use agentcomm_core::agents::compress::compress;
use agentcomm_core::agents::extract::{extract, reconstruct};
use agentcomm_core::agents::mock::respond;
use agentcomm_core::agents::{AgentKnowledge, MockAgents};
use agentcomm_core::importance::{partition, transmit_partitioned, Side};
use agentcomm_core::metrics::distinct_1;
use agentcomm_core::phy::ChannelModel;
use agentcomm_core::rng::derive_seed;
use agentcomm_core::scenario::{Environment, Scenario, ScenarioKind};
use agentcomm_core::session::Resources;
use agentcomm_core::text::{contains_sequence, normalize};

const INSPECT: &str =
    "Please inspect the warehouse and report the readings of all sensors together with their locations.";
const ANOMALIES: &str = "Please check the racks and aisles and report any anomalies you find.";

fn facts_missing(text: &str, s: &Scenario) -> usize {
    let hay = normalize(text);
    s.checklist.goals.iter().filter(|g| !contains_sequence(&hay, &normalize(&g.matcher))).count()
}

fn full_report(s: &Scenario) -> String {
    let mut env = s.env.clone();
    format!("{} {}", respond(INSPECT, &mut env, 2.0), respond(ANOMALIES, &mut env, 2.0))
}

#[test]
fn compression_at_0_6_keeps_facts_and_at_0_2_loses_some() {
    let k = AgentKnowledge::default();
    let mut lost_at_low = 0;
    for seed in 0..20 {
        let s = Scenario::generate(ScenarioKind::Case1, seed);
        let text = full_report(&s);
        assert_eq!(facts_missing(&text, &s), 0);
        assert_eq!(facts_missing(&compress(&text, &k, 0.6), &s), 0, "seed {seed}");
        lost_at_low += facts_missing(&compress(&text, &k, 0.2), &s);
    }
    assert!(lost_at_low > 0);
}

#[test]
fn inspection_response_item_count_matches_rescan() {
    let s = Scenario::generate(ScenarioKind::Case1, 2);
    let Environment::Case1(w) = &s.env else { unreachable!() };
    let ids: Vec<&str> = w.readings.iter().take(7).map(|r| r.id.as_str()).collect();
    let query = format!("Please report the readings of sensors {}.", ids.join(", "));
    let answer = respond(&query, &mut s.env.clone(), 1.0);
    let (items, marked) = extract(&answer, &AgentKnowledge::default());
    // every reading renders as "<id>: <value> <unit> at (<x>,<y>)"
    let expected = w.readings.iter().filter(|r| ids.contains(&r.id.as_str())).count() * 2;
    assert_eq!(items.items.len(), expected);
    assert!((10..=20).contains(&items.items.len()));
    assert!(marked.contains("[K1]") && !marked.contains(&ids[0].to_string()));
}

#[test]
fn corrupted_key_item_lands_in_its_slot() {
    let r = reconstruct("[K1] T03: 47.5 C [K2] (2.0,3.5)", "The sensor [K1] at [K2].", "", &[2]);
    assert_eq!(r.text, "The sensor T03: 47.5 C at (2.0,3.5).");
    let r = reconstruct("", "The sensor [K1] at [K2].", "", &[2]);
    assert_eq!(r.text, "The sensor [K1] at [K2].");
}

#[test]
fn key_items_get_the_stronger_protection() {
    let res = Resources::anchored().unwrap();
    let k = AgentKnowledge::default();
    let model = ChannelModel::default();
    let (mut w1, mut w3, mut n) = (0.0, 0.0, 0);
    for seed in 0..200u64 {
        let s = Scenario::generate(ScenarioKind::Case1, seed % 20);
        let pm = partition(&full_report(&s), &MockAgents, &k, 1.0, Side::Uplink).unwrap();
        let r = model.sample(derive_seed(seed, &[1]), 64, 3.0).unwrap();
        let rx = transmit_partitioned(&pm, &r, &res.semantic, 1.0, seed).unwrap();
        w1 += rx.wer[0];
        w3 += rx.wer[2];
        n += 1;
    }
    let (w1, w3) = (w1 / n as f64, w3 / n as f64);
    assert!(w1 < w3, "part1 {w1} part3 {w3}");
}

#[test]
fn compression_raises_distinct_1() {
    let k = AgentKnowledge::default();
    let mut lower = 0;
    for i in 0..1000u64 {
        let kind = if i % 2 == 0 { ScenarioKind::Case1 } else { ScenarioKind::Case2 };
        let text = reference_message(&Scenario::generate(kind, i / 2), 2.0);
        let verbose = distinct_1(&[&text]).unwrap();
        let short = distinct_1(&[compress(&text, &k, [0.3, 0.4, 0.6][i as usize % 3])]).unwrap();
        if short < verbose {
            lower += 1;
        }
    }
    assert_eq!(lower, 0);
}
