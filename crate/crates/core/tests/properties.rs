use agentcomm_core::agents::compress::compress;
use agentcomm_core::agents::extract::extract;
use agentcomm_core::agents::AgentKnowledge;
use agentcomm_core::phy::{effective_snr, partition_subchannels, ChannelRealization};
use agentcomm_core::semantic::marker_index;
use agentcomm_core::text::strip_trailing_punct;
use proptest::prelude::*;

fn words() -> impl Strategy<Value = String> {
    let pool = prop::sample::select(vec![
        "The",
        "sensor",
        "T03:",
        "41.5",
        "C",
        "at",
        "(2.0,3.5).",
        "[K1]",
        "[K12],",
        "please",
        "confirm",
        "dust",
        "rack",
        "R3",
        "and",
        "I",
        "think",
        "everything",
        "looks",
        "normal.",
        "To",
        "confirm,",
        "lux",
        "880",
        "bowl",
        "(10.0,4.5)",
        "moved",
        "carefully;",
        "aisle",
        "A2",
        "Hello",
        "robot,",
        "thank",
        "you.",
    ]);
    prop::collection::vec(pool, 1..60).prop_map(|v| v.join(" "))
}

fn kept(text: &str) -> Vec<String> {
    let mut v: Vec<String> = text
        .split_whitespace()
        .map(strip_trailing_punct)
        .filter(|t| marker_index(t).is_some() || t.chars().any(|c| c.is_ascii_digit()))
        .map(str::to_string)
        .collect();
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn esnr_between_min_and_mean(snr in prop::collection::vec(1e-3f64..1e3, 1..64), beta in 0.1f64..20.0) {
        let e = effective_snr(&snr, beta).unwrap();
        let min = snr.iter().cloned().fold(f64::INFINITY, f64::min);
        let mean = snr.iter().sum::<f64>() / snr.len() as f64;
        prop_assert!(e >= min * (1.0 - 1e-12) && e <= mean * (1.0 + 1e-12));
    }

    #[test]
    fn compress_keeps_markers_and_digits(text in words(), target in 0.05f64..1.0) {
        let k = AgentKnowledge::default();
        let out = compress(&text, &k, target);
        let (before, after) = (kept(&text), kept(&out));
        for t in &before {
            prop_assert!(after.contains(t), "{t} lost from {text:?} -> {out:?}");
        }
        prop_assert!(!out.trim().is_empty());
    }

    #[test]
    fn markers_restore_the_source(text in words()) {
        let (items, marked) = extract(&text, &AgentKnowledge::default());
        let (mut restored, mut rest) = (String::new(), marked.as_str());
        for it in &items.items {
            let at = rest.find(&it.marker).unwrap();
            restored.push_str(&rest[..at]);
            prop_assert_eq!(restored.chars().count(), it.position);
            restored.push_str(&it.text);
            rest = &rest[at + it.marker.len()..];
        }
        restored.push_str(rest);
        prop_assert_eq!(restored, text);
    }

    #[test]
    fn subchannel_groups_are_disjoint(snr in prop::collection::vec(0.01f64..100.0, 3..64),
                                      lens in prop::array::uniform3(0u64..5000)) {
        prop_assume!(lens.iter().any(|&l| l > 0));
        let r = ChannelRealization::from_linear(snr.clone()).unwrap();
        let plan = partition_subchannels(&r, lens).unwrap();
        let mut all: Vec<usize> = plan.groups.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..snr.len()).collect::<Vec<_>>());
        let worst = |g: &Vec<usize>| g.iter().map(|&i| snr[i]).fold(f64::INFINITY, f64::min);
        let best = |g: &Vec<usize>| g.iter().map(|&i| snr[i]).fold(0.0, f64::max);
        for g in 0..2 {
            if !plan.groups[g].is_empty() && !plan.groups[g + 1].is_empty() {
                prop_assert!(worst(&plan.groups[g]) >= best(&plan.groups[g + 1]));
            }
        }
    }
}
