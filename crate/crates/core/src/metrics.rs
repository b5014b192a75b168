//! Success rate, Distinct-1 and per-cell aggregation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::GoalChecklist;
use crate::text::{contains_sequence, normalize};

/// Percentage of checklist weight whose matcher occurs in `text`.
pub fn success_rate(text: &str, checklist: &GoalChecklist) -> f64 {
    let hay = normalize(text);
    let total: f64 = checklist.goals.iter().map(|g| g.weight).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let hit = checklist
        .goals
        .iter()
        .filter(|g| contains_sequence(&hay, &normalize(&g.matcher)))
        .fold(0.0, |acc, g| acc + g.weight);
    100.0 * hit / total
}

/// Unique over total lowercase whitespace tokens across `texts`.
pub fn distinct_1<S: AsRef<str>>(texts: &[S]) -> Result<f64> {
    let mut total = 0usize;
    let mut seen: BTreeSet<String> = BTreeSet::new();
    for t in texts {
        for tok in t.as_ref().split_whitespace() {
            total += 1;
            seen.insert(tok.to_lowercase());
        }
    }
    if total == 0 {
        return Err(Error::UndefinedMetric("distinct-1 of an empty text"));
    }
    Ok(seen.len() as f64 / total as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario: String,
    pub method: String,
    pub snr_db: f64,
    pub seed: u64,
    pub sr: f64,
    pub distinct1: f64,
    pub downlink_bits: u64,
    pub uplink_bits: u64,
    pub rounds: usize,
    /// The base station declared the task complete.
    pub completed: bool,
    /// Every checklist goal was met (the user's view).
    pub user_complete: bool,
    pub kb_preload_bits: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation (n - 1); 0 for a single value.
    pub stddev: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stddev = if n < 2 {
            0.0
        } else {
            libm::sqrt(values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64)
        };
        Self { mean, stddev }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub method: String,
    pub snr_db: f64,
    pub count: usize,
    pub sr: Stat,
    pub distinct1: Stat,
    pub downlink_bits: Stat,
    pub uplink_bits: Stat,
    pub rounds: Stat,
    /// Fraction of runs the base station completed.
    pub completed: f64,
}

/// Groups by (scenario, method, snr) and summarizes each cell. Seeds are
/// sorted first so the arithmetic does not depend on input order.
pub fn aggregate(results: &[RunResult]) -> Vec<SummaryRow> {
    let mut cells: BTreeMap<(String, String, i64), Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        let key = (r.scenario.clone(), r.method.clone(), libm::round(r.snr_db * 1000.0) as i64);
        cells.entry(key).or_default().push(r);
    }
    cells
        .into_values()
        .map(|mut rs| {
            rs.sort_by(|a, b| a.seed.cmp(&b.seed).then(a.sr.total_cmp(&b.sr)));
            let col = |f: &dyn Fn(&RunResult) -> f64| Stat::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            SummaryRow {
                scenario: rs[0].scenario.clone(),
                method: rs[0].method.clone(),
                snr_db: rs[0].snr_db,
                count: rs.len(),
                sr: col(&|r| r.sr),
                distinct1: col(&|r| r.distinct1),
                downlink_bits: col(&|r| r.downlink_bits as f64),
                uplink_bits: col(&|r| r.uplink_bits as f64),
                rounds: col(&|r| r.rounds as f64),
                completed: rs.iter().filter(|r| r.completed).count() as f64 / rs.len() as f64,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Goal;
    use alloc::string::ToString;

    fn checklist(n: usize) -> GoalChecklist {
        GoalChecklist {
            goals: (0..n)
                .map(|i| Goal {
                    id: alloc::format!("g{i}"),
                    class: "reading".into(),
                    matcher: alloc::format!("T{i:02} 2{i}.5 C"),
                    weight: 1.0,
                })
                .collect(),
        }
    }

    #[test]
    fn sr_ratio() {
        let c = checklist(10);
        let text: String = (0..9).map(|i| alloc::format!("Sensor T{i:02}: 2{i}.50 C. ")).collect();
        assert_eq!(success_rate(&text, &c), 90.0);
        assert_eq!(success_rate("", &c), 0.0);
    }

    #[test]
    fn distinct() {
        assert_eq!(distinct_1(&["the cat sat the cat"]).unwrap(), 0.6);
        assert_eq!(distinct_1(&["a b", "c"]).unwrap(), 1.0);
        assert_eq!(distinct_1(&["x x x x"]).unwrap(), 0.25);
        assert!(distinct_1::<&str>(&[]).is_err());
    }

    fn rr(seed: u64, sr: f64) -> RunResult {
        RunResult {
            scenario: "case1".to_string(),
            method: "Direct".to_string(),
            snr_db: 10.0,
            seed,
            sr,
            distinct1: 0.5,
            downlink_bits: 10,
            uplink_bits: 20,
            rounds: 2,
            completed: true,
            user_complete: sr == 100.0,
            kb_preload_bits: 0,
        }
    }

    #[test]
    fn aggregation() {
        let one = aggregate(&[rr(1, 80.0)]);
        assert_eq!(one[0].sr, Stat { mean: 80.0, stddev: 0.0 });
        let a = aggregate(&[rr(1, 80.0), rr(2, 100.0), rr(3, 90.0)]);
        let b = aggregate(&[rr(3, 90.0), rr(1, 80.0), rr(2, 100.0)]);
        assert_eq!(a, b);
        assert_eq!(a[0].sr.mean, 90.0);
        assert!((a[0].sr.stddev - 10.0).abs() < 1e-12);
        assert_eq!(aggregate(&[]).len(), 0);
    }
}
