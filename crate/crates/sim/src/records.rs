//! Result CSVs, JSON-lines transcripts and the knowledge-store file.

use std::path::Path;

use agentcomm_core::ablation::{AblationPoint, AblationRow};
use agentcomm_core::agents::KbEntry;
use agentcomm_core::metrics::{aggregate, RunResult, Stat};
use agentcomm_core::session::{Frame, KnowledgeStore, Outcome, RoundRecord, SessionConfig, SessionTranscript};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil::{read_to_string, write_atomic};

pub const TRANSCRIPT_SCHEMA: &str = "agentcomm.transcript/1";
pub const KB_SCHEMA: &str = "agentcomm.kb/1";

/// One line of the per-run CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub snr_db: f64,
    pub seed: u64,
    pub sr: f64,
    pub distinct1: f64,
    pub downlink_bits: u64,
    pub uplink_bits: u64,
    pub rounds: usize,
    pub completed: bool,
}

impl From<&RunResult> for ResultRow {
    fn from(r: &RunResult) -> Self {
        Self {
            method: r.method.clone(),
            snr_db: r.snr_db,
            seed: r.seed,
            sr: r.sr,
            distinct1: r.distinct1,
            downlink_bits: r.downlink_bits,
            uplink_bits: r.uplink_bits,
            rounds: r.rounds,
            completed: r.completed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCsvRow {
    pub method: String,
    pub snr_db: f64,
    pub count: usize,
    pub sr_mean: f64,
    pub sr_std: f64,
    pub distinct1_mean: f64,
    pub distinct1_std: f64,
    pub downlink_bits_mean: f64,
    pub downlink_bits_std: f64,
    pub uplink_bits_mean: f64,
    pub uplink_bits_std: f64,
    pub rounds_mean: f64,
    pub rounds_std: f64,
    /// Share of runs the base station declared complete.
    pub completed_rate: f64,
    /// Share of runs that met every goal.
    pub user_complete_rate: f64,
    pub kb_preload_bits_mean: f64,
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

fn from_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = read_to_string(path)?;
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

pub fn results_csv(results: &[RunResult]) -> Result<Vec<u8>> {
    let rows: Vec<ResultRow> = results.iter().map(ResultRow::from).collect();
    if rows.is_empty() {
        return Ok(b"method,snr_db,seed,sr,distinct1,downlink_bits,uplink_bits,rounds,completed\n".to_vec());
    }
    to_csv(&rows)
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    from_csv(path)
}

pub fn summary_rows(results: &[RunResult]) -> Vec<SummaryCsvRow> {
    aggregate(results)
        .into_iter()
        .map(|s| {
            let cell: Vec<&RunResult> = results
                .iter()
                .filter(|r| r.scenario == s.scenario && r.method == s.method && r.snr_db == s.snr_db)
                .collect();
            let n = cell.len().max(1) as f64;
            SummaryCsvRow {
                method: s.method,
                snr_db: s.snr_db,
                count: s.count,
                sr_mean: s.sr.mean,
                sr_std: s.sr.stddev,
                distinct1_mean: s.distinct1.mean,
                distinct1_std: s.distinct1.stddev,
                downlink_bits_mean: s.downlink_bits.mean,
                downlink_bits_std: s.downlink_bits.stddev,
                uplink_bits_mean: s.uplink_bits.mean,
                uplink_bits_std: s.uplink_bits.stddev,
                rounds_mean: s.rounds.mean,
                rounds_std: s.rounds.stddev,
                completed_rate: s.completed,
                user_complete_rate: cell.iter().filter(|r| r.user_complete).count() as f64 / n,
                kb_preload_bits_mean: cell.iter().map(|r| r.kb_preload_bits as f64).sum::<f64>() / n,
            }
        })
        .collect()
}

pub fn summary_csv(results: &[RunResult]) -> Result<Vec<u8>> {
    to_csv(&summary_rows(results))
}

pub fn read_summary(path: &Path) -> Result<Vec<SummaryCsvRow>> {
    from_csv(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCsvRow {
    pub curve: String,
    pub method: String,
    pub x: f64,
    pub count: usize,
    pub bandwidth_ratio_mean: f64,
    pub bandwidth_ratio_std: f64,
    pub sr_mean: f64,
    pub sr_std: f64,
}

fn curve_name(p: &impl Serialize) -> String {
    serde_json::to_value(p).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

pub fn ablation_points_csv(points: &[AblationPoint]) -> Result<Vec<u8>> {
    to_csv(points)
}

pub fn ablation_summary_rows(rows: &[AblationRow]) -> Vec<AblationCsvRow> {
    rows.iter()
        .map(|r| {
            let Stat { mean: bw, stddev: bw_sd } = r.bandwidth_ratio;
            AblationCsvRow {
                curve: curve_name(&r.curve),
                method: r.method.clone(),
                x: r.x,
                count: r.count,
                bandwidth_ratio_mean: bw,
                bandwidth_ratio_std: bw_sd,
                sr_mean: r.sr.mean,
                sr_std: r.sr.stddev,
            }
        })
        .collect()
}

pub fn ablation_summary_csv(rows: &[AblationRow]) -> Result<Vec<u8>> {
    to_csv(&ablation_summary_rows(rows))
}

pub fn read_ablation_summary(path: &Path) -> Result<Vec<AblationCsvRow>> {
    from_csv(path)
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Record<'a> {
    Round {
        schema: &'static str,
        task_id: &'a str,
        method: &'a str,
        snr_db: f64,
        seed: u64,
        #[serde(flatten)]
        round: &'a RoundRecord,
    },
    Summary {
        schema: &'static str,
        task_id: &'a str,
        config: &'a SessionConfig,
        kb_entries: &'a [KbEntry],
        kb_preload: Option<&'a Frame>,
        outcome: Outcome,
        result: &'a RunResult,
    },
}

/// One JSON line per round, then a summary line.
pub fn transcript_jsonl(t: &SessionTranscript, result: &RunResult) -> Result<String> {
    let mut out = String::new();
    let line = |r: &Record| serde_json::to_string(r).map_err(|e| Error::Format(e.to_string()));
    for round in &t.rounds {
        out += &line(&Record::Round {
            schema: TRANSCRIPT_SCHEMA,
            task_id: &t.task_id,
            method: t.config.method.name(),
            snr_db: t.config.mean_snr_db,
            seed: t.config.seeds.scenario,
            round,
        })?;
        out.push('\n');
    }
    out += &line(&Record::Summary {
        schema: TRANSCRIPT_SCHEMA,
        task_id: &t.task_id,
        config: &t.config,
        kb_entries: &t.kb_entries,
        kb_preload: t.kb_preload.as_ref(),
        outcome: t.outcome,
        result,
    })?;
    out.push('\n');
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct KbFile {
    schema: String,
    #[serde(flatten)]
    store: KnowledgeStore,
}

/// A missing file is an empty store.
pub fn load_store(path: &Path) -> Result<KnowledgeStore> {
    if !path.exists() {
        return Ok(KnowledgeStore::default());
    }
    let f: KbFile =
        serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    if f.schema != KB_SCHEMA {
        return Err(Error::Format(format!("{}: unsupported schema '{}'", path.display(), f.schema)));
    }
    Ok(f.store)
}

pub fn save_store(path: &Path, store: &KnowledgeStore) -> Result<()> {
    let f = KbFile { schema: KB_SCHEMA.to_string(), store: store.clone() };
    let mut s = serde_json::to_string_pretty(&f).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("kb.json");
        assert!(load_store(&p).unwrap().is_empty());
        let mut s = KnowledgeStore::default();
        s.append("u", "case1-3", &[KbEntry { class: "dust".into(), example: "dust on rack R2".into() }], "LC+SC(Im)@0");
        save_store(&p, &s).unwrap();
        assert_eq!(load_store(&p).unwrap(), s);
        std::fs::write(&p, "{\"schema\":\"other/9\",\"users\":{}}").unwrap();
        assert!(load_store(&p).is_err());
    }

    #[test]
    fn empty_results_keep_the_header() {
        let b = results_csv(&[]).unwrap();
        assert_eq!(
            String::from_utf8(b).unwrap().trim(),
            "method,snr_db,seed,sr,distinct1,downlink_bits,uplink_bits,rounds,completed"
        );
    }
}
