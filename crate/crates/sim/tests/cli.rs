use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use agentcomm::records::{read_results, read_summary};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agentcomm")).args(args).output().expect("spawn agentcomm")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn single_direct_run_at_10_db_takes_two_rounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o =
        bin(&["run", "--methods", "Direct", "--snr-db", "10", "--seeds", "1", "--scenario", "case2", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_results(&out.join("case2/results.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].rounds, 2);
    assert_eq!(rows[0].sr, 100.0);
    assert!(!out.join("case1").exists());
}

#[test]
fn unknown_method_is_a_usage_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = bin(&["run", "--methods", "Direct,Telepathy", "--seeds", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Telepathy"));
    assert!(!out.exists());
}

#[test]
fn bad_flag_and_bad_config_exit_2() {
    assert_eq!(bin(&["run", "--no-such-flag"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[run]\nseeds = 2\n\n[channel]\ndecay = 3.0\n").unwrap();
    let o = bin(&["run", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.toml:5: [channel] decay"), "{err}");
}

#[test]
fn summary_means_match_a_recomputation_from_the_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = bin(&[
        "run",
        "--methods",
        "LC,LC+SC",
        "--snr-db",
        "0,10",
        "--seeds",
        "6",
        "--scenario",
        "case1",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_results(&out.join("case1/results.csv")).unwrap();
    let summary = read_summary(&out.join("case1/summary.csv")).unwrap();
    assert_eq!(rows.len(), 24);
    assert_eq!(summary.len(), 4);
    for cell in &summary {
        let mine: Vec<_> = rows.iter().filter(|r| r.method == cell.method && r.snr_db == cell.snr_db).collect();
        let n = mine.len() as f64;
        let sr = mine.iter().map(|r| r.sr).sum::<f64>() / n;
        let down = mine.iter().map(|r| r.downlink_bits as f64).sum::<f64>() / n;
        let var = mine.iter().map(|r| (r.sr - sr).powi(2)).sum::<f64>() / (n - 1.0);
        assert_eq!(cell.count, 6);
        assert!((cell.sr_mean - sr).abs() < 1e-9);
        assert!((cell.sr_std - var.sqrt()).abs() < 1e-9);
        assert!((cell.downlink_bits_mean - down).abs() < 1e-6);
    }
}

#[test]
fn transcripts_have_one_record_per_round_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = bin(&[
        "run",
        "--methods",
        "LC+SC(Im+KB)",
        "--snr-db",
        "5",
        "--seeds",
        "3",
        "--scenario",
        "case1",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_results(&out.join("case1/results.csv")).unwrap();
    let text = fs::read_to_string(out.join("case1/transcripts.jsonl")).unwrap();
    let recs: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(recs.iter().all(|r| r["schema"] == "agentcomm.transcript/1"));
    let summaries: Vec<_> = recs.iter().filter(|r| r["record"] == "summary").collect();
    assert_eq!(summaries.len(), 3);
    for row in &rows {
        let task = format!("case1-{}", row.seed);
        let n = recs.iter().filter(|r| r["record"] == "round" && r["task_id"] == task.as_str()).count();
        assert_eq!(n, row.rounds);
    }
    let kb: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("kb_store.json")).unwrap()).unwrap();
    assert_eq!(kb["schema"], "agentcomm.kb/1");
}

#[test]
fn calibrate_check_reports_repairs_and_rejects_malformed_files() {
    let o = bin(&["calibrate-check", s(&configs().join("calibration/anchored.csv"))]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("monotone: yes"));

    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    fs::write(&raw, "# provenance: trained\nn_bits,esnr_db,wer\n1000,0,0.1\n1000,5,0.004\n1000,10,0.006\n2000,0,0.01\n2000,10,0.001\n")
        .unwrap();
    let fixed = dir.path().join("fixed.csv");
    let o = bin(&["calibrate-check", s(&raw), "--write-repaired", s(&fixed)]);
    assert!(o.status.success());
    let report = String::from_utf8_lossy(&o.stdout);
    assert!(report.contains("1000,5,0.004,0.005") && report.contains("1000,10,0.006,0.005"), "{report}");
    assert!(bin(&["calibrate-check", s(&fixed)]).status.success());

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "# provenance: trained\nn_bits,esnr_db,wer\n1000,0,zero\n").unwrap();
    let o = bin(&["calibrate-check", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.csv:3"));
}

#[test]
fn exports_for_the_trainer() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = bin(&[
        "export",
        "--export-vocab",
        s(&d.join("vocab.json")),
        "--export-corpus",
        s(&d.join("corpus.txt")),
        "--export-scenarios",
        s(&d.join("scen")),
        "--scenario",
        "case2",
        "--seeds",
        "2",
        "--export-codebook",
        s(&d.join("huffman.bin")),
        "--export-ldpc",
        s(&d.join("ldpc.bin")),
        "--export-calibration",
        s(&d.join("cal.csv")),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let vocab = agentcomm::export::read_vocab(&d.join("vocab.json")).unwrap();
    assert_eq!(vocab.segment_words, 30);
    assert!(vocab.words.iter().any(|w| w == "[K1]"));
    let corpus = fs::read_to_string(d.join("corpus.txt")).unwrap();
    assert!(corpus.lines().count() > 100);
    let scen: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("scen/case2-1.json")).unwrap()).unwrap();
    assert_eq!(scen["task_id"], "case2-1");
    assert!(scen["checklist"]["goals"].as_array().is_some_and(|g| !g.is_empty()));
    agentcomm::export::codebook_from_bytes(&fs::read(d.join("huffman.bin")).unwrap()).unwrap();
    agentcomm::export::ldpc_from_bytes(&fs::read(d.join("ldpc.bin")).unwrap()).unwrap();
    assert!(bin(&["calibrate-check", s(&d.join("cal.csv"))]).status.success());
    assert_eq!(bin(&["export"]).status.code(), Some(2));
}

#[test]
fn ablation_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let o = bin(&["ablation", "--config", s(&configs().join("ablation.toml")), "--seeds", "3", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = agentcomm::records::read_ablation_summary(&out.join("ablation.csv")).unwrap();
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().all(|r| r.count == 3));
    let points = fs::read_to_string(out.join("ablation_points.csv")).unwrap();
    assert_eq!(points.lines().count(), 1 + 30 * 3);
}
