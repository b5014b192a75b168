//! Experiment grid and ablation drivers.
//!
//! Grid cells run as independent jobs on a rayon pool. Each job writes its
//! result, transcript lines and knowledge-store delta to its own temp file;
//! once every job has succeeded the files are merged in grid order and the
//! outputs are replaced atomically.

use std::fs;
use std::path::{Path, PathBuf};

use agentcomm_core::ablation::{ablation_codec, plan_points, run_point, summarize, AblationConfig, AblationPoint};
use agentcomm_core::agents::{AgentBackend, MockAgents};
use agentcomm_core::metrics::RunResult;
use agentcomm_core::scenario::{Scenario, ScenarioKind};
use agentcomm_core::semantic::CalibrationTable;
use agentcomm_core::session::{run_result, run_with_kb_cycle, KnowledgeStore, Method, Resources, SessionConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration;
use crate::config::{Backend, Loaded, RunPlan};
use crate::error::{Error, Result};
use crate::fsutil::{read_to_string, write_atomic};
use crate::llm::{HttpAgents, Templates};
use crate::records;

/// Codec resources for a config; the calibration table is extended when
/// the configured budgets are not in it.
pub fn load_resources(cfg: &Loaded) -> Result<Resources> {
    let table = match &cfg.config.calibration.file {
        Some(p) => {
            let path = cfg.resolve(p);
            let (t, repairs) = calibration::load_table(&path)?;
            if !repairs.is_empty() {
                log::warn!("{}: {} calibration value(s) repaired to be monotone", path.display(), repairs.len());
            }
            t
        }
        None => CalibrationTable::anchored(),
    };
    let codec = cfg.codec();
    let mut budgets = table.bit_budgets();
    let missing = [codec.n_bits, codec.n_prime_bits].into_iter().any(|n| !budgets.contains(&n));
    let table = if missing {
        budgets.extend([codec.n_bits, codec.n_prime_bits]);
        budgets.sort_unstable();
        budgets.dedup();
        log::warn!("extending the calibration table to n_bits {budgets:?}");
        table.extend_log_linear(&budgets)?
    } else {
        table
    };
    Ok(Resources::build(table, codec)?)
}

pub fn make_agents(backend: Backend, cfg: &Loaded) -> Result<Box<dyn AgentBackend>> {
    Ok(match backend {
        Backend::Mock => Box::new(MockAgents),
        Backend::Http => {
            let dir = cfg.resolve(&cfg.config.llm.prompts);
            let templates = if dir.is_dir() {
                Templates::load(&dir)?
            } else {
                log::info!("{} not found; using the built-in prompt templates", dir.display());
                Templates::builtin()
            };
            Box::new(HttpAgents::new(&cfg.config.llm, templates))
        }
    })
}

fn pool(parallel: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new().num_threads(parallel).build().map_err(|e| Error::Usage(format!("--parallel: {e}")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobOutput {
    pub result: RunResult,
    /// JSON lines of the session transcript.
    pub transcript: String,
    /// The job's knowledge store after the session.
    pub store: KnowledgeStore,
}

/// Runs one grid cell against a private copy of `store`.
pub fn run_job(
    cfg: &SessionConfig,
    res: &Resources,
    agents: &dyn AgentBackend,
    store: &KnowledgeStore,
) -> Result<JobOutput> {
    let mut store = store.clone();
    let t = run_with_kb_cycle(cfg, res, agents, &mut store)?;
    let scenario = Scenario::generate(cfg.scenario, cfg.seeds.scenario);
    let result = run_result(&t, &scenario.checklist);
    let transcript = records::transcript_jsonl(&t, &result)?;
    Ok(JobOutput { result, transcript, store })
}

/// Runs `jobs`, spooling each output to `spool`; returns outputs in job order.
pub fn run_jobs(
    jobs: &[SessionConfig],
    res: &Resources,
    agents: &dyn AgentBackend,
    store: &KnowledgeStore,
    parallel: usize,
    spool: &Path,
) -> Result<Vec<JobOutput>> {
    let file = |i: usize| spool.join(format!("job-{i:06}.json"));
    pool(parallel)?.install(|| {
        jobs.par_iter().enumerate().try_for_each(|(i, cfg)| -> Result<()> {
            let out = run_job(cfg, res, agents, store).map_err(|e| {
                Error::Format(format!(
                    "{} {} {} dB seed {}: {e}",
                    cfg.scenario.name(),
                    cfg.method.name(),
                    cfg.mean_snr_db,
                    cfg.seeds.scenario
                ))
            })?;
            log::debug!("job {i} done: sr {}", out.result.sr);
            let bytes = serde_json::to_vec(&out).map_err(|e| Error::Format(e.to_string()))?;
            write_atomic(&file(i), &bytes)
        })
    })?;
    (0..jobs.len())
        .map(|i| serde_json::from_str(&read_to_string(&file(i))?).map_err(|e| Error::Format(format!("spool {i}: {e}"))))
        .collect()
}

/// Union of the job stores, in job order.
pub fn merge_stores(base: &KnowledgeStore, outputs: &[JobOutput]) -> KnowledgeStore {
    let mut merged = base.clone();
    for o in outputs {
        for (user, tasks) in &o.store.users {
            for (task, entries) in tasks {
                merged.append(user, task, &[], "");
                for e in entries {
                    merged.append(user, task, std::slice::from_ref(&e.entry), &e.origin);
                }
            }
        }
    }
    merged
}

#[derive(Debug, Clone)]
pub struct GridSummary {
    pub results: Vec<RunResult>,
    pub written: Vec<PathBuf>,
}

/// Runs the grid of `plan` and writes, per scenario, `results.csv`,
/// `summary.csv` and `transcripts.jsonl` under the output directory.
pub fn cmd_run(cfg: &Loaded, plan: &RunPlan) -> Result<GridSummary> {
    let res = load_resources(cfg)?;
    let agents = make_agents(plan.backend, cfg)?;
    let kb_file = cfg.config.kb.file.as_ref().map(|p| cfg.resolve(p));
    let store = match &kb_file {
        Some(p) => records::load_store(p)?,
        None => KnowledgeStore::default(),
    };
    let jobs = plan.jobs();
    log::info!("running {} sessions", jobs.len());
    fs::create_dir_all(&plan.out).map_err(Error::io(&plan.out))?;
    let spool = tempfile::Builder::new().prefix(".spool-").tempdir_in(&plan.out).map_err(Error::io(&plan.out))?;
    let outputs = run_jobs(&jobs, &res, agents.as_ref(), &store, plan.parallel, spool.path())?;

    let mut written = Vec::new();
    for &kind in &plan.scenarios {
        let mine: Vec<&JobOutput> = outputs.iter().filter(|o| o.result.scenario == kind.name()).collect();
        let results: Vec<RunResult> = mine.iter().map(|o| o.result.clone()).collect();
        let dir = plan.out.join(kind.name());
        let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
            let p = dir.join(name);
            write_atomic(&p, bytes)?;
            written.push(p);
            Ok(())
        };
        put("results.csv", &records::results_csv(&results)?)?;
        put("summary.csv", &records::summary_csv(&results)?)?;
        if plan.transcripts {
            put("transcripts.jsonl", mine.iter().map(|o| o.transcript.as_str()).collect::<String>().as_bytes())?;
        }
    }
    let merged = merge_stores(&store, &outputs);
    if let Some(p) = kb_file {
        records::save_store(&p, &merged)?;
        written.push(p);
    } else if plan.methods.contains(&Method::LcScImKb) {
        let p = plan.out.join("kb_store.json");
        records::save_store(&p, &merged)?;
        written.push(p);
    }
    Ok(GridSummary { results: outputs.into_iter().map(|o| o.result).collect(), written })
}

/// Every sweep point of the ablation, in plan order.
pub fn run_ablation_parallel(
    cfg: &AblationConfig,
    res: &Resources,
    agents: &dyn AgentBackend,
    parallel: usize,
) -> Result<Vec<AblationPoint>> {
    cfg.validate()?;
    let codec = ablation_codec(cfg, res)?;
    let points = plan_points(cfg);
    let chunks: Vec<Vec<AblationPoint>> = pool(parallel)?.install(|| {
        points.par_iter().map(|&p| run_point(cfg, res, &codec, agents, p).map_err(Error::from)).collect::<Result<_>>()
    })?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Writes `ablation_points.csv` and `ablation.csv` under `out`.
pub fn cmd_ablation(
    cfg: &Loaded,
    ablation: &AblationConfig,
    backend: Backend,
    parallel: usize,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let res = load_resources(cfg)?;
    let agents = make_agents(backend, cfg)?;
    let points = run_ablation_parallel(ablation, &res, agents.as_ref(), parallel)?;
    let rows = summarize(&points);
    let a = out.join("ablation_points.csv");
    let b = out.join("ablation.csv");
    write_atomic(&a, &records::ablation_points_csv(&points)?)?;
    write_atomic(&b, &records::ablation_summary_csv(&rows)?)?;
    Ok(vec![a, b])
}

/// Scenario kinds in a stable order, for exports.
pub fn all_scenarios() -> [ScenarioKind; 2] {
    [ScenarioKind::Case1, ScenarioKind::Case2]
}
