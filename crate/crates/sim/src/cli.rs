//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Backend, Loaded, Overrides, SeedSpec};
use crate::error::{usage, Error, Result};
use crate::{calibration, export, runner};

#[derive(Debug, Parser)]
#[command(name = "agentcomm", version, about = "Semantic agent-to-agent communication simulator over OFDM links")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Run the method x SNR x seed grid.
    Run(RunArgs),
    /// Bandwidth and SNR sweeps of the compressor and the sentence codec.
    Ablation(AblationArgs),
    /// Validate a calibration CSV and show any monotone repair.
    CalibrateCheck {
        path: PathBuf,
        /// Write the repaired table here.
        #[arg(long)]
        write_repaired: Option<PathBuf>,
    },
    /// Write vocabulary, corpus, scenarios or codec files.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Comma-separated, e.g. `Direct,LC+SC(Im)`.
    #[arg(long)]
    pub methods: Option<String>,
    /// Comma-separated mean SNRs in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    /// A count, a comma list or a range `a..b`.
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    pub parallel: Option<usize>,
    /// `mock` or `http`.
    #[arg(long)]
    pub llm_backend: Option<String>,
}

#[derive(Debug, Args)]
pub struct AblationArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// SNR-curve points, comma-separated dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub parallel: Option<usize>,
    #[arg(long)]
    pub llm_backend: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Codec vocabulary as JSON.
    #[arg(long)]
    pub export_vocab: Option<PathBuf>,
    /// Training corpus, one sentence per line.
    #[arg(long)]
    pub export_corpus: Option<PathBuf>,
    /// Directory for scenario JSON files.
    #[arg(long)]
    pub export_scenarios: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub seeds: Option<String>,
    /// Huffman code lengths, binary.
    #[arg(long)]
    pub export_codebook: Option<PathBuf>,
    /// LDPC parity-check rows, binary.
    #[arg(long)]
    pub export_ldpc: Option<PathBuf>,
    /// The calibration table in use, as CSV.
    #[arg(long)]
    pub export_calibration: Option<PathBuf>,
}

fn load(config: &Option<PathBuf>) -> Result<Loaded> {
    match config {
        Some(p) => Loaded::load(p),
        None => Ok(Loaded::defaults()),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = load(&args.config)?;
    let ov = Overrides {
        methods: args.methods,
        snr_db: args.snr_db,
        seeds: args.seeds,
        scenario: args.scenario,
        out: args.out,
        parallel: args.parallel,
        backend: args.llm_backend,
    };
    let plan = cfg.plan(&ov)?;
    let summary = runner::cmd_run(&cfg, &plan)?;
    for p in &summary.written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn ablation(args: AblationArgs) -> Result<()> {
    let cfg = load(&args.config)?;
    let ov = Overrides { snr_db: args.snr_db, seeds: args.seeds, scenario: args.scenario, ..Overrides::default() };
    let a = cfg.ablation(&ov)?;
    let backend = match &args.llm_backend {
        Some(b) => Backend::parse(b).ok_or_else(|| Error::Usage(format!("--llm-backend: unknown backend '{b}'")))?,
        None => Backend::parse(&cfg.config.run.backend).unwrap_or(Backend::Mock),
    };
    let out = args.out.unwrap_or_else(|| cfg.config.run.out.clone());
    for p in runner::cmd_ablation(&cfg, &a, backend, args.parallel.unwrap_or(cfg.config.run.parallel), &out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn calibrate_check(path: PathBuf, write_repaired: Option<PathBuf>) -> Result<()> {
    let report = calibration::check(&path)?;
    print!("{report}");
    if let Some(out) = write_repaired {
        let (table, _) = calibration::load_table(&path)?;
        calibration::write(&out, &table)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn export(args: ExportArgs) -> Result<()> {
    let cfg = load(&args.config)?;
    let nothing = [
        &args.export_vocab,
        &args.export_corpus,
        &args.export_scenarios,
        &args.export_codebook,
        &args.export_ldpc,
        &args.export_calibration,
    ]
    .iter()
    .all(|o| o.is_none());
    if nothing {
        return usage("export: give at least one --export-* flag");
    }
    let kinds = match &args.scenario {
        Some(s) => vec![agentcomm_core::scenario::ScenarioKind::parse(s)
            .ok_or_else(|| Error::Usage(format!("--scenario: unknown scenario '{s}'")))?],
        None => runner::all_scenarios().to_vec(),
    };
    let seeds = match &args.seeds {
        Some(s) => SeedSpec::parse(s).map_err(|e| Error::Usage(format!("--seeds: {e}")))?,
        None => cfg.config.run.seeds.clone(),
    }
    .expand(cfg.config.run.first_seed);
    let res = runner::load_resources(&cfg)?;
    let mut wrote = Vec::new();
    if let Some(p) = args.export_vocab {
        export::write_vocab(&p, &res.semantic)?;
        wrote.push(p);
    }
    if let Some(p) = args.export_corpus {
        export::write_corpus(&p, &agentcomm_core::session::build_corpus())?;
        wrote.push(p);
    }
    if let Some(dir) = args.export_scenarios {
        for k in kinds {
            wrote.extend(export::write_scenarios(&dir, k, &seeds)?);
        }
    }
    if let Some(p) = args.export_codebook {
        export::write_bytes(&p, &export::codebook_bytes(&res.classic.codebook))?;
        wrote.push(p);
    }
    if let Some(p) = args.export_ldpc {
        export::write_bytes(&p, &export::ldpc_bytes(&res.classic.code))?;
        wrote.push(p);
    }
    if let Some(p) = args.export_calibration {
        calibration::write(&p, &res.semantic.table)?;
        wrote.push(p);
    }
    for p in wrote {
        println!("wrote {}", p.display());
    }
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run(a) => run(a),
        Cmd::Ablation(a) => ablation(a),
        Cmd::CalibrateCheck { path, write_repaired } => calibrate_check(path, write_repaired),
        Cmd::Export(a) => export(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
