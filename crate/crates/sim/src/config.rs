//! TOML experiment configuration.
//!
//! Sections: `[run]`, `[channel]`, `[codec]`, `[calibration]`, `[kb]`,
//! `[ablation]` and `[llm]`. Every key is optional. Parse and validation
//! errors name the file and line.

use std::path::{Path, PathBuf};

use agentcomm_core::ablation::AblationConfig;
use agentcomm_core::phy::{ChannelModel, McsProfile};
use agentcomm_core::scenario::ScenarioKind;
use agentcomm_core::semantic::SemanticCodecConfig;
use agentcomm_core::session::{default_compression_target, Method, SessionConfig};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::fsutil::read_to_string;

/// `N` seeds starting at `first_seed`, or an explicit list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Count(u64),
    List(Vec<u64>),
}

impl SeedSpec {
    /// `"50"`, `"3,7,9"` or `"10..20"` (half-open).
    pub fn parse(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad seed '{}'", t.trim()));
        if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (num(a)?, num(b)?);
            if b <= a {
                return Err(format!("empty seed range {s}"));
            }
            return Ok(SeedSpec::List((a..b).collect()));
        }
        if s.contains(',') {
            return s
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(num)
                .collect::<std::result::Result<_, _>>()
                .map(SeedSpec::List);
        }
        num(s).map(SeedSpec::Count)
    }

    pub fn expand(&self, first: u64) -> Vec<u64> {
        match self {
            SeedSpec::Count(n) => (first..first + n).collect(),
            SeedSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Mock,
    Http,
}

impl Backend {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mock" => Some(Backend::Mock),
            "http" => Some(Backend::Http),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub scenarios: Vec<String>,
    pub methods: Vec<String>,
    pub snr_db: Vec<f64>,
    pub seeds: SeedSpec,
    pub first_seed: u64,
    pub max_rounds: usize,
    pub verbosity: f64,
    pub user_id: String,
    /// Overrides the per-scenario default.
    pub compression_target: Option<f64>,
    /// Worker threads; 0 uses every core.
    pub parallel: usize,
    pub out: PathBuf,
    pub backend: String,
    pub transcripts: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            scenarios: vec!["case1".into(), "case2".into()],
            methods: Method::GRID.iter().map(|m| m.name().to_string()).collect(),
            snr_db: vec![0.0, 5.0, 10.0],
            seeds: SeedSpec::Count(50),
            first_seed: 0,
            max_rounds: 5,
            verbosity: 2.0,
            user_id: "user-1".into(),
            compression_target: None,
            parallel: 0,
            out: PathBuf::from("results"),
            backend: "mock".into(),
            transcripts: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub taps: usize,
    pub decay: f64,
    pub subcarriers: usize,
    /// Effective-SNR shape parameter.
    pub beta: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        let m = ChannelModel::default();
        Self { taps: m.taps, decay: m.decay, subcarriers: 64, beta: McsProfile::default().beta }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecSection {
    pub segment_words: usize,
    pub n_bits: u32,
    pub n_prime_bits: u32,
}

impl Default for CodecSection {
    fn default() -> Self {
        let c = SemanticCodecConfig::default();
        Self { segment_words: c.l, n_bits: c.n_bits, n_prime_bits: c.n_prime_bits }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileSection {
    /// Relative to the config file.
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmSection {
    /// Chat-completions endpoint root, e.g. `http://127.0.0.1:8080/v1`.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub token_env: String,
    pub timeout_s: f64,
    pub retries: u32,
    pub temperature: f64,
    /// Prompt template directory, relative to the config file.
    pub prompts: PathBuf,
}

impl Default for LlmSection {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8080/v1".into(),
            model: "local-model".into(),
            token_env: "AGENTCOMM_LLM_TOKEN".into(),
            timeout_s: 60.0,
            retries: 2,
            temperature: 0.0,
            prompts: PathBuf::from("prompts"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub run: RunSection,
    pub channel: ChannelSection,
    pub codec: CodecSection,
    pub calibration: FileSection,
    pub kb: FileSection,
    pub ablation: AblationConfig,
    pub llm: LlmSection,
}

/// A config together with its source text, for error locations.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: Config,
    src: String,
    path: Option<PathBuf>,
}

/// 1-based line and column of byte offset `at`.
fn line_col(src: &str, at: usize) -> (usize, usize) {
    let before = &src[..at.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Line of `key` inside `[section]`, or of the section header.
fn locate(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

impl Loaded {
    pub fn defaults() -> Self {
        Self { config: Config::default(), src: String::new(), path: None }
    }

    pub fn parse(src: &str, path: Option<&Path>) -> Result<Self> {
        let name = path.map_or_else(|| "<config>".to_string(), |p| p.display().to_string());
        let config: Config = toml::from_str(src).map_err(|e| {
            let (line, col) = e.span().map_or((0, 0), |s| line_col(src, s.start));
            Error::Usage(format!("{name}:{line}:{col}: {}", e.message().trim()))
        })?;
        let loaded = Self { config, src: src.to_string(), path: path.map(Path::to_path_buf) };
        loaded.validate()?;
        Ok(loaded)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = read_to_string(path).map_err(|e| Error::Usage(e.to_string()))?;
        Self::parse(&src, Some(path))
    }

    /// Error located at `[section] key`.
    fn err<T>(&self, section: &str, key: &str, msg: impl std::fmt::Display) -> Result<T> {
        let name = self.path.as_ref().map_or_else(|| "<config>".to_string(), |p| p.display().to_string());
        match locate(&self.src, section, key) {
            Some(line) => usage(format!("{name}:{line}: [{section}] {key}: {msg}")),
            None => usage(format!("{name}: [{section}] {key}: {msg}")),
        }
    }

    /// Directory that relative paths in the config are resolved against.
    pub fn base_dir(&self) -> PathBuf {
        self.path.as_ref().and_then(|p| p.parent()).map(Path::to_path_buf).unwrap_or_default()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir().join(p)
        }
    }

    fn validate(&self) -> Result<()> {
        let c = &self.config;
        let r = &c.run;
        for s in &r.scenarios {
            if ScenarioKind::parse(s).is_none() {
                return self.err("run", "scenarios", format!("unknown scenario '{s}'"));
            }
        }
        for m in &r.methods {
            if parse_grid_method(m).is_none() {
                return self.err("run", "methods", format!("unknown method '{m}'"));
            }
        }
        if r.scenarios.is_empty() || r.methods.is_empty() || r.snr_db.is_empty() {
            return self.err("run", "methods", "scenarios, methods and snr_db must be non-empty");
        }
        if r.snr_db.iter().any(|s| !s.is_finite()) {
            return self.err("run", "snr_db", "SNRs must be finite");
        }
        if r.seeds.expand(r.first_seed).is_empty() {
            return self.err("run", "seeds", "no seeds");
        }
        if Backend::parse(&r.backend).is_none() {
            return self.err("run", "backend", format!("unknown backend '{}'", r.backend));
        }
        if let Some(t) = r.compression_target {
            if !(t > 0.0 && t <= 1.0) {
                return self.err("run", "compression_target", "must lie in (0, 1]");
            }
        }
        // The remaining run checks are the session's own.
        let probe = self.session_template(ScenarioKind::Case1);
        if let Err(e) = probe.validate() {
            let key = match &e {
                agentcomm_core::Error::Config(m) if m.contains("max_rounds") => "max_rounds",
                agentcomm_core::Error::Config(m) if m.contains("verbosity") => "verbosity",
                agentcomm_core::Error::Config(m) if m.contains("user_id") => "user_id",
                agentcomm_core::Error::Config(m) if m.contains("subcarriers") => {
                    return self.err("channel", "subcarriers", e)
                }
                _ => return self.err("codec", "n_bits", e),
            };
            return self.err("run", key, e);
        }
        if c.channel.taps == 0 {
            return self.err("channel", "taps", "must be at least 1");
        }
        if !(c.channel.decay > 0.0 && c.channel.decay <= 1.0) {
            return self.err("channel", "decay", "must lie in (0, 1]");
        }
        if !(c.channel.beta > 0.0 && c.channel.beta.is_finite()) {
            return self.err("channel", "beta", "must be positive");
        }
        if let Err(e) = c.ablation.validate() {
            return self.err("ablation", "seeds", e);
        }
        if c.llm.timeout_s <= 0.0 || !c.llm.timeout_s.is_finite() {
            return self.err("llm", "timeout_s", "must be positive");
        }
        if c.llm.token_env.is_empty() {
            return self.err("llm", "token_env", "must name an environment variable");
        }
        Ok(())
    }

    fn session_template(&self, scenario: ScenarioKind) -> SessionConfig {
        let c = &self.config;
        let mut s = SessionConfig::new(Method::Direct, scenario, 0.0, 0);
        s.max_rounds = c.run.max_rounds;
        s.verbosity = c.run.verbosity;
        s.user_id = c.run.user_id.clone();
        s.compression_target = c.run.compression_target.unwrap_or_else(|| default_compression_target(scenario));
        s.subcarriers = c.channel.subcarriers;
        s.channel = ChannelModel { taps: c.channel.taps, decay: c.channel.decay };
        s.mcs.beta = c.channel.beta;
        s.codec = self.codec();
        s
    }

    pub fn codec(&self) -> SemanticCodecConfig {
        let c = &self.config.codec;
        SemanticCodecConfig { l: c.segment_words, n_bits: c.n_bits, n_prime_bits: c.n_prime_bits }
    }

    /// Applies command-line overrides and expands the grid.
    pub fn plan(&self, ov: &Overrides) -> Result<RunPlan> {
        let r = &self.config.run;
        let scenarios =
            match &ov.scenario {
                Some(s) => vec![ScenarioKind::parse(s)
                    .ok_or_else(|| Error::Usage(format!("--scenario: unknown scenario '{s}'")))?],
                None => r.scenarios.iter().filter_map(|s| ScenarioKind::parse(s)).collect(),
            };
        let methods = match &ov.methods {
            Some(list) => parse_methods(list)?,
            None => r.methods.iter().filter_map(|m| parse_grid_method(m)).collect(),
        };
        let snrs_db = match &ov.snr_db {
            Some(list) => parse_snrs(list)?,
            None => r.snr_db.clone(),
        };
        let seeds = match &ov.seeds {
            Some(s) => SeedSpec::parse(s).map_err(|e| Error::Usage(format!("--seeds: {e}")))?.expand(r.first_seed),
            None => r.seeds.expand(r.first_seed),
        };
        if seeds.is_empty() {
            return usage("--seeds: no seeds");
        }
        let backend = match &ov.backend {
            Some(b) => {
                Backend::parse(b).ok_or_else(|| Error::Usage(format!("--llm-backend: unknown backend '{b}'")))?
            }
            None => Backend::parse(&r.backend).unwrap_or(Backend::Mock),
        };
        Ok(RunPlan {
            scenarios,
            methods,
            snrs_db,
            seeds,
            templates: [self.session_template(ScenarioKind::Case1), self.session_template(ScenarioKind::Case2)],
            parallel: ov.parallel.unwrap_or(r.parallel),
            out: ov.out.clone().unwrap_or_else(|| r.out.clone()),
            backend,
            transcripts: r.transcripts,
        })
    }

    /// Ablation settings with command-line overrides.
    pub fn ablation(&self, ov: &Overrides) -> Result<AblationConfig> {
        let mut a = self.config.ablation.clone();
        if let Some(s) = &ov.scenario {
            a.scenario =
                ScenarioKind::parse(s).ok_or_else(|| Error::Usage(format!("--scenario: unknown scenario '{s}'")))?;
        }
        if let Some(s) = &ov.seeds {
            match SeedSpec::parse(s).map_err(|e| Error::Usage(format!("--seeds: {e}")))? {
                SeedSpec::Count(n) => a.seeds = n,
                SeedSpec::List(v) => {
                    let (lo, hi) = (v.iter().min().copied().unwrap_or(0), v.iter().max().copied().unwrap_or(0));
                    if v.len() as u64 != hi - lo + 1 {
                        return usage("--seeds: the ablation takes a count or a contiguous range");
                    }
                    a.first_seed = lo;
                    a.seeds = v.len() as u64;
                }
            }
        }
        if let Some(list) = &ov.snr_db {
            a.snrs_db = parse_snrs(list)?;
        }
        a.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(a)
    }
}

/// Grid methods only; the codec-only method belongs to the ablation.
fn parse_grid_method(s: &str) -> Option<Method> {
    Method::parse(s).filter(|m| Method::GRID.contains(m))
}

pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let v: Vec<Method> = list
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_grid_method(t).ok_or_else(|| Error::Usage(format!("--methods: unknown method '{}'", t.trim()))))
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return usage("--methods: empty list");
    }
    Ok(v)
}

pub fn parse_snrs(list: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = list
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::Usage(format!("--snr-db: bad value '{}'", t.trim())))
        })
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return usage("--snr-db: empty list");
    }
    Ok(v)
}

/// Command-line values that replace config keys.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub methods: Option<String>,
    pub snr_db: Option<String>,
    pub seeds: Option<String>,
    pub scenario: Option<String>,
    pub out: Option<PathBuf>,
    pub parallel: Option<usize>,
    pub backend: Option<String>,
}

/// The expanded experiment grid.
#[derive(Debug, Clone)]
pub struct RunPlan {
    pub scenarios: Vec<ScenarioKind>,
    pub methods: Vec<Method>,
    pub snrs_db: Vec<f64>,
    pub seeds: Vec<u64>,
    templates: [SessionConfig; 2],
    pub parallel: usize,
    pub out: PathBuf,
    pub backend: Backend,
    pub transcripts: bool,
}

impl RunPlan {
    pub fn session(&self, scenario: ScenarioKind, method: Method, snr_db: f64, seed: u64) -> SessionConfig {
        let mut s = self.templates[scenario as usize].clone();
        s.method = method;
        s.mean_snr_db = snr_db;
        s.seeds = agentcomm_core::session::Seeds::from_run(seed);
        s
    }

    /// Grid cells in output order: scenario, method, SNR, seed.
    pub fn jobs(&self) -> Vec<SessionConfig> {
        let mut v = Vec::new();
        for &k in &self.scenarios {
            for &m in &self.methods {
                for &snr in &self.snrs_db {
                    for &seed in &self.seeds {
                        v.push(self.session(k, m, snr, seed));
                    }
                }
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_specs() {
        assert_eq!(SeedSpec::parse("3").unwrap().expand(10), vec![10, 11, 12]);
        assert_eq!(SeedSpec::parse("4,9").unwrap().expand(10), vec![4, 9]);
        assert_eq!(SeedSpec::parse("5..8").unwrap().expand(0), vec![5, 6, 7]);
        assert!(SeedSpec::parse("x").is_err());
        assert!(SeedSpec::parse("8..5").is_err());
    }

    #[test]
    fn parse_error_names_the_line() {
        let src = "[run]\nmethods = [\"Direct\"]\nsnr_db = \"ten\"\n";
        let e = Loaded::parse(src, Some(Path::new("x.toml"))).unwrap_err().to_string();
        assert!(e.starts_with("x.toml:3:"), "{e}");
    }

    #[test]
    fn validation_error_names_the_line() {
        let src = "[run]\nsnr_db = [0.0]\n\nmethods = [\"Direct\", \"Telepathy\"]\n";
        let e = Loaded::parse(src, Some(Path::new("x.toml"))).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().starts_with("x.toml:4: [run] methods: unknown method 'Telepathy'"), "{e}");
        let e = Loaded::parse("[channel]\ntaps = 0\n", None).unwrap_err().to_string();
        assert!(e.contains(":2: [channel] taps"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = Loaded::parse("[run]\nmethod = [\"LC\"]\n", None).unwrap_err().to_string();
        assert!(e.contains(":2:"), "{e}");
    }

    #[test]
    fn overrides_replace_config() {
        let l = Loaded::parse("[run]\nseeds = [1, 2]\nmax_rounds = 3\n", None).unwrap();
        let ov =
            Overrides { methods: Some("direct,LC".into()), scenario: Some("case2".into()), ..Overrides::default() };
        let p = l.plan(&ov).unwrap();
        assert_eq!(p.methods, vec![Method::Direct, Method::Lc]);
        assert_eq!(p.seeds, vec![1, 2]);
        let jobs = p.jobs();
        assert_eq!(jobs.len(), 2 * 3 * 2);
        assert_eq!(jobs[0].max_rounds, 3);
        assert_eq!(jobs[0].compression_target, 0.4);
        let bad = Overrides { methods: Some("Direct,Nope".into()), ..Overrides::default() };
        assert_eq!(l.plan(&bad).unwrap_err().exit_code(), 2);
    }
}
