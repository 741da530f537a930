use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use domconv::convexify::{Backend, EpsilonSchedule};
use domconv::CorpusId;
use serde::Deserialize;

pub const DEFAULT_GRID: usize = 1025;
pub const DEFAULT_HORIZON: usize = 200;
pub const DEFAULT_TOLERANCE: f64 = 1e-2;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_STEPS: usize = 20;

/// Flags shared by every verb. Each overrides the same key in `--config`.
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Grid size (points on [0, 1])
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Tail horizon, also the number of terms generated
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Tolerance for first-passage and certification checks
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Lipschitz bound L (default: certified constant of the corpus entry)
    #[arg(long, global = true)]
    pub lipschitz: Option<f64>,
    /// Minimax backend
    #[arg(long, global = true, value_parser = parse_backend)]
    pub backend: Option<Backend>,
    /// Random seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output path; `.json` selects JSON, anything else CSV or text
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Corpus entry
    #[arg(long, global = true, value_parser = parse_corpus)]
    pub corpus: Option<CorpusId>,
    /// JSON sequence (or function, for `envelope`) replacing the corpus
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// ε for the inductive construction
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Convexification steps
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Random instances for `lattice-check`
    #[arg(long, global = true)]
    pub trials: Option<usize>,
}

fn parse_backend(s: &str) -> Result<Backend, String> {
    s.parse().map_err(|e: domconv::Error| e.to_string())
}

fn parse_corpus(s: &str) -> Result<CorpusId, String> {
    s.parse().map_err(|e: domconv::Error| e.to_string())
}

/// Contents of a `--config` file; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    grid: Option<usize>,
    horizon: Option<usize>,
    tol: Option<f64>,
    lipschitz: Option<f64>,
    backend: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    corpus: Option<String>,
    input: Option<PathBuf>,
    epsilon: Option<f64>,
    steps: Option<usize>,
    trials: Option<usize>,
    schedule: Option<EpsilonSchedule>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid: usize,
    pub horizon: usize,
    pub tol: f64,
    pub lipschitz: Option<f64>,
    pub backend: Backend,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub corpus: Option<CorpusId>,
    pub input: Option<PathBuf>,
    pub epsilon: f64,
    pub steps: Option<usize>,
    pub trials: usize,
    pub schedule: EpsilonSchedule,
}

fn read_file_config(path: &Path) -> Result<FileConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if text.trim().is_empty() {
        return Err(format!("{}: config file is empty", path.display()));
    }
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn positive(name: &str, v: f64) -> Result<f64, String> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("{name} must be positive, got {v}"))
    }
}

fn nonzero(name: &str, v: usize) -> Result<usize, String> {
    if v > 0 {
        Ok(v)
    } else {
        Err(format!("{name} must be positive"))
    }
}

impl RunConfig {
    /// Flags override the config file, which overrides the defaults.
    pub fn resolve(flags: &Flags) -> Result<Self, String> {
        let file = match &flags.config {
            Some(path) => read_file_config(path)?,
            None => FileConfig::default(),
        };
        let backend = match (flags.backend, &file.backend) {
            (Some(b), _) => b,
            (None, Some(s)) => s.parse().map_err(|e: domconv::Error| e.to_string())?,
            (None, None) => Backend::Lp,
        };
        let corpus = match (flags.corpus, &file.corpus) {
            (Some(c), _) => Some(c),
            (None, Some(s)) => Some(s.parse().map_err(|e: domconv::Error| e.to_string())?),
            (None, None) => None,
        };
        let config = Self {
            grid: nonzero("grid", flags.grid.or(file.grid).unwrap_or(DEFAULT_GRID))?,
            horizon: nonzero("horizon", flags.horizon.or(file.horizon).unwrap_or(DEFAULT_HORIZON))?,
            tol: positive("tol", flags.tol.or(file.tol).unwrap_or(DEFAULT_TOLERANCE))?,
            lipschitz: flags
                .lipschitz
                .or(file.lipschitz)
                .map(|l| positive("lipschitz", l))
                .transpose()?,
            backend,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.clone().or(file.out),
            threads: flags.threads.or(file.threads).map(|t| nonzero("threads", t)).transpose()?,
            corpus,
            input: flags.input.clone().or(file.input),
            epsilon: positive("epsilon", flags.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON))?,
            steps: flags.steps.or(file.steps).map(|s| nonzero("steps", s)).transpose()?,
            trials: nonzero("trials", flags.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS))?,
            schedule: file.schedule.unwrap_or_default(),
        };
        if config.grid < 2 {
            return Err("grid needs at least 2 points".into());
        }
        Ok(config)
    }

    pub fn wants_json(&self) -> bool {
        self.out
            .as_ref()
            .and_then(|p| p.extension())
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
    }
}
