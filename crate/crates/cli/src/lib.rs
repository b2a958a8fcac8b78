//! Experiment driver for the toric-bath crate.

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{PatternSpec, RunConfig};
pub use experiments::{run_experiment, EXPERIMENTS};

/// Environment variable that caps the worker pool.
pub const WORKERS_ENV: &str = "TORIC_BATH_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("{0}")]
    InvalidParameter(String),

    #[error("cannot write output: {0}")]
    Unwritable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Other(String),
}

impl From<toric_bath::Error> for CliError {
    fn from(e: toric_bath::Error) -> Self {
        CliError::InvalidParameter(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownExperiment(_) => 2,
            CliError::InvalidParameter(_) => 3,
            CliError::Unwritable(_) => 4,
            CliError::Io(_) | CliError::Other(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::UnknownExperiment(_) => "unknown-experiment",
            CliError::InvalidParameter(_) => "invalid-parameter",
            CliError::Unwritable(_) => "unwritable",
            CliError::Io(_) => "io",
            CliError::Other(_) => "internal",
        }
    }
}

/// One invocation: experiment name, config file and optional overrides.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub experiment: String,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Loads the config, applies overrides and runs the experiment. Returns the
/// files written.
pub fn run(inv: &Invocation) -> Result<Vec<PathBuf>, CliError> {
    if !EXPERIMENTS.contains(&inv.experiment.as_str()) {
        return Err(CliError::UnknownExperiment(inv.experiment.clone()));
    }
    let text = std::fs::read_to_string(&inv.config)
        .map_err(|e| CliError::InvalidParameter(format!("config {}: {e}", inv.config.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(seed) = inv.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &inv.out {
        cfg.out = Some(out.clone());
    }
    cfg.experiment = Some(inv.experiment.clone());
    run_config(&cfg)
}

/// Runs an already parsed config. The experiment name comes from the config.
pub fn run_config(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let name = cfg
        .experiment
        .clone()
        .ok_or_else(|| CliError::InvalidParameter("experiment: not given".into()))?;
    if !EXPERIMENTS.contains(&name.as_str()) {
        return Err(CliError::UnknownExperiment(name));
    }
    cfg.params.validate()?;
    if experiments::is_stochastic(&name) {
        cfg.require_seed()?;
    }
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    // The output location is not part of the run: leave it out of the echo.
    let echoed = RunConfig {
        out: None,
        ..cfg.clone()
    };
    let header = output::Header {
        experiment: name.clone(),
        config_json: echoed.to_json(),
        seed: cfg.seed,
    };
    let out = output::OutDir::create(Path::new(&dir), header)?;
    with_pool(|| run_experiment(&name, cfg, &out))
}

fn with_pool<T: Send>(f: impl FnOnce() -> Result<T, CliError> + Send) -> Result<T, CliError> {
    let workers = match std::env::var(WORKERS_ENV) {
        Ok(v) => v.parse::<usize>().map_err(|_| {
            CliError::InvalidParameter(format!("{WORKERS_ENV}: `{v}` is not a count"))
        })?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Other(e.to_string()))?;
    pool.install(f)
}
