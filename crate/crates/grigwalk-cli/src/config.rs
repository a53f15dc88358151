use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

/// Parameter flags shared by every subcommand.
#[derive(Args, Debug, Default, Clone)]
pub struct ParamFlags {
    /// JSON config file; flags given on the command line override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// ω as "pre|period" or a bare period, digits 0, 1, 2.
    #[arg(long, global = true)]
    pub omega: Option<String>,
    #[arg(long = "D", global = true)]
    pub d: Option<usize>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long = "A", global = true)]
    pub a: Option<usize>,
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Exponent ε of the η₀ weights n^{1+ε}2^{−n}.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub radius: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// "desk" or "faithful".
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

/// Fully resolved parameters of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    /// Preset or suite name, when the command takes one.
    pub target: Option<String>,
    pub omega: String,
    #[serde(rename = "D")]
    pub d: usize,
    pub beta: f64,
    #[serde(rename = "A")]
    pub a: usize,
    pub nmax: usize,
    pub eps: f64,
    pub steps: usize,
    pub trials: usize,
    pub radius: usize,
    pub seed: u64,
    pub mode: String,
    pub out: Option<PathBuf>,
}

/// Config file contents: every field optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    command: Option<String>,
    target: Option<String>,
    omega: Option<String>,
    #[serde(rename = "D")]
    d: Option<usize>,
    beta: Option<f64>,
    #[serde(rename = "A")]
    a: Option<usize>,
    nmax: Option<usize>,
    eps: Option<f64>,
    steps: Option<usize>,
    trials: Option<usize>,
    radius: Option<usize>,
    seed: Option<u64>,
    mode: Option<String>,
    out: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 20_240_101;

fn load(path: &Path) -> Result<PartialConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

impl RunConfig {
    /// Defaults, then the config file, then command-line flags.
    pub fn resolve(command: &str, target: Option<String>, flags: &ParamFlags) -> Result<Self> {
        let file = match &flags.config {
            Some(p) => load(p)?,
            None => PartialConfig::default(),
        };
        if let Some(c) = &file.command {
            if c != command {
                bail!("config is for command {c:?}, not {command:?}");
            }
        }
        let cfg = RunConfig {
            command: command.to_string(),
            target: target.or(file.target),
            omega: flags.omega.clone().or(file.omega).unwrap_or_else(|| "012".into()),
            d: flags.d.or(file.d).unwrap_or(3),
            beta: flags.beta.or(file.beta).unwrap_or(0.9),
            a: flags.a.or(file.a).unwrap_or(6),
            nmax: flags.nmax.or(file.nmax).unwrap_or(24),
            eps: flags.eps.or(file.eps).unwrap_or(1.0),
            steps: flags.steps.or(file.steps).unwrap_or(10_000),
            trials: flags.trials.or(file.trials).unwrap_or(200),
            radius: flags.radius.or(file.radius).unwrap_or(8),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            mode: flags.mode.clone().or(file.mode).unwrap_or_else(|| "desk".into()),
            out: flags.out.clone().or(file.out),
        };
        if cfg.mode != "desk" && cfg.mode != "faithful" {
            bail!("mode must be \"desk\" or \"faithful\", got {:?}", cfg.mode);
        }
        Ok(cfg)
    }
}
