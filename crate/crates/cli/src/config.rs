//! Command-line flags, the JSON config file and the resolved per-command
//! configuration. Flags win over the config file, which wins over the
//! built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use relclock::clock::default_omega_range;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::states::XiSpec;

/// Keys accepted in a `--config` file. One file may be shared by several
/// commands; keys a command does not use are ignored by it.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "N")]
    pub ratio: Option<usize>,
    #[serde(rename = "M")]
    pub level: Option<usize>,
    pub grid: Option<usize>,
    #[serde(rename = "clock-start")]
    pub clock_start: Option<usize>,
    #[serde(rename = "clock-width")]
    pub clock_width: Option<Vec<usize>>,
    #[serde(rename = "omega-range")]
    pub omega_range: Option<usize>,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub t: Option<Vec<f64>>,
    pub k: Option<Vec<usize>>,
    pub phi: Option<f64>,
    pub xi: Option<String>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub weights: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::field("--config", format!("{}: {e}", path.display())))
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct JointPhaseArgs {
    /// Frequency ratio N = ω₂/ω₁
    #[arg(long = "N")]
    pub ratio: Option<usize>,
    /// Total energy label M
    #[arg(long = "M")]
    pub level: Option<usize>,
    /// Phase grid points per axis
    #[arg(long)]
    pub grid: Option<usize>,
    /// Mixture weight file; replaces the single equal-weight eigenstate
    #[arg(long)]
    pub weights: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointPhaseConfig {
    pub ratio: usize,
    pub level: usize,
    pub grid: usize,
    pub weights: Option<PathBuf>,
    pub out: PathBuf,
}

impl JointPhaseArgs {
    pub fn resolve(&self) -> CliResult<JointPhaseConfig> {
        let file = FileConfig::load(self.config.as_deref())?;
        let cfg = JointPhaseConfig {
            ratio: self.ratio.or(file.ratio).unwrap_or(3),
            level: self.level.or(file.level).unwrap_or(39),
            grid: self.grid.or(file.grid).unwrap_or(256),
            weights: self.weights.clone().or(file.weights),
            out: self
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| "joint_phase.csv".into()),
        };
        if cfg.ratio == 0 {
            return Err(CliError::field("--N", "must be at least 1"));
        }
        if cfg.grid == 0 {
            return Err(CliError::field("--grid", "must be at least 1"));
        }
        Ok(cfg)
    }
}

impl JointPhaseConfig {
    pub fn to_json(&self) -> Value {
        json!({
            "N": self.ratio,
            "M": self.level,
            "grid": self.grid,
            "weights": self.weights.as_ref().map(|p| p.display().to_string()),
            "out": self.out.display().to_string(),
        })
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct ConditionalArgs {
    #[arg(long = "N")]
    pub ratio: Option<usize>,
    /// Clock reading φ
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// First occupied clock level K
    #[arg(long = "clock-start")]
    pub clock_start: Option<usize>,
    /// Clock window widths L, comma separated
    #[arg(long = "clock-width", value_delimiter = ',')]
    pub clock_width: Option<Vec<usize>>,
    /// Number of clock steps Ω in the α-sum
    #[arg(long = "omega-range")]
    pub omega_range: Option<usize>,
    /// System state: random, number:<m> or coherent:<alpha>
    #[arg(long)]
    pub xi: Option<String>,
    /// System cutoff
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalConfig {
    pub ratio: usize,
    pub phi: f64,
    pub clock_start: usize,
    pub clock_widths: Vec<usize>,
    pub omega_range: usize,
    pub xi: XiSpec,
    pub dim: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl ConditionalArgs {
    pub fn resolve(&self) -> CliResult<ConditionalConfig> {
        let file = FileConfig::load(self.config.as_deref())?;
        let clock_start = self.clock_start.or(file.clock_start).unwrap_or(200);
        let clock_widths = self
            .clock_width
            .clone()
            .or(file.clock_width)
            .unwrap_or_else(|| vec![1, 25, 100, 400]);
        let widest = clock_widths
            .iter()
            .copied()
            .max()
            .ok_or_else(|| CliError::field("--clock-width", "needs at least one width"))?;
        if clock_widths.contains(&0) {
            return Err(CliError::field("--clock-width", "widths must be at least 1"));
        }
        let xi = XiSpec::parse(self.xi.as_deref().or(file.xi.as_deref()).unwrap_or("random"))?;
        let cfg = ConditionalConfig {
            ratio: self.ratio.or(file.ratio).unwrap_or(3),
            phi: self.phi.or(file.phi).unwrap_or(0.7),
            clock_start,
            omega_range: self
                .omega_range
                .or(file.omega_range)
                .unwrap_or_else(|| default_omega_range(clock_start, widest)),
            clock_widths,
            xi,
            dim: self.dim.or(file.dim).unwrap_or(20),
            seed: self.seed.or(file.seed).unwrap_or(0),
            out: self
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| "conditional.json".into()),
        };
        if cfg.ratio == 0 {
            return Err(CliError::field("--N", "must be at least 1"));
        }
        if !cfg.phi.is_finite() {
            return Err(CliError::field("--phi", "must be finite"));
        }
        if cfg.dim == 0 {
            return Err(CliError::field("--dim", "must be at least 1"));
        }
        Ok(cfg)
    }
}

impl ConditionalConfig {
    pub fn to_json(&self) -> Value {
        json!({
            "N": self.ratio,
            "phi": self.phi,
            "clock-start": self.clock_start,
            "clock-width": self.clock_widths,
            "omega-range": self.omega_range,
            "xi": self.xi.label(),
            "dim": self.dim,
            "seed": self.seed,
            "out": self.out.display().to_string(),
        })
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct DecohereArgs {
    /// Clock tick rate γ
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Kick angle θ per tick; defaults to 1/γ
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Times, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub t: Option<Vec<f64>>,
    /// Number differences k of the tracked coherences, comma separated
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecohereConfig {
    pub gamma: f64,
    pub theta: f64,
    pub times: Vec<f64>,
    pub ks: Vec<usize>,
    pub out: PathBuf,
}

impl DecohereArgs {
    pub fn resolve(&self) -> CliResult<DecohereConfig> {
        let file = FileConfig::load(self.config.as_deref())?;
        let gamma = self.gamma.or(file.gamma).unwrap_or(10.0);
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(CliError::field(
                "--gamma",
                format!("must be positive and finite, got {gamma}"),
            ));
        }
        let theta = self.theta.or(file.theta).unwrap_or(1.0 / gamma);
        if !theta.is_finite() {
            return Err(CliError::field("--theta", "must be finite"));
        }
        let times = self
            .t
            .clone()
            .or(file.t)
            .unwrap_or_else(|| (0..=10).map(|i| i as f64 / 10.0).collect());
        if times.is_empty() || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(CliError::field(
                "--t",
                "times must be a nonempty list of finite values ≥ 0",
            ));
        }
        let ks = self.k.clone().or(file.k).unwrap_or_else(|| (0..=4).collect());
        if ks.is_empty() {
            return Err(CliError::field("--k", "needs at least one value"));
        }
        Ok(DecohereConfig {
            gamma,
            theta,
            times,
            ks,
            out: self.out.clone().or(file.out).unwrap_or_else(|| "decohere.csv".into()),
        })
    }
}

impl DecohereConfig {
    pub fn to_json(&self) -> Value {
        json!({
            "gamma": self.gamma,
            "theta": self.theta,
            "t": self.times,
            "k": self.ks,
            "out": self.out.display().to_string(),
        })
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct VerifyArgs {
    /// Seed for the random states used by the checks
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the report to this file
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Adds the given offset to every closed-form value before comparison
    #[arg(long = "perturb-closed-form", hide = true)]
    pub perturb_closed_form: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub perturb_closed_form: f64,
}

impl VerifyArgs {
    pub fn resolve(&self) -> CliResult<VerifyConfig> {
        let file = FileConfig::load(self.config.as_deref())?;
        Ok(VerifyConfig {
            seed: self.seed.or(file.seed).unwrap_or(0),
            out: self.out.clone().or(file.out),
            perturb_closed_form: self.perturb_closed_form.unwrap_or(0.0),
        })
    }
}
