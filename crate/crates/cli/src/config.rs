//! Flag and file configuration, merged into one resolved experiment.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use stripkde::risk::validate_class;
use stripkde::{AnalyticDensity, BandwidthSchedule, GridSpec, LossSpec};

use crate::Failure;

pub const DEFAULT_DENSITY: &str = "sech:1";
pub const DEFAULT_N: [u64; 3] = [1000, 10_000, 100_000];

/// Options shared by the experiment subcommands. Each overrides the
/// matching key of the `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct ExpArgs {
    /// sech:G0, cauchy:A, conv-uniform:G0:C or conv-points:G0:S/W[:S/W...]
    #[arg(long)]
    pub density: Option<String>,
    /// Strip half-width used by the bandwidth schedule.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Exponent of the L_p norm.
    #[arg(long)]
    pub p: Option<f64>,
    /// identity, power:Q or capped:C
    #[arg(long)]
    pub loss: Option<String>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<u64>>,
    /// Monte Carlo replicates per sample size.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Evaluation grid covers [-L, L].
    #[arg(long = "grid-l")]
    pub grid_l: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Separation exponent for the decorrelation set.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Output file; siblings with .csv (and .svg for charts) are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Keys accepted in a TOML config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    density: Option<String>,
    gamma: Option<f64>,
    p: Option<f64>,
    loss: Option<String>,
    n: Option<Vec<u64>>,
    reps: Option<usize>,
    seed: Option<u64>,
    grid_l: Option<f64>,
    grid_step: Option<f64>,
    delta: Option<f64>,
    out: Option<PathBuf>,
    pub x: Option<Vec<f64>>,
    pub pairs: Option<Vec<[f64; 2]>>,
    pub lambda: Option<Vec<f64>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| Failure::Config(format!("config {}: {}", path.display(), e.message().trim())))
    }
}

/// The fully resolved experiment. Serialized into every output file and
/// hashed for provenance.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub command: String,
    pub density: String,
    pub gamma: f64,
    pub p: f64,
    pub loss: String,
    pub n: Vec<u64>,
    pub reps: usize,
    pub seed: u64,
    pub grid_l: f64,
    pub grid_step: f64,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub parsed: Parsed,
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub density: AnalyticDensity,
    pub loss: LossSpec,
    pub grid: GridSpec,
    pub schedules: Vec<BandwidthSchedule>,
}

impl Default for Parsed {
    fn default() -> Self {
        Self {
            density: AnalyticDensity::sech(1.0).expect("valid"),
            loss: LossSpec::Identity,
            grid: GridSpec::default(),
            schedules: Vec::new(),
        }
    }
}

pub fn resolve(command: &str, args: ExpArgs, file: &FileConfig) -> Result<Resolved, Failure> {
    let f = file.clone();
    let density = args.density.or(f.density).unwrap_or_else(|| DEFAULT_DENSITY.into());
    let loss = args.loss.or(f.loss).unwrap_or_else(|| "identity".into());
    let grid_default = GridSpec::default();
    let mut r = Resolved {
        command: command.into(),
        density: String::new(),
        gamma: args.gamma.or(f.gamma).unwrap_or(0.5),
        p: args.p.or(f.p).unwrap_or(2.0),
        loss: String::new(),
        n: args.n.or(f.n).unwrap_or_else(|| DEFAULT_N.to_vec()),
        reps: args.reps.or(f.reps).unwrap_or(200),
        seed: args.seed.or(f.seed).unwrap_or(42),
        grid_l: args.grid_l.or(f.grid_l).unwrap_or(grid_default.half_width),
        grid_step: args.grid_step.or(f.grid_step).unwrap_or(grid_default.step),
        delta: args.delta.or(f.delta).unwrap_or(0.5),
        x: None,
        pairs: None,
        lambda: None,
        out: args.out.or(f.out),
        parsed: Parsed::default(),
    };
    let d: AnalyticDensity = density.parse()?;
    let l: LossSpec = loss.parse()?;
    r.density = d.id();
    r.loss = l.to_string();
    if r.n.is_empty() {
        return Err(Failure::Config("--n must list at least one sample size".into()));
    }
    if !(r.p.is_finite() && r.p >= 1.0) {
        return Err(Failure::Config(format!("--p must be at least 1, got {}", r.p)));
    }
    let schedules = r
        .n
        .iter()
        .map(|&n| BandwidthSchedule::new(r.gamma, n))
        .collect::<stripkde::Result<Vec<_>>>()?;
    r.parsed = Parsed {
        grid: GridSpec::new(r.grid_l, r.grid_step)?,
        density: d,
        loss: l,
        schedules,
    };
    Ok(r)
}

impl Resolved {
    /// Class membership of the density for (gamma, p); run before any
    /// computation that involves the density.
    pub fn check_class(&self) -> Result<f64, Failure> {
        Ok(validate_class(&self.parsed.density, self.gamma, self.p)?.norm_half_p)
    }
}
