//! Command-line driver for the strip-analytic kernel density estimator.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExpArgs, FileConfig};

#[derive(Debug, Parser)]
#[command(name = "stripkde", version, about = "Kernel density estimation for strip-analytic densities")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, env = "STRIPKDE_THREADS")]
    threads: Option<usize>,
    /// TOML file with default values for the experiment flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Schedule, peak, norms and L1 bracket of the rescaled kernel.
    KernelInfo(ExpArgs),
    /// Deterministic bias sup|b_n| and ||b_n||_p on the grid.
    Bias(ExpArgs),
    /// Pointwise E k_h(x - X), E k_h^2(x - X) and Var xi_n(x).
    Moments {
        #[command(flatten)]
        exp: ExpArgs,
        /// Comma-separated evaluation points.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
    },
    /// Monte Carlo normalized L_p risk.
    Risk(ExpArgs),
    /// Monte Carlo E||xi_n||_p^p against beta_p^p.
    XiMoment(ExpArgs),
    /// Monte Carlo covariance of xi_n at pairs of points.
    Cov {
        #[command(flatten)]
        exp: ExpArgs,
        /// Comma-separated X:Y pairs.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pairs: Option<Vec<String>>,
    },
    /// Normalized absolute moments E|Y|^lambda of the kernel-shaped law.
    Ymoment {
        #[command(flatten)]
        exp: ExpArgs,
        /// Comma-separated moment orders in (0, 3).
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
    },
    /// Deterministic quadrature-versus-closed-form checks.
    Selfcheck {
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
}

/// Why a run stopped. Configuration problems exit with 2, everything
/// else with 1.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Check(String),
}

impl From<stripkde::Error> for Failure {
    fn from(e: stripkde::Error) -> Self {
        use stripkde::Error::*;
        match e {
            InvalidParameter { .. } | SubcriticalSampleSize { .. } | ClassViolation(_) => Failure::Config(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Failure::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Check(format!("thread pool: {e}")))?;
    }
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::KernelInfo(exp) => commands::kernel_info(config::resolve("kernel-info", exp, &file)?),
        Command::Bias(exp) => commands::bias(config::resolve("bias", exp, &file)?),
        Command::Moments { exp, x } => {
            let mut r = config::resolve("moments", exp, &file)?;
            r.x = Some(x.or(file.x.clone()).unwrap_or_else(|| vec![0.0]));
            commands::moments(r)
        }
        Command::Risk(exp) => commands::risk(config::resolve("risk", exp, &file)?),
        Command::XiMoment(exp) => commands::xi_moment(config::resolve("xi-moment", exp, &file)?),
        Command::Cov { exp, pairs } => {
            let mut r = config::resolve("cov", exp, &file)?;
            let pairs = match pairs {
                Some(list) => list.iter().map(|s| parse_pair(s)).collect::<Result<Vec<_>, _>>()?,
                None => file.pairs.clone().unwrap_or_else(|| vec![[0.0, 0.25], [0.0, 1.0], [0.0, 2.0], [1.0, 3.0]]),
            };
            r.pairs = Some(pairs);
            commands::cov(r)
        }
        Command::Ymoment { exp, lambda } => {
            let mut r = config::resolve("ymoment", exp, &file)?;
            r.lambda = Some(lambda.or(file.lambda.clone()).unwrap_or_else(|| vec![1.0, 2.0]));
            commands::ymoment(r)
        }
        Command::Selfcheck { inject_fault } => {
            let fault = inject_fault.map(|s| s.parse()).transpose().map_err(Failure::Config)?;
            commands::selfcheck(fault)
        }
    }
}

fn parse_pair(s: &str) -> Result<[f64; 2], Failure> {
    let bad = || Failure::Config(format!("--pairs: expected X:Y, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok([a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?])
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", first.trim());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
