mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Ctx, Outcome, Overrides};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Growth of two coupled patches in switching environments.
#[derive(Parser, Debug)]
#[command(name = "twopatch", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: Global,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Run the command's internal oracle comparison and print a JSON report
    /// instead of writing data.
    #[arg(long, global = true)]
    check: bool,

    #[arg(long, global = true, allow_negative_numbers = true)]
    epsilon: Option<f64>,

    /// Migration rate; pins the m grid to one value.
    #[arg(long, global = true, allow_negative_numbers = true)]
    m: Option<f64>,

    /// Half-period or mean sojourn time; pins the T grid to one value.
    #[arg(long, short = 't', global = true, allow_negative_numbers = true)]
    t: Option<f64>,

    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,

    #[arg(long, global = true)]
    horizon: Option<f64>,

    #[arg(long, global = true)]
    dt: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Δ by closed form, spectral radius and orbit quadrature on an (m, T) grid (CSV).
    DeltaSurface,
    /// Migration threshold m*(ε, T) over a T grid (CSV).
    Threshold,
    /// Monte-Carlo growth rate under random switching (JSONL).
    Pdmp,
    /// Invariant density of V under Markov switching (CSV).
    Density,
    /// Growth rate under nearly periodic switching for several jitter widths (JSONL).
    Sape,
    /// Persistence verdicts of the logistic model over an m grid (CSV).
    Persistence,
    /// Two-patch SIR sweep of cumulative cases over m (CSV).
    Sir,
    /// Periodic V-orbit extremes, closed form against fixed point (CSV).
    Orbit,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::DeltaSurface => "delta-surface",
            Command::Threshold => "threshold",
            Command::Pdmp => "pdmp",
            Command::Density => "density",
            Command::Sape => "sape",
            Command::Persistence => "persistence",
            Command::Sir => "sir",
            Command::Orbit => "orbit",
        }
    }

    fn run(self, ctx: &Ctx) -> Outcome {
        match self {
            Command::DeltaSurface => commands::delta_surface(ctx),
            Command::Threshold => commands::threshold(ctx),
            Command::Pdmp => commands::pdmp(ctx),
            Command::Density => commands::density(ctx),
            Command::Sape => commands::sape(ctx),
            Command::Persistence => commands::persistence(ctx),
            Command::Sir => commands::sir(ctx),
            Command::Orbit => commands::orbit(ctx),
        }
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    let g = cli.global;
    if let Some(jobs) = g.jobs {
        if jobs == 0 {
            return Err(CliError::Validation("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let cfg = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(name) = &cfg.command {
        if name != cli.command.name() {
            return Err(CliError::Validation(format!(
                "config is for `{name}`, not `{}`",
                cli.command.name()
            )));
        }
    }
    let ctx = Ctx {
        cfg,
        over: Overrides {
            epsilon: g.epsilon,
            m: g.m,
            t: g.t,
            alpha: g.alpha,
            horizon: g.horizon,
            dt: g.dt,
            seed: g.seed,
            out: g.out,
        },
        check: g.check,
    };
    log::info!("running {}", cli.command.name());
    match cli.command.run(&ctx)? {
        Some(report) => {
            println!("{}", serde_json::to_string(&report).expect("report serializes"));
            Ok(report.ok)
        }
        None => Ok(true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
