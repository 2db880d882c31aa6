//! Batch front end of the `weakdamp` library: experiment configuration, orchestration of the
//! verification suites, CSV emission and the exit-code contract
//! (0 = ok, 2 = check failure, 3 = configuration error, 4 = numerical failure).

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod setup;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::commands::Outcome;
use crate::config::LoadedConfig;
use crate::error::CliError;
use crate::output::{config_hash, diag_path, sibling, write_json};
use crate::verify::Suite;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "weakdamp", version, about = "Scattering diagnostics for wave equations with weak time-dependent dissipation")]
pub struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output CSV; defaults to `output.path` of the configuration, else standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the configured random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Progress messages on standard error.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the configured data: `t,lambda_t,energy_E`.
    Simulate {
        /// Append per-mode `V = (Λu, u')` columns.
        #[arg(long)]
        dump_modes: bool,
    },
    /// Classify the coefficient into Integrable / C1 / C2.
    Classify,
    /// Tabulate the wave operators `W₊` (and `W₋`, `S` with a `[backward]` section).
    WaveOp,
    /// Distance between the damped solution and its free asymptote.
    ScatterResidual {
        /// Table written by `wave-op`.
        #[arg(long)]
        waveop: PathBuf,
    },
    /// `λ(t)·‖(u,u')‖_E` along the evolution.
    TwoSided,
    /// Run one verification suite, or all of them with a pass/fail table.
    Verify {
        #[arg(value_enum)]
        suite: Option<Suite>,
    },
}

/// Shared state of one run.
#[derive(Debug)]
pub struct Context {
    pub cfg: LoadedConfig,
    pub seed: u64,
    pub hash: String,
}

fn dispatch(ctx: &Context, command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Simulate { dump_modes } => commands::simulate(ctx, *dump_modes || ctx.cfg.config.output.dump_modes),
        Command::Classify => commands::classify(ctx),
        Command::WaveOp => commands::wave_op(ctx),
        Command::ScatterResidual { waveop } => commands::scatter_residual(ctx, waveop),
        Command::TwoSided => commands::two_sided(ctx),
        Command::Verify { suite } => verify::verify(ctx, *suite),
    }
}

fn report_error(e: &CliError, out: Option<&PathBuf>) {
    let diag = e.diagnostics();
    eprintln!("{}", serde_json::to_string(&diag).unwrap_or_default());
    // Configuration errors leave no artifacts behind.
    if let (CliError::Numerical(_) | CliError::Io(_), Some(out)) = (e, out) {
        let _ = write_json(&diag_path(out), &diag);
    }
}

fn execute(cli: &Cli) -> Result<u8, (CliError, Option<PathBuf>)> {
    let config_path = cli.config.as_ref().ok_or_else(|| (CliError::Config("--config is required".into()), None))?;
    let cfg = LoadedConfig::load(config_path).map_err(|e| (e, None))?;
    let out = cli.out.clone().or_else(|| cfg.config.output.path.as_ref().map(|p| cfg.resolve(p)));
    let seed = cli.seed.unwrap_or(cfg.config.seed);
    let ctx = Context { hash: config_hash(&cfg.text, seed), cfg, seed };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| (CliError::Config(format!("--threads: {e}")), None))?;
    let outcome = pool.install(|| dispatch(&ctx, &cli.command)).map_err(|e| (e, out.clone()))?;

    let mut summary = outcome.summary;
    summary["status"] = json!(if outcome.failed { "check_failed" } else { "ok" });
    summary["config_hash"] = json!(ctx.hash);
    summary["seed"] = json!(ctx.seed);
    let write = || -> Result<(), CliError> {
        match &out {
            Some(path) => {
                for (suffix, table) in &outcome.extra {
                    table.write(&sibling(path, suffix), &ctx.hash)?;
                }
                outcome.table.write(path, &ctx.hash)?;
                write_json(&diag_path(path), &summary)?;
            }
            None => {
                std::io::stdout().write_all(&outcome.table.render(&ctx.hash)?)?;
            }
        }
        Ok(())
    };
    write().map_err(|e| (e, None))?;
    if outcome.failed {
        eprintln!("{}", serde_json::to_string(&summary).unwrap_or_default());
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}

/// Parses arguments, runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let level = if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
    match execute(&cli) {
        Ok(code) => code,
        Err((e, out)) => {
            report_error(&e, out.as_ref());
            e.exit_code()
        }
    }
}
