//! `hardylab`: batch runner for the grid experiments.
//!
//! Every subcommand reads a JSON run config, writes its CSV/JSON outputs and
//! a `manifest.json` into the output directory, and exits with
//! 0 (success), 2 (config error), 3 (numeric check failed) or 1 (internal).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use hardylab_core::LabError;
use serde::Serialize;

use commands::{CheckFailed, Ctx};
use config::{ConfigError, RunConfig};
use output::{OutDir, MANIFEST};

#[derive(Parser, Debug)]
#[command(
    name = "hardylab",
    version,
    about = "Weighted Hardy inequality experiments on grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Random seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Build a domain; writes dist.csv and domain.json.
    MakeDomain,
    /// Sampled doubling constant; writes doubling.json.
    Doubling,
    /// Maximal function of a field, plus optional weak-type and level-set checks.
    Maxfn,
    /// Length-constrained curve infimum; writes curve.json.
    Curve,
    /// Pointwise Hardy constant over a p grid; writes hardy_scan.csv/json.
    HardyScan,
    /// Alpha-function estimates, optionally against the certified bound.
    Alpha,
    /// Sampled Poincare constants and the pointwise Poincare check.
    Poincare,
    /// Self-improvement certificate; writes certificate.json.
    Improve,
    /// (p, beta) Hardy experiment; writes beta.csv and beta.json.
    BetaExperiment,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::MakeDomain => "make-domain",
            Command::Doubling => "doubling",
            Command::Maxfn => "maxfn",
            Command::Curve => "curve",
            Command::HardyScan => "hardy-scan",
            Command::Alpha => "alpha",
            Command::Poincare => "poincare",
            Command::Improve => "improve",
            Command::BetaExperiment => "beta-experiment",
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    version: &'a str,
    core_version: &'a str,
    seed: u64,
    status: &'a str,
    config: &'a RunConfig,
    outputs: &'a [String],
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if cause.is::<CheckFailed>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<LabError>() {
            return match e {
                LabError::NoValidSamples(_)
                | LabError::NoAdmissibleBall(_)
                | LabError::NoAdmissiblePairs(_) => 3,
                LabError::Internal(_) | LabError::EmptyBall { .. } => 1,
                _ => 2,
            };
        }
    }
    1
}

fn dispatch(cmd: Command, ctx: &Ctx, out: &mut OutDir) -> anyhow::Result<()> {
    match cmd {
        Command::MakeDomain => commands::make_domain(ctx, out),
        Command::Doubling => commands::doubling(ctx, out),
        Command::Maxfn => commands::maxfn(ctx, out),
        Command::Curve => commands::curve(ctx, out),
        Command::HardyScan => commands::hardy_scan(ctx, out),
        Command::Alpha => commands::alpha(ctx, out),
        Command::Poincare => commands::poincare(ctx, out),
        Command::Improve => commands::improve(ctx, out),
        Command::BetaExperiment => commands::beta_experiment(ctx, out),
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let name = cli.command.name();
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| config::config_err("--config is required"))?;
    let (cfg, base) = RunConfig::load(path)?;
    let root = cli
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(|o| base.join(o)))
        .unwrap_or_else(|| PathBuf::from("hardylab-out"));
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .context("building thread pool")?;
    let mut out = OutDir::create(&root)?;
    let ctx = Ctx { cfg, base, seed };
    let result = pool.install(|| dispatch(cli.command, &ctx, &mut out));
    let status = match &result {
        Ok(()) => "ok",
        Err(e) if exit_code(e) == 3 => "check_failed",
        Err(_) => "failed",
    };
    let manifest = Manifest {
        subcommand: name,
        version: env!("CARGO_PKG_VERSION"),
        core_version: hardylab_core::VERSION,
        seed,
        status,
        config: &ctx.cfg,
        outputs: out.files(),
    };
    let body = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(out.root().join(MANIFEST), body).context("writing manifest")?;
    if let Err(e) = &result {
        out.fail_marker(name, e);
    }
    result.with_context(|| format!("subcommand {name} failed"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Errors before the run started still leave a marker when the
            // output directory is known.
            if let Some(dir) = &cli.out {
                let marker = dir.join(output::FAILED);
                if !marker.exists() && std::fs::create_dir_all(dir).is_ok() {
                    let _ = std::fs::write(marker, format!("{e:#}\n"));
                }
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
