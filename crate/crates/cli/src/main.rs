mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliError;
use crate::output::{emit, Format};

/// Two-photon wavefunction, brightness and focusing optimization for SPDC
/// sources.
#[derive(Debug, Parser)]
#[command(name = "spdc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Relative quadrature tolerance, overriding the config.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a configuration and echo its physical parameters.
    Validate,
    /// Joint spectral amplitude on a frequency grid.
    Jsa {
        /// Emit the transverse-integrand map at one frequency pair instead.
        #[arg(long)]
        map: bool,
    },
    /// Optimal-ratio sweep from a figure preset or the config's sweep grid.
    Sweep {
        /// Figure preset: 3, 5, 6, 7, 8 or 9.
        #[arg(long)]
        figure: Option<u8>,
    },
    /// Total brightness at the configured point or over its sweep grid.
    Brightness,
}

fn load(cli: &Cli) -> Result<Option<config::Resolved>, CliError> {
    let Some(path) = &cli.config else {
        return Ok(None);
    };
    let mut raw = config::load(path).map_err(CliError::Config)?;
    if let Some(t) = cli.tolerance {
        raw.computation.rel_tol = t;
    }
    if let Some(w) = cli.workers {
        raw.computation.workers = Some(w);
    }
    config::resolve(raw, path.parent())
        .map(Some)
        .map_err(CliError::Config)
}

fn require(cfg: Option<config::Resolved>) -> Result<config::Resolved, CliError> {
    cfg.ok_or_else(|| CliError::Usage("this command needs --config".into()))
}

fn run(cli: &Cli) -> Result<usize, CliError> {
    let cfg = load(cli)?;
    let workers = cli
        .workers
        .or(cfg.as_ref().and_then(|c| c.raw.computation.workers));
    if let Some(n) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let out = cli.out.clone().or_else(|| {
        cfg.as_ref()
            .and_then(|c| c.raw.computation.output.clone().map(PathBuf::from))
    });
    if let Some(c) = &cfg {
        let (lo, hi) = c.setup.crystal.window;
        eprintln!("window in use: {lo:.6}-{hi:.6} rad/fs");
    }
    let outcome = match &cli.command {
        Command::Validate => {
            let report = commands::validate(&require(cfg)?)?;
            emit(
                &commands::report_bytes(&report, cli.format == Format::Json)?,
                out.as_deref(),
            )?;
            return Ok(0);
        }
        Command::Jsa { map: true } => commands::transverse_map(&require(cfg)?)?,
        Command::Jsa { map: false } => commands::jsa(&require(cfg)?)?,
        Command::Sweep { figure } => commands::sweep(cfg.as_ref(), *figure, cli.tolerance)?,
        Command::Brightness => commands::brightness(&require(cfg)?)?,
    };
    emit(&outcome.table.render(cli.format)?, out.as_deref())?;
    if outcome.failures > 0 {
        eprintln!("{} point(s) failed", outcome.failures);
    }
    Ok(outcome.failures)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
