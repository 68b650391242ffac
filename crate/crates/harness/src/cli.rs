//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{execute, Command};
use crate::config::LoadedConfig;
use crate::presets::{self, PRESETS};
use crate::studies::default_workers;
use crate::HarnessError;

/// Split-step solvers for Schrödinger equations with a repulsive harmonic
/// potential, driven by TOML experiment files.
#[derive(Parser, Debug)]
#[command(name = "lenssplit", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,

    /// Experiment configuration file
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Built-in configuration (see list-presets)
    #[arg(long, global = true, value_name = "NAME")]
    pub preset: Option<String>,

    /// Output directory [default: out/<name>]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Concurrent runs in convergence and error-growth studies
    #[arg(long, global = true, value_name = "K")]
    pub workers: Option<usize>,

    /// Accepted for interface stability; every computation is deterministic
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmd {
    /// Run one simulation and write series, snapshots and events
    Simulate,
    /// Error at the final time over [study] steps, with a fitted order
    Converge,
    /// Error history on both time grids against the exact Gaussian solution
    ErrorGrowth,
    /// Level curves of the Gaussian width dynamics
    PhasePortrait,
    /// Stationary Gaussian regime of (lambda, omega)
    Classify,
    /// Virial blow-up criterion for the initial data
    BlowupCheck,
    /// Names of the built-in configurations
    ListPresets,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    match dispatch(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, HarnessError> {
    let cmd = match cli.command {
        Cmd::ListPresets => {
            for p in PRESETS {
                let c = presets::load(p.name)?;
                writeln!(stdout, "{:<24} {}", p.name, c.config.meta.reproduces).map_err(stdout_error)?;
            }
            return Ok(0);
        }
        Cmd::Simulate => Command::Simulate,
        Cmd::Converge => Command::Converge,
        Cmd::ErrorGrowth => Command::ErrorGrowth,
        Cmd::PhasePortrait => Command::PhasePortrait,
        Cmd::Classify => Command::Classify,
        Cmd::BlowupCheck => Command::BlowupCheck,
    };
    let loaded = match (&cli.config, &cli.preset) {
        (Some(path), None) => LoadedConfig::from_path(path)?,
        (None, Some(name)) => presets::load(name)?,
        _ => return Err(HarnessError::Config("give exactly one of --config PATH or --preset NAME".into())),
    };
    let name = if loaded.name().is_empty() {
        cli.config
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| cmd.name().to_string())
    } else {
        loaded.name().to_string()
    };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out").join(name));
    let workers = cli.workers.or(loaded.config.study.workers).unwrap_or_else(default_workers).max(1);
    let report = execute(cmd, &loaded, &out, workers)?;
    for line in &report.lines {
        writeln!(stdout, "{line}").map_err(stdout_error)?;
    }
    writeln!(stdout, "wrote {} files to {}", report.files.len(), out.display()).map_err(stdout_error)?;
    Ok(report.exit_code)
}

fn stdout_error(e: std::io::Error) -> HarnessError {
    HarnessError::Io(format!("stdout: {e}"))
}
