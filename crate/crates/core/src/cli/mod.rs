//! Command-line front end: run configs, subcommand dispatch, CSV and
//! text artifacts.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numeric
//! failures.

pub mod commands;
pub mod config;

pub use config::{MeshKind, ModelKind, RunConfig, SweepKind};

use crate::error::{Error, Result};
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = concat!("vssbdf2 ", env!("CARGO_PKG_VERSION"));

/// Parsed command line.
#[derive(Debug, clap::Parser)]
#[command(
    name = "vssbdf2",
    about = "Adaptive VSSBDF2 IMEX integration and SBDF2 stability analysis",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Integrate the configured model with the adaptive stepper.
    Simulate(CommonArgs),
    /// Find the numerical steady state of the configured model.
    Steady(CommonArgs),
    /// Locate the stability threshold dt* about the steady state.
    Stability(CommonArgs),
    /// Run a parameter sweep (epsilon, voltage power law, or the
    /// Richardson comparison).
    Sweep(CommonArgs),
    /// Closed-form scalar stability analysis for a (lambda, alpha) split.
    Scalar(CommonArgs),
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// Run configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override single entries: --set section.key=value (repeatable).
    #[arg(long = "set", value_name = "K=V")]
    pub set: Vec<String>,
    /// Output directory for CSV and summary artifacts.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl CommonArgs {
    pub fn load_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    Error::Config(format!("cannot read config {}: {e}", path.display()))
                })?;
                RunConfig::parse(&text)?
            }
            None => RunConfig::default(),
        };
        for spec in &self.set {
            cfg.apply_override(spec)?;
        }
        if let Some(jobs) = self.jobs {
            cfg.jobs = jobs.max(1);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Run a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Simulate(args) => dispatch(args, commands::cmd_simulate),
        Command::Steady(args) => dispatch(args, commands::cmd_steady),
        Command::Stability(args) => dispatch(args, commands::cmd_stability),
        Command::Sweep(args) => dispatch(args, commands::cmd_sweep),
        Command::Scalar(args) => dispatch(args, commands::cmd_scalar),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(
    args: &CommonArgs,
    f: fn(&RunConfig, &Path) -> Result<()>,
) -> Result<()> {
    let cfg = args.load_config()?;
    std::fs::create_dir_all(&args.out)?;
    f(&cfg, &args.out)
}

/// Write a CSV body followed by the reproducibility trailer.
pub fn write_csv(path: &Path, body: &str, cfg: &RunConfig) -> Result<()> {
    let mut text = String::with_capacity(body.len() + 96);
    text.push_str(body);
    text.push_str(&metadata_block(cfg));
    std::fs::write(path, text)?;
    Ok(())
}

/// Trailing comment block with the config hash and tool version.
pub fn metadata_block(cfg: &RunConfig) -> String {
    format!(
        "# config_hash = {:016x}\n# tool = {}\n",
        cfg.hash(),
        TOOL_VERSION
    )
}

/// 17 significant digits; round-trips losslessly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
