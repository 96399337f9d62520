//! Command-line front end for the maneuver pipeline: plan the path, design
//! the controllers, simulate and tabulate.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;

use std::path::{Path, PathBuf};

use maneuver_core::sim::ControllerKind;

pub use config::{DirectionOption, RunConfig};
pub use error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Plan,
    Design,
    Simulate,
    Report,
}

/// Command-line overrides applied on top of the loaded configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub controllers: Option<Vec<ControllerKind>>,
    pub direction: Option<DirectionOption>,
    pub no_regenerate: bool,
}

pub fn resolve_config(config: Option<&Path>, preset: &str, ov: &Overrides) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::load(config, preset)?;
    if let Some(out) = &ov.out {
        cfg.output_dir = out.clone();
    }
    if let Some(c) = &ov.controllers {
        cfg.controllers = c.clone();
    }
    if let Some(d) = ov.direction {
        cfg.directions = d;
    }
    if ov.no_regenerate {
        cfg.regenerate = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one command and returns the paths it wrote.
pub fn run(cmd: Command, cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let dirs = cfg.directions.directions();
    let out_dir = &cfg.output_dir;
    match cmd {
        Command::Plan => commands::plan_stage(cfg)?.1.write_all(out_dir),
        Command::Design => commands::design_stage(cfg, &dirs)?.1.write_all(out_dir),
        Command::Simulate => {
            let (run, outputs) = commands::simulate_stage(cfg, &dirs, out_dir)?;
            let written = outputs.write_all(out_dir)?;
            match commands::divergence(&run) {
                Some(e) => Err(e),
                None => Ok(written),
            }
        }
        Command::Report => {
            let (text, outputs) = commands::report_stage(&dirs, out_dir)?;
            print!("{text}");
            outputs.write_all(out_dir)
        }
    }
}

/// Parses a comma-separated controller list such as `DOB,PID_DOB`.
pub fn parse_controllers(list: &str) -> CliResult<Vec<ControllerKind>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse().map_err(CliError::from))
        .collect()
}
