use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use maneuver_cli::{parse_controllers, resolve_config, run, CliResult, Command, DirectionOption, Overrides};

#[derive(Parser, Debug)]
#[command(name = "maneuver", version, about = "Plan, design and simulate the forward/reverse S maneuver")]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON file overriding keys of the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "default")]
    preset: String,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of DOB, PID, PID_DOB.
    #[arg(long)]
    controllers: Option<String>,
    #[arg(long, value_enum)]
    direction: Option<DirectionOption>,
    /// Fail instead of rebuilding missing plan/design artifacts.
    #[arg(long)]
    no_regenerate: bool,
}

fn execute(args: Args) -> CliResult<()> {
    let ov = Overrides {
        out: args.out,
        controllers: args.controllers.as_deref().map(parse_controllers).transpose()?,
        direction: args.direction,
        no_regenerate: args.no_regenerate,
    };
    let cfg = resolve_config(args.config.as_deref(), &args.preset, &ov)?;
    for path in run(args.command, &cfg)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
