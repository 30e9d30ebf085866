use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use curvflow::cli;

#[derive(Parser)]
#[command(
    name = "curvflow",
    version,
    about = "Convex curvature flow with logarithmic speed"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (the run directory for `singularity`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress progress output on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow and write trace, snapshots and summary.
    Simulate,
    /// Residual ladders and monotonicity certificates.
    Verify,
    /// Blowup rate, classification and rescaled sequence of a run directory.
    Singularity,
    /// Round-sphere reference solution.
    Oracle,
    /// Pinching constants.
    Constants,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                cli::EXIT_CONFIG as u8
            } else {
                0
            });
        }
    };
    let config = args.config.as_deref();
    let out = args.out.as_deref();
    let need = |c: Option<&std::path::Path>| -> Result<PathBuf, u8> {
        c.map(PathBuf::from).ok_or_else(|| {
            eprintln!("error: --config is required for this subcommand");
            cli::EXIT_CONFIG as u8
        })
    };
    let code = match args.command {
        Command::Simulate => match need(config) {
            Ok(p) => cli::cmd_simulate(&p, out, args.quiet),
            Err(c) => c as i32,
        },
        Command::Verify => match need(config) {
            Ok(p) => cli::cmd_verify(&p, out, args.quiet),
            Err(c) => c as i32,
        },
        Command::Singularity => cli::cmd_singularity(config, out, args.quiet),
        Command::Oracle => cli::cmd_oracle(config, out, args.quiet),
        Command::Constants => cli::cmd_constants(config, out, args.quiet),
    };
    ExitCode::from(code as u8)
}
