//! Loads a JSON run configuration and drives the full pipeline into a
//! directory: simulation, verification and singularity analysis.
//!
//! `cargo run --release --example config_run -- configs/spheroid.json out/`

use curvflow::cli;
use std::path::PathBuf;

fn main() {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(
        args.next()
            .unwrap_or_else(|| "crates/core/configs/spheroid.json".into()),
    );
    let out = PathBuf::from(args.next().unwrap_or_else(|| "config_run_out".into()));

    let sim = cli::cmd_simulate(&config, Some(&out), false);
    let ver = cli::cmd_verify(&config, Some(&out.join("verify")), false);
    let sing = cli::cmd_singularity(Some(&config), Some(&out), false);
    println!("exit codes: simulate {sim}, verify {ver}, singularity {sing}");
    std::process::exit(sim.max(ver).max(sing));
}
