//! `dstlab` — forecast evaluation for hourly time series.
//!
//! Wires the library pipeline end to end: `ingest` → `split` → `forecast` →
//! `evaluate` / `warp-measure` / `stats` → `cv` → `report`. Every artifact
//! embeds a reproducibility header; with fixed seeds, re-running a command
//! reproduces its output byte for byte.
//!
//! Exit codes: 0 success, 1 usage, 2 data/input error, 3 numeric error or
//! failed reproduction check.

use clap::Parser;

mod commands;
mod fixture;
mod pipeline;
mod render;
mod report;
mod stamp;
mod tables;

#[derive(Debug, Parser)]
#[command(
    name = "dstlab",
    version,
    about = "Forecast evaluation for hourly series: classical metrics, a warping measure \
             for timing errors, persistence and autoregressive baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: commands::Command,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code(&err)
        }
    }
}

/// Map an error chain to the exit-code contract. The library's own errors
/// carry their class (2 data/input, 3 numeric); reproduction mismatches are
/// numeric disagreements; anything else (I/O, serialization) counts as a
/// data error.
fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(cli) = cause.downcast_ref::<commands::CliError>() {
            return match cli {
                commands::CliError::ReproductionMismatch(_) => 3,
            };
        }
        if let Some(core) = cause.downcast_ref::<dstlab_core::Error>() {
            return i32::from(core.exit_class());
        }
    }
    2
}
