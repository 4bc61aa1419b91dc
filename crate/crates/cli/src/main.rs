//! `ylie`: enhance, train, bench, analyze, and inspect commands for the
//! YUV-space low-light enhancement engine.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

mod analyze;
mod bench;
mod enhance;
mod inspect;
mod train;
mod util;

#[derive(Parser)]
#[command(name = "ylie", version, about = "YUV-space low-light image enhancement")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enhance one image or a directory of images with a trained model
    Enhance(enhance::Args),
    /// Train on a dataset directory holding low/ and high/ image pairs
    Train(train::Args),
    /// Measure single-image forward latency and report parameter/FLOP budgets
    Bench(bench::Args),
    /// Frequency analysis: plane spectra, spectrum swapping, feature spectra
    Analyze(analyze::Args),
    /// Print the config, every tensor, parameter totals, and the FLOPs table
    Inspect(inspect::Args),
}

fn main() {
    // Die quietly when the reader closes the pipe (`ylie inspect | head`)
    // instead of panicking mid-print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; anything else is usage.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => util::exit::OK,
                _ => util::exit::USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match cli.cmd {
        Cmd::Enhance(a) => enhance::run(a),
        Cmd::Train(a) => train::run(a),
        Cmd::Bench(a) => bench::run(a),
        Cmd::Analyze(a) => analyze::run(a),
        Cmd::Inspect(a) => inspect::run(a),
    };
    std::process::exit(code);
}
