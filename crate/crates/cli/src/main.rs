//! `nbqc`: construct, label, analyse and simulate nonbinary QC-LDPC codes.
//!
//! Exit status: 0 on success, 1 on errors, 2 on usage errors, 3 when a
//! simulation point hit `--max-frames` before `--target-errors`, 4 when a
//! replay produced different outputs.

mod commands;
mod grid;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{run_job, Bounds, ConstructBase, Label, Replay, Simulate, Spectrum};

#[derive(Parser, Debug)]
#[command(name = "nbqc", version, about = "Nonbinary quasi-cyclic LDPC code toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Anneal an almost regular base matrix with a Hamiltonian parity part.
    ConstructBase(ConstructBase),
    /// Choose circulant degrees and field coefficients for a base matrix.
    Label(Label),
    /// Average binary weight spectrum of the almost regular ensemble.
    Spectrum(Spectrum),
    /// Shannon lower and tangential-sphere upper bounds on ML frame error rate.
    Bounds(Bounds),
    /// BP frame error rate over BPSK-AWGN by Monte Carlo simulation.
    Simulate(Simulate),
    /// Re-run a manifest and check that the outputs are byte-identical.
    Replay(Replay),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::ConstructBase(a) => run_job(a).map(|_| 0),
        Command::Label(a) => run_job(a).map(|_| 0),
        Command::Spectrum(a) => run_job(a).map(|_| 0),
        Command::Bounds(a) => run_job(a).map(|_| 0),
        Command::Simulate(a) => run_job(a).map(|s| if s.truncated { 3 } else { 0 }),
        Command::Replay(a) => a.execute().map(|same| if same { 0 } else { 4 }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
