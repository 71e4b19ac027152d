//! `castkit` — pipeline CLI binding difference masking, mask
//! propagation, view selection, and matching-consistency evaluation into
//! file-based stages with JSON manifests at every external boundary.
//!
//! Exit codes: 0 success, 1 internal failure, 2 usage/contract error.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod manifest;
pub mod parallel;
pub mod staged;

use std::ffi::OsString;

use clap::{Parser, Subcommand};

use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "castkit",
    version,
    about = "View selection and mask propagation toolkit for 3D scene editing pipelines"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive the first-frame difference mask from an original/edited pair.
    Maskdiff(commands::maskdiff::MaskdiffArgs),
    /// Propagate a first-frame added-object mask to all frames.
    Propagate(commands::propagate::PropagateArgs),
    /// Score rendered/edited pairs and select reconstruction-friendly views.
    Select(commands::select::SelectArgs),
    /// Compare keypoint match counts for original vs edited view pairs.
    Match(commands::matching::MatchArgs),
    /// Merge stage manifests from a run directory into one report.
    Report(commands::report::ReportArgs),
}

pub fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Maskdiff(args) => commands::maskdiff::run(args),
        Command::Propagate(args) => commands::propagate::run(args),
        Command::Select(args) => commands::select::run(args),
        Command::Match(args) => commands::matching::run(args),
        Command::Report(args) => commands::report::run(args),
    }
}

/// Parses arguments, runs the requested stage, and maps errors onto the
/// documented exit codes.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return err.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.code()
        }
    }
}
