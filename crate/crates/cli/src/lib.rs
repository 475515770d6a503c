//! Command-line front end: mask generation, synthetic scenes, online and
//! batch reconstruction, and image metrics.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error,
//! 3 numerical failure.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;

pub use args::Cli;
pub use error::{CliError, CliResult};
pub use manifest::Manifest;

use args::Command;

/// Runs one subcommand, returning what it prints on success.
pub fn run(cli: &Cli) -> CliResult<Option<String>> {
    match &cli.command {
        Command::Masks(a) => commands::cmd_masks(a).map(|_| None),
        Command::Scene(a) => commands::cmd_scene(a).map(|_| None),
        Command::Reconstruct(a) => commands::cmd_reconstruct(a).map(Some),
        Command::Batch(a) => commands::cmd_batch(a).map(Some),
        Command::Metrics(a) => commands::cmd_metrics(a).map(Some),
    }
}
