//! Command implementations behind the `roomsim` binary.
//!
//! Each subcommand is a plain function taking its parsed arguments and an
//! output stream, so the commands can be driven from tests without spawning
//! a process.

pub mod args;
pub mod bench;
pub mod commands;
pub mod error;
pub mod pipeline;

pub use args::{Cli, Command};
pub use error::{CliError, Result};

use std::io::Write;

pub fn run(cli: &Cli, out: &mut impl Write) -> Result<()> {
    match &cli.command {
        Command::Rir(a) => commands::rir::run(a, out),
        Command::Augment(a) => commands::augment::run(a, out),
        Command::Batch(a) => commands::batch::run(a, out),
        Command::Cost(a) => commands::cost::run(a, out),
        Command::Bench(a) => commands::bench::run(a, out),
    }
}
