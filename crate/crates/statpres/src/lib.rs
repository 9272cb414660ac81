//! Command-line front end, file formats and configuration for `statpres-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

use std::ffi::OsString;

use clap::Parser;

use cli::{Cli, Command, Settings};
use error::{Exit, Result};

fn dispatch(cmd: &Command) -> Result<Exit> {
    let s = Settings::resolve(cmd.opts())?;
    match cmd {
        Command::Analyze(_) => commands::analyze(&s),
        Command::Certify(_) => commands::certify(&s),
        Command::Simulate(_) => commands::simulate(&s),
        Command::Sweep(_) => commands::sweep(&s),
        Command::Catalog(_) => commands::catalog(&s),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code as i32,
        Err(e) => {
            eprintln!("statpres {}: {e}", cli.command.name());
            e.exit() as i32
        }
    }
}
