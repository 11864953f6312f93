//! The `optpred` command-line tool.
//!
//! Every subcommand writes CSV with a `# key=value` preamble recording the
//! resolved configuration, so a file carries what is needed to regenerate it.
//! Worker count and output paths are deliberately left out: neither affects
//! the bytes written.

mod args;
mod commands;
mod config;
mod plot;

use std::ffi::OsString;

use clap::Parser;

pub use args::{Cli, Command};

/// Exit code for argument and configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for failures after the arguments were accepted.
pub const EXIT_RUNTIME: i32 = 1;

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::merge_config_file(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are printed to stdout and succeed.
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_RUNTIME
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    pool.install(|| commands::dispatch(&cli.command))
}
