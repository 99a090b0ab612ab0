//! Batch front-end over the `ufh` library: one subcommand per pipeline,
//! driven by a JSON config with flag overrides, emitting canonical JSON and
//! commented CSV. Exit codes: 0 success, 1 usage/config error, 2 a
//! verification property failed (the written report carries the witness).

pub mod cmds;
pub mod config;
pub mod emit;
pub mod registry;

use clap::error::ErrorKind;
use clap::Parser;
use std::ffi::OsString;

pub fn run(argv: &[OsString]) -> i32 {
    let cli = match config::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 1;
        }
    };
    let resolved = match config::resolve(&cli) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    match cmds::dispatch(&resolved) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
