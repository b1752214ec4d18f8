//! `chaosgen` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure,
//! 3 verification failure.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

const EXIT_VERIFICATION: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Verify(a) => commands::verify(a),
        Command::Henon(a) => commands::henon(a),
        Command::Gbm(a) => commands::gbm(a),
        Command::Test(a) => commands::test(a),
    };
    match result {
        Ok(out) => {
            output::print(&out.doc);
            if out.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: verification failed");
                ExitCode::from(EXIT_VERIFICATION)
            }
        }
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
