//! `vcnn` binary entry point.
//!
//! Every failure path prints a machine-readable JSON error object to stderr
//! and exits nonzero; successful runs print the output directory to stdout.

mod args;
mod commands;
mod config;
mod error;
mod output;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                fail(2, &CliError::usage(e.to_string()));
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    let result = match cli.command {
        Command::Generate(a) => commands::cmd_generate(a),
        Command::Train(a) => commands::cmd_train(a),
        Command::Uncertainty(a) => commands::cmd_uncertainty(a),
        Command::Eval(a) => commands::cmd_eval(a),
        Command::Demo(a) => commands::cmd_demo(a),
    };
    if let Err(e) = result {
        fail(1, &e);
    }
}

fn fail(code: i32, e: &CliError) -> ! {
    let payload = serde_json::json!({ "error": e });
    eprintln!("{payload}");
    std::process::exit(code);
}
