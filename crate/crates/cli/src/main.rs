//! `evenodds` — train, sweep, grid-search, and evaluate fairness-constrained
//! classifiers from the command line.

mod args;
mod commands;
mod pipeline;
mod records;

use clap::Parser;
use evenodds::error::Error;

use args::{Cli, Command};

/// Exit-status taxonomy: 0 ok, 2 usage, 3 not applicable, 4 file/parse,
/// 5 numeric.
fn exit_code(err: &Error) -> i32 {
    match err.category() {
        "usage" => 2,
        "not-applicable" => 3,
        "parse" => 4,
        _ => 5,
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(args) => commands::train(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Grid(args) => commands::grid(args),
        Command::Evaluate(args) => commands::evaluate(args),
    };
    if let Err(err) = result {
        eprintln!("error[{}]: {}", err.category(), err);
        std::process::exit(exit_code(&err));
    }
}
