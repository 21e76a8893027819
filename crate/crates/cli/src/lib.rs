//! Library side of the `bellgarch` command-line tool.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;
pub mod manifest;
pub mod output;

pub use error::{CliError, CliResult};

use args::{Cli, Command};

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Compare(a) => commands::compare(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::McStudy(a) => commands::mc_study(a),
        Command::MeanFormula(a) => commands::mean_formula(a),
        Command::Rerun(a) => manifest::rerun(a),
    }
}
