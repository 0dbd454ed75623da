//! `momentfit`: moment generation, fitting, assessment and perturbation.
//!
//! Exit codes: 0 success, 2 input error, 3 solver failure, 4 golden-check
//! mismatch (`assess --check`).

mod commands;
mod config;

use clap::Parser;

use crate::config::{Cli, Command, RunConfig};

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Moments(a) => commands::run(&RunConfig::Moments(a)),
        Command::Fit(a) => commands::run(&RunConfig::Fit(a)),
        Command::Assess(a) => commands::run(&RunConfig::Assess(a)),
        Command::Perturb(a) => commands::run(&RunConfig::Perturb(a)),
        Command::Rerun(a) => commands::rerun(&a.file, a.output),
    };
    if let Err(e) = result {
        eprintln!("momentfit: {e}");
        std::process::exit(e.exit_code());
    }
}
