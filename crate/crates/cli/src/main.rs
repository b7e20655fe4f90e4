//! Command-line front end for the variable-exponent parabolic solver.
//!
//! Four subcommands share one configuration format: `validate` inspects the
//! exponent and the structural assumptions, `solve` runs the forward flow and
//! its diagnostics, `rates` fits decay envelopes, and `adjoint` runs the
//! frozen-coefficient backward flow with its duality certificates. See the
//! repository README for the configuration grammar, artifact formats, and the
//! exit-code contract.

mod commands;
mod config;
mod report;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ptxlap", version, about = "Variable-exponent parabolic solver and verification harness")]
struct Cli {
    /// Run configuration file (required by every subcommand).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Artifact directory; overrides `output.dir` from the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed override for randomized data and probes.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Suppress progress notes on stderr. Errors and reports still print.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the configuration: exponent bounds, roughness estimate, decay hypothesis.
    Validate,
    /// Run the forward flow; write norms, steps, snapshots, and a summary.
    Solve,
    /// Fit norm decay against the predicted rate envelopes.
    Rates,
    /// Run the backward flow and its reciprocity and duality certificates.
    Adjoint,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => commands::EXIT_OK,
                _ => commands::EXIT_CONFIG,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let Some(config_path) = cli.config else {
        eprintln!("error: --config PATH is required");
        std::process::exit(commands::EXIT_CONFIG);
    };
    let overrides = config::Overrides { out_dir: cli.out, seed: cli.seed };
    let cfg = match config::RunConfig::load(&config_path, &overrides) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(commands::EXIT_CONFIG);
        }
    };

    let code = match cli.command {
        Command::Validate => commands::cmd_validate(&cfg, cli.quiet),
        Command::Solve => commands::cmd_solve(&cfg, cli.quiet),
        Command::Rates => commands::cmd_rates(&cfg, cli.quiet),
        Command::Adjoint => commands::cmd_adjoint(&cfg, cli.quiet),
    };
    std::process::exit(code);
}
