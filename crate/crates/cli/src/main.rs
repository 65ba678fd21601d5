//! `spantree` — seeded, reproducible experiments over the library:
//! graph generation, expansion checks, spanning-tree embeddings,
//! Maker-Breaker universality games, and Monte-Carlo checks of
//! concentration bounds.
//!
//! Exit codes are uniform across subcommands: 0 for success or a
//! pass/unknown verdict, 1 for a negative result, 2 for usage and I/O
//! errors.

mod commands;
mod experiment;
mod tailcheck;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "spantree", version, about = "expansion, tree universality, and games")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a graph or tree file with a provenance header.
    Gen(commands::GenArgs),
    /// Check the expansion predicate of a graph file.
    Check(commands::CheckArgs),
    /// Embed a spanning tree into a host graph.
    Embed(commands::EmbedArgs),
    /// Play universality games on a host graph.
    Game(commands::GameArgs),
    /// Run a configured embedding experiment to CSV + JSON.
    Experiment(commands::ExperimentArgs),
    /// Monte-Carlo check of a concentration bound.
    Tailcheck(commands::TailcheckArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Gen(args) => commands::run_gen(args),
        Cmd::Check(args) => commands::run_check(args),
        Cmd::Embed(args) => commands::run_embed(args),
        Cmd::Game(args) => commands::run_game(args),
        Cmd::Experiment(args) => experiment::run(args),
        Cmd::Tailcheck(args) => tailcheck::run(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
