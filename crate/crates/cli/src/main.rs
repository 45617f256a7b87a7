//! `maxfilter`: max filter embeddings, quotient distances, stability probes
//! and nearest-neighbor benchmarks from the command line.
//!
//! Exit codes: 0 success, 2 input error, 3 dimension or configuration
//! inconsistency, 4 non-finite or degenerate numerics.

mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use args::Configurable;
use maxfilter_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "maxfilter", version, about = "Group-invariant max filter embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    Bank(args::BankArgs),
    Gen(args::GenArgs),
    Embed(args::EmbedArgs),
    Dist(args::DistArgs),
    Stability(args::StabilityArgs),
    Ann(args::AnnArgs),
    Figure3(args::Figure3Args),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e.root() {
                CoreError::Parse(_) | CoreError::Empty(_) => 2,
                CoreError::DimensionMismatch { .. }
                | CoreError::InvalidConfig(_)
                | CoreError::InvalidGroup(_)
                | CoreError::TrivialAction(_) => 3,
                CoreError::NonFinite(_) | CoreError::Degenerate(_) => 4,
                CoreError::AtLine { .. } => unreachable!("root strips line context"),
            };
        }
    }
    2
}

fn run<A, F>(args: A, f: F) -> Result<()>
where
    A: Configurable,
    F: FnOnce(&mut A) -> Result<commands::CommandOutput>,
{
    let mut args = args.with_config()?;
    let out = f(&mut args)?;
    match args.run_opts().out.clone() {
        Some(dir) => {
            let mut files = out.files;
            files.add_json("config.json", &args);
            for p in files.commit(&dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
        None => {
            let bytes = out.files.get(out.primary).expect("primary output is staged");
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bank(a) => run(a, commands::bank),
        Command::Gen(a) => run(a, commands::gen),
        Command::Embed(a) => run(a, commands::embed),
        Command::Dist(a) => run(a, commands::dist),
        Command::Stability(a) => run(a, commands::stability),
        Command::Ann(a) => run(a, commands::ann),
        Command::Figure3(a) => run(a, commands::figure3),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
