//! `trisig`: significance of triclusters in three-way data.

mod assess;
mod generate;
mod mintable;
mod preprocess;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit status for unreadable or invalid input.
const EXIT_INPUT: u8 = 2;
/// Exit status when some triclusters could not be assessed.
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "trisig",
    version,
    about = "Statistical significance of triclusters in three-way tensor data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score triclusters and control the false discovery rate.
    Assess(assess::Args),
    /// Generate a synthetic tensor with planted triclusters.
    Generate(generate::Args),
    /// Minimum tricluster sizes for significance under a uniform null.
    Mintable(mintable::Args),
    /// Piecewise aggregate approximation and discretization.
    Preprocess(preprocess::Args),
}

/// What a command reports back to `main`.
pub enum Outcome {
    Done,
    /// Output was written but some records carry errors.
    Partial,
}

/// Opens `path`, or stdout when absent or `-`.
pub fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p != Path::new("-") => Box::new(BufWriter::new(File::create(p)?)),
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn open(path: &PathBuf) -> anyhow::Result<File> {
    File::open(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("TRISIG_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        anyhow::anyhow!("TRISIG_THREADS must be a non-negative integer, got `{raw}`")
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Assess(args) => assess::run(args),
        Command::Generate(args) => generate::run(args),
        Command::Mintable(args) => mintable::run(args),
        Command::Preprocess(args) => preprocess::run(args),
    });
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => ExitCode::from(EXIT_PARTIAL),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
