use std::path::PathBuf;

use anyhow::bail;
use clap::ValueEnum;

use trisig::harness::{min_obs_grid, write_grid_csv, GridSpec};
use trisig::significance::TailBound;

use crate::{output, Outcome};

#[derive(Clone, Copy, ValueEnum)]
enum Bound {
    /// Smallest n with P(X >= n) <= alpha.
    AtLeast,
    /// Smallest n with P(X > n) <= alpha.
    Exceeds,
}

#[derive(clap::Args)]
pub struct Args {
    #[arg(long, default_value_t = 1000)]
    obs: u64,
    #[arg(long, default_value_t = 50)]
    vars: u64,
    #[arg(long, default_value_t = 50)]
    ctxs: u64,
    /// Category counts.
    #[arg(short = 'L', long = "L", value_delimiter = ',', default_value = "3,5")]
    cardinalities: Vec<usize>,
    /// Tricluster variable counts.
    #[arg(
        short = 'J',
        long = "J",
        value_delimiter = ',',
        default_value = "2,3,4,5"
    )]
    var_counts: Vec<usize>,
    /// Tricluster context counts.
    #[arg(
        short = 'K',
        long = "K",
        value_delimiter = ',',
        default_value = "2,3,4,5"
    )]
    ctx_counts: Vec<usize>,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "exceeds")]
    bound: Bound,
    /// CSV output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: Args) -> anyhow::Result<Outcome> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        bail!("--alpha must lie in (0, 1)");
    }
    let spec = GridSpec {
        n_obs: args.obs,
        n_vars: args.vars,
        n_ctx: args.ctxs,
        cardinalities: args.cardinalities,
        var_counts: args.var_counts,
        ctx_counts: args.ctx_counts,
        alpha: args.alpha,
        bound: match args.bound {
            Bound::AtLeast => TailBound::AtLeast,
            Bound::Exceeds => TailBound::Exceeds,
        },
    };
    let cells = min_obs_grid(&spec)?;
    let mut sink = output(args.out.as_deref())?;
    write_grid_csv(&spec, &cells, &mut sink)?;
    sink.flush()?;
    Ok(Outcome::Done)
}
