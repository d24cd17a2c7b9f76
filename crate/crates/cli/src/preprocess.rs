use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::ValueEnum;
use serde::Serialize;

use trisig::tensor::{discretize, paa, read_tensor, write_tensor, BinStrategy};
use trisig::VariableDomain;

use crate::{output, Outcome};

#[derive(Clone, Copy, ValueEnum)]
enum Strategy {
    EqualWidth,
    EqualFrequency,
}

#[derive(clap::Args)]
pub struct Args {
    #[arg(long)]
    tensor: PathBuf,
    /// Bin real variables into this many ordinal categories.
    #[arg(long)]
    discretize: Option<usize>,
    #[arg(long, value_enum, default_value = "equal-frequency")]
    strategy: Strategy,
    /// Average the context axis down to this many segments first; skipped
    /// when the axis is not temporal.
    #[arg(long)]
    paa: Option<usize>,
    /// Tensor output; `.json` selects tensor JSON, anything else long-form CSV.
    #[arg(long)]
    out: PathBuf,
    /// Bin edges and preprocessing notes; defaults to `<out>.edges.json`.
    #[arg(long)]
    edges: Option<PathBuf>,
}

#[derive(Serialize)]
struct VarEdges<'a> {
    variable: &'a str,
    edges: Option<&'a [f64]>,
    degenerate: bool,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    paa_applied: bool,
    variables: Vec<VarEdges<'a>>,
    /// `[i, j, segment]` cells with no value to average.
    empty_segments: &'a [(usize, usize, usize)],
}

pub fn run(args: Args) -> anyhow::Result<Outcome> {
    if args.discretize.is_none() && args.paa.is_none() {
        bail!("nothing to do: pass --discretize and/or --paa");
    }
    let mut tensor =
        read_tensor(&args.tensor).with_context(|| format!("reading {}", args.tensor.display()))?;
    let mut empty_segments = Vec::new();
    let mut paa_applied = false;
    match args.paa {
        Some(m) if tensor.is_temporal() => {
            let out = paa(&tensor, m)?;
            tensor = out.tensor;
            empty_segments = out.empty_segments;
            paa_applied = true;
        }
        Some(_) => eprintln!("warning: contexts are not temporal, skipping PAA"),
        None => {}
    }
    let mut degenerate = Vec::new();
    if let Some(bins) = args.discretize {
        let strategy = match args.strategy {
            Strategy::EqualWidth => BinStrategy::EqualWidth,
            Strategy::EqualFrequency => BinStrategy::EqualFrequency,
        };
        let out = discretize(&tensor, bins, strategy)?;
        tensor = out.tensor;
        degenerate = out.degenerate;
    }
    write_tensor(&tensor, &args.out).with_context(|| format!("writing {}", args.out.display()))?;

    let sidecar = Sidecar {
        paa_applied,
        variables: tensor
            .var_labels()
            .iter()
            .zip(tensor.domains())
            .enumerate()
            .map(|(j, (label, domain))| VarEdges {
                variable: label,
                edges: match domain {
                    VariableDomain::Ordinal { edges, .. } => edges.as_deref(),
                    VariableDomain::Real => None,
                },
                degenerate: degenerate.contains(&j),
            })
            .collect(),
        empty_segments: &empty_segments,
    };
    let path = args.edges.unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".edges.json");
        p.into()
    });
    let mut sink = output(Some(&path))?;
    serde_json::to_writer_pretty(&mut sink, &sidecar)?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(Outcome::Done)
}
