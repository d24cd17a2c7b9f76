use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::ValueEnum;

use trisig::synthgen::{generate, Background, GenSpec, SizeRange};
use trisig::tensor::write_tensor;

use crate::{open, output, Outcome};

#[derive(Clone, Copy, ValueEnum)]
enum BackgroundKind {
    Uniform,
    Gaussian,
}

#[derive(clap::Args)]
pub struct Args {
    /// Generator settings as JSON; flags given here override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    obs: Option<usize>,
    #[arg(long)]
    vars: Option<usize>,
    #[arg(long)]
    ctxs: Option<usize>,
    /// Categories per variable.
    #[arg(long)]
    cardinality: Option<usize>,
    /// Number of planted triclusters.
    #[arg(long)]
    planted: Option<usize>,
    #[arg(long, value_enum)]
    background: Option<BackgroundKind>,
    /// Mean of the Gaussian background.
    #[arg(long, requires = "sigma")]
    mu: Option<f64>,
    /// Standard deviation of the Gaussian background.
    #[arg(long)]
    sigma: Option<f64>,
    /// Planted |I| as `lo-hi`.
    #[arg(long, value_parser = parse_range)]
    obs_range: Option<SizeRange>,
    /// Planted |J| as `lo-hi`.
    #[arg(long, value_parser = parse_range)]
    var_range: Option<SizeRange>,
    /// Planted |K| as `lo-hi`.
    #[arg(long, value_parser = parse_range)]
    ctx_range: Option<SizeRange>,
    /// Contiguous planted contexts on a temporal axis.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    contiguous: Option<bool>,
    #[arg(long)]
    seed: Option<u64>,
    /// Tensor output; `.json` selects tensor JSON, anything else long-form CSV.
    #[arg(long)]
    out_tensor: PathBuf,
    /// Planting manifest output; stdout when omitted.
    #[arg(long)]
    out_manifest: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<SizeRange, String> {
    let (lo, hi) = s.split_once('-').unwrap_or((s, s));
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("`{x}`: {e}"));
    Ok(SizeRange(parse(lo)?, parse(hi)?))
}

pub fn run(args: Args) -> anyhow::Result<Outcome> {
    let mut spec: GenSpec = match &args.spec {
        Some(path) => serde_json::from_reader(open(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => GenSpec::default(),
    };
    macro_rules! set {
        ($($field:ident = $arg:ident),*) => {$(
            if let Some(v) = args.$arg { spec.$field = v; }
        )*};
    }
    set!(
        n_obs = obs,
        n_vars = vars,
        n_ctx = ctxs,
        cardinality = cardinality,
        n_planted = planted,
        obs_range = obs_range,
        var_range = var_range,
        ctx_range = ctx_range,
        contiguous = contiguous,
        seed = seed
    );
    match (args.background, args.mu.zip(args.sigma)) {
        (Some(BackgroundKind::Uniform), None) => spec.background = Background::Uniform,
        (Some(BackgroundKind::Uniform), Some(_)) => {
            bail!("--mu/--sigma apply to the gaussian background only")
        }
        (Some(BackgroundKind::Gaussian) | None, Some((mu, sigma))) => {
            spec.background = Background::Gaussian { mu, sigma }
        }
        (Some(BackgroundKind::Gaussian), None) => {
            if !matches!(spec.background, Background::Gaussian { .. }) {
                spec.background = Background::Gaussian {
                    mu: 0.0,
                    sigma: 1.0,
                };
            }
        }
        (None, None) => {}
    }

    let generated = generate(&spec)?;
    write_tensor(&generated.tensor, &args.out_tensor)
        .with_context(|| format!("writing {}", args.out_tensor.display()))?;
    let mut sink = output(args.out_manifest.as_deref())?;
    generated.manifest.write(&mut sink)?;
    sink.flush()?;
    Ok(Outcome::Done)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2-4").unwrap(), SizeRange(2, 4));
        assert_eq!(parse_range("7").unwrap(), SizeRange(7, 7));
        assert!(parse_range("a-4").is_err());
    }
}
