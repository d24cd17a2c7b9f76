use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::ValueEnum;
use serde::Serialize;

use trisig::estimation::{identically_distributed, GofReport};
use trisig::format::{g6, prob_from_ln};
use trisig::multiplicity::{benjamini_hochberg_tiered, Tier};
use trisig::significance::{
    assess, AssessConfig, AssumptionProfile, ContextModel, EmpiricalNull, SignificanceResult,
    SuccessCount, VarDependency,
};
use trisig::tensor::{read_tensor, read_triclusters};

use crate::{open, output, Outcome};

#[derive(Clone, Copy, ValueEnum)]
enum VarDep {
    Mi,
    Md,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ctx {
    Mi,
    Md,
    Tc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Span {
    /// Apply when the identically-distributed gate passes.
    Auto,
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Success {
    /// Observations of I matching the pattern on every cell.
    Matching,
    /// |I|.
    Size,
}

#[derive(clap::Args)]
pub struct Args {
    /// Tensor file (.json for tensor JSON, otherwise long-form CSV).
    #[arg(long)]
    tensor: PathBuf,
    /// Tricluster JSON; a planting manifest also works.
    #[arg(long)]
    triclusters: PathBuf,
    /// Dependency among variables.
    #[arg(long, value_enum, default_value = "mi")]
    var_dep: VarDep,
    /// Context model.
    #[arg(long = "ctx", value_enum, default_value = "md")]
    ctx: Ctx,
    /// Level of the identically-distributed gate and of the nominal tier.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// False discovery rate for Benjamini-Hochberg.
    #[arg(long, default_value_t = 0.05)]
    fdr: f64,
    /// Multiply p-values by C(|Y|, |J|).
    #[arg(long, value_enum, default_value = "auto")]
    span_correction: Span,
    /// Additive pseudo-count for every frequency.
    #[arg(long, default_value_t = 0.0)]
    smoothing: f64,
    /// Binomial successes per tricluster.
    #[arg(long, value_enum, default_value = "matching")]
    success: Success,
    /// Keep single-category variables in J.
    #[arg(long)]
    keep_degenerate: bool,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write the fitted estimation tables as JSON.
    #[arg(long)]
    dump_tables: Option<PathBuf>,
}

#[derive(Serialize)]
struct Record {
    id: usize,
    #[serde(rename = "nI")]
    n_i: usize,
    #[serde(rename = "nJ")]
    n_j: usize,
    #[serde(rename = "nK")]
    n_k: usize,
    successes: Option<u64>,
    log10_p_pattern: Option<String>,
    p_value: Option<String>,
    p_value_span: Option<String>,
    q_value: Option<String>,
    tier: Option<Tier>,
    assessable: Option<bool>,
    warnings: Vec<String>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SpanVerdict {
    mode: &'static str,
    applied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    gate: Option<GofReport>,
}

#[derive(Serialize)]
struct Report<'a> {
    profile: &'a AssumptionProfile,
    fdr: f64,
    span_correction: &'a SpanVerdict,
    bh_threshold: Option<String>,
    records: &'a [Record],
}

#[derive(Serialize)]
struct Tables<'a> {
    per_context: Option<&'a trisig::estimation::MarginalTable>,
    pooled: &'a trisig::estimation::MarginalTable,
    transitions: Option<&'a trisig::estimation::TransitionTable>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn run(args: Args) -> anyhow::Result<Outcome> {
    if !(args.fdr > 0.0 && args.fdr < 1.0) {
        bail!("--fdr must lie in (0, 1)");
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        bail!("--alpha must lie in (0, 1)");
    }
    let tensor =
        read_tensor(&args.tensor).with_context(|| format!("reading {}", args.tensor.display()))?;
    let triclusters = read_triclusters(open(&args.triclusters)?, &tensor)
        .with_context(|| format!("reading {}", args.triclusters.display()))?;

    let verdict = match args.span_correction {
        Span::On => SpanVerdict {
            mode: "on",
            applied: true,
            gate: None,
        },
        Span::Off => SpanVerdict {
            mode: "off",
            applied: false,
            gate: None,
        },
        Span::Auto => match identically_distributed(&tensor, args.alpha) {
            Ok(report) => SpanVerdict {
                mode: "auto",
                applied: report.identically_distributed,
                gate: Some(report),
            },
            // fewer than two usable variables: C(|Y|, |J|) is 1 anyway
            Err(_) => SpanVerdict {
                mode: "auto",
                applied: false,
                gate: None,
            },
        },
    };

    let profile = AssumptionProfile {
        var_dep: match args.var_dep {
            VarDep::Mi => VarDependency::Independent,
            VarDep::Md => VarDependency::Dependent,
        },
        ctx_model: match args.ctx {
            Ctx::Mi => ContextModel::Independent,
            Ctx::Md => ContextModel::Dependent,
            Ctx::Tc => ContextModel::Temporal,
        },
        identically_distributed: verdict.applied,
        smoothing: args.smoothing,
    };
    let config = AssessConfig {
        profile,
        success: match args.success {
            Success::Matching => SuccessCount::Matching,
            Success::Size => SuccessCount::Size,
        },
        exclude_degenerate: !args.keep_degenerate,
    };

    if let Some(path) = &args.dump_tables {
        let null = EmpiricalNull::fit(&tensor, &profile)?;
        let tables = Tables {
            per_context: null.per_context(),
            pooled: null.pooled(),
            transitions: null.transitions(),
        };
        let mut sink = output(Some(path))?;
        serde_json::to_writer_pretty(&mut sink, &tables)?;
        sink.flush()?;
    }

    let results = assess(&tensor, &triclusters, &config)?;
    let ok: Vec<&SignificanceResult> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let log_p: Vec<f64> = ok.iter().map(|r| r.log_pvalue()).collect();
    let adjusted = benjamini_hochberg_tiered(&log_p, args.fdr, args.alpha)?;
    let mut entries = adjusted.entries.iter();

    let records: Vec<Record> = results
        .iter()
        .zip(&triclusters)
        .enumerate()
        .map(|(id, (res, tc))| {
            let (n_i, n_j, n_k) = tc.shape();
            match res {
                Ok(r) => {
                    let e = entries.next().expect("one entry per assessed tricluster");
                    Record {
                        id,
                        n_i,
                        n_j: r.n_vars,
                        n_k,
                        successes: Some(r.successes),
                        log10_p_pattern: Some(g6(r.log_p_pattern / std::f64::consts::LN_10)),
                        p_value: Some(prob_from_ln(r.log_pvalue_raw)),
                        p_value_span: Some(prob_from_ln(r.log_pvalue_span)),
                        q_value: Some(prob_from_ln(e.log_q_value)),
                        tier: Some(e.tier),
                        assessable: Some(r.assessable),
                        warnings: r.warnings.iter().map(ToString::to_string).collect(),
                        error: None,
                    }
                }
                Err(err) => Record {
                    id,
                    n_i,
                    n_j,
                    n_k,
                    successes: None,
                    log10_p_pattern: None,
                    p_value: None,
                    p_value_span: None,
                    q_value: None,
                    tier: None,
                    assessable: None,
                    warnings: Vec::new(),
                    error: Some(err.to_string()),
                },
            }
        })
        .collect();

    let mut sink = output(args.out.as_deref())?;
    match args.format {
        Format::Json => {
            let report = Report {
                profile: &profile,
                fdr: args.fdr,
                span_correction: &verdict,
                bh_threshold: adjusted.log_bh_threshold.map(prob_from_ln),
                records: &records,
            };
            serde_json::to_writer_pretty(&mut sink, &report)?;
            writeln!(sink)?;
        }
        Format::Csv => {
            if let Some(gate) = &verdict.gate {
                writeln!(
                    sink,
                    "# span_correction=auto identically_distributed={} pairs={} rejected={} skipped={} alpha={}",
                    gate.identically_distributed,
                    gate.pairs.len(),
                    gate.pairs.iter().filter(|p| p.rejected).count(),
                    gate.skipped().count(),
                    g6(gate.alpha)
                )?;
            } else if verdict.mode == "auto" {
                writeln!(
                    sink,
                    "# span_correction=auto identically_distributed=untested"
                )?;
            }
            writeln!(
                sink,
                "id,nI,nJ,nK,log10_p_pattern,p_value,p_value_span,q_value,tier,assessable,error"
            )?;
            for r in &records {
                let opt = |s: &Option<String>| s.clone().unwrap_or_default();
                writeln!(
                    sink,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.id,
                    r.n_i,
                    r.n_j,
                    r.n_k,
                    opt(&r.log10_p_pattern),
                    opt(&r.p_value),
                    opt(&r.p_value_span),
                    opt(&r.q_value),
                    r.tier.map(Tier::label).unwrap_or_default(),
                    r.assessable.map(|a| a.to_string()).unwrap_or_default(),
                    csv_field(&opt(&r.error)),
                )?;
            }
        }
    }
    sink.flush()?;
    Ok(if records.iter().any(|r| r.error.is_some()) {
        Outcome::Partial
    } else {
        Outcome::Done
    })
}
