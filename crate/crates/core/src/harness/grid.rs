//! Minimum tricluster sizes for significance under a uniform null, laid
//! out as a reference grid: one block of rows per `|J|`, one column per
//! context model and `|K|`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::g6;
use crate::significance::{
    log_binomial, min_observations, pattern_prob, AssumptionProfile, ContextModel, TailBound,
    UniformNull, VarDependency,
};
use crate::tensor::Pattern;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub n_obs: u64,
    pub n_vars: u64,
    pub n_ctx: u64,
    pub cardinalities: Vec<usize>,
    pub var_counts: Vec<usize>,
    pub ctx_counts: Vec<usize>,
    pub alpha: f64,
    pub bound: TailBound,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_obs: 1000,
            n_vars: 50,
            n_ctx: 50,
            cardinalities: vec![3, 5],
            var_counts: vec![2, 3, 4, 5],
            ctx_counts: vec![2, 3, 4, 5],
            alpha: 0.01,
            bound: TailBound::Exceeds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub cardinality: usize,
    pub n_vars: usize,
    pub n_ctx: usize,
    pub ctx_model: ContextModel,
    /// `ln p`, unclamped.
    pub log_p: f64,
    pub n_min: Option<u64>,
    /// With the `C(|Y|, |J|)` span factor.
    pub n_min_corrected: Option<u64>,
}

impl GridCell {
    pub fn p(&self) -> f64 {
        self.log_p.exp()
    }
}

const MODELS: [ContextModel; 2] = [ContextModel::Dependent, ContextModel::Temporal];

/// Evaluates every `(|L|, |J|, |K|)` under dependent and temporal contexts
/// with independent variables. Cells are ordered by `|J|`, `|L|`, model,
/// `|K|`.
pub fn min_obs_grid(spec: &GridSpec) -> Result<Vec<GridCell>> {
    let mut out = Vec::new();
    for &j in &spec.var_counts {
        for &l in &spec.cardinalities {
            for model in MODELS {
                for &k in &spec.ctx_counts {
                    if j == 0 || k == 0 || k as u64 > spec.n_ctx || j as u64 > spec.n_vars || l < 2
                    {
                        return Err(Error::InvalidArgument(format!(
                            "grid point |L|={l}, |J|={j}, |K|={k} is out of range"
                        )));
                    }
                    let null = UniformNull::identical(j, l, spec.n_ctx as usize)?;
                    let pattern =
                        Pattern::new((0..j).collect(), (0..k).collect(), vec![vec![0; k]; j])?;
                    let profile = AssumptionProfile::new(VarDependency::Independent, model);
                    let log_p = pattern_prob(&pattern, &profile, &null)?.log_prob;
                    let span = log_binomial(spec.n_vars, j as u64);
                    out.push(GridCell {
                        cardinality: l,
                        n_vars: j,
                        n_ctx: k,
                        ctx_model: model,
                        log_p,
                        n_min: min_observations(log_p, spec.n_obs, spec.alpha, 0.0, spec.bound)?,
                        n_min_corrected: min_observations(
                            log_p, spec.n_obs, spec.alpha, span, spec.bound,
                        )?,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// CSV with header `L,J,row,md_k<K>..,tc_k<K>..` and rows `n_min`,
/// `n_min_corrected` and `p_pattern` for each `(|J|, |L|)`; `-` marks
/// counts that cannot reach significance.
pub fn write_grid_csv<W: Write>(spec: &GridSpec, cells: &[GridCell], mut sink: W) -> Result<()> {
    let mut header = vec!["L".to_string(), "J".into(), "row".into()];
    for model in MODELS {
        header.extend(spec.ctx_counts.iter().map(|k| format!("{model}_k{k}")));
    }
    writeln!(sink, "{}", header.join(","))?;
    let count = |n: Option<u64>| n.map_or_else(|| "-".to_string(), |n| n.to_string());
    for row in cells.chunks(2 * spec.ctx_counts.len()) {
        let (l, j) = (row[0].cardinality, row[0].n_vars);
        let lines: [(&str, Box<dyn Fn(&GridCell) -> String>); 3] = [
            ("n_min", Box::new(|c: &GridCell| count(c.n_min))),
            (
                "n_min_corrected",
                Box::new(|c: &GridCell| count(c.n_min_corrected)),
            ),
            ("p_pattern", Box::new(|c: &GridCell| g6(c.p()))),
        ];
        for (name, render) in &lines {
            let values: Vec<String> = row.iter().map(render).collect();
            writeln!(sink, "{l},{j},{name},{}", values.join(","))?;
        }
    }
    Ok(())
}
