use serde::{Deserialize, Serialize};

use super::{Category, Tensor3, Value, VariableDomain};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinStrategy {
    EqualWidth,
    EqualFrequency,
}

impl std::str::FromStr for BinStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-width" | "width" => Ok(BinStrategy::EqualWidth),
            "equal-frequency" | "frequency" | "quantile" => Ok(BinStrategy::EqualFrequency),
            other => Err(Error::InvalidArgument(format!(
                "unknown bin strategy `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Discretized {
    pub tensor: Tensor3,
    /// Variables that were constant (or empty) and collapsed to one category.
    pub degenerate: Vec<usize>,
}

/// Bins every real-valued variable into `bins` ordinal categories. Edges are
/// computed per variable over all `(i, k)` values pooled across contexts.
/// Ordinal variables pass through unchanged.
pub fn discretize(t: &Tensor3, bins: usize, strategy: BinStrategy) -> Result<Discretized> {
    if bins < 2 {
        return Err(Error::InvalidArgument(
            "at least 2 bins are required".into(),
        ));
    }
    let mut degenerate = Vec::new();
    let mut edges_per_var: Vec<Option<Vec<f64>>> = Vec::with_capacity(t.n_vars());
    let mut domains = Vec::with_capacity(t.n_vars());
    for j in 0..t.n_vars() {
        match t.domain(j) {
            VariableDomain::Real => {
                let mut values = t.real_values(j)?;
                values.sort_by(f64::total_cmp);
                let (lo, hi) = match (values.first(), values.last()) {
                    (Some(&lo), Some(&hi)) if lo < hi => (lo, hi),
                    _ => {
                        degenerate.push(j);
                        edges_per_var.push(Some(Vec::new()));
                        domains.push(VariableDomain::Ordinal {
                            categories: vec!["0".into()],
                            edges: Some(Vec::new()),
                        });
                        continue;
                    }
                };
                let edges = match strategy {
                    BinStrategy::EqualWidth => {
                        let width = (hi - lo) / bins as f64;
                        (1..bins).map(|b| lo + width * b as f64).collect::<Vec<_>>()
                    }
                    BinStrategy::EqualFrequency => {
                        let n = values.len();
                        (1..bins)
                            .map(|b| {
                                let pos = (b * n / bins).clamp(1, n - 1);
                                0.5 * (values[pos - 1] + values[pos])
                            })
                            .collect()
                    }
                };
                domains.push(VariableDomain::Ordinal {
                    categories: (0..bins).map(|c| c.to_string()).collect(),
                    edges: Some(edges.clone()),
                });
                edges_per_var.push(Some(edges));
            }
            d => {
                domains.push(d.clone());
                edges_per_var.push(None);
            }
        }
    }

    let tensor = t.with_columns_replaced(t.ctxs.clone(), domains, |b| {
        for j in 0..t.n_vars() {
            for i in 0..t.n_obs() {
                for k in 0..t.n_ctx() {
                    let v = match (t.get(i, j, k), &edges_per_var[j]) {
                        (Some(Value::Real(x)), Some(edges)) => Value::Cat(bin_of(x, edges)),
                        (Some(v), _) => v,
                        (None, _) => continue,
                    };
                    b.set(i, j, k, v)?;
                }
            }
        }
        Ok(())
    })?;
    Ok(Discretized { tensor, degenerate })
}

/// Number of edges `<= x`; values on an edge fall in the upper bin.
fn bin_of(x: f64, edges: &[f64]) -> Category {
    edges.partition_point(|&e| e <= x) as Category
}

#[derive(Debug, Clone)]
pub struct PaaOutput {
    pub tensor: Tensor3,
    /// `(i, j, segment)` cells whose segment held only missing values.
    pub empty_segments: Vec<(usize, usize, usize)>,
}

/// Piecewise Aggregate Approximation along the (temporal) context axis.
/// Segment `s` covers contexts `[floor(s*p/m), floor((s+1)*p/m))`.
pub fn paa(t: &Tensor3, target_ctx: usize) -> Result<PaaOutput> {
    if !t.is_temporal() {
        return Err(Error::InvalidArgument(
            "PAA needs a temporal context axis".into(),
        ));
    }
    if target_ctx == 0 || target_ctx > t.n_ctx() {
        return Err(Error::InvalidArgument(format!(
            "target context count {target_ctx} must lie in 1..={}",
            t.n_ctx()
        )));
    }
    if let Some(j) = (0..t.n_vars()).find(|&j| t.domain(j).is_ordinal()) {
        return Err(Error::NotReal(j));
    }
    let p = t.n_ctx();
    let bounds: Vec<(usize, usize)> = (0..target_ctx)
        .map(|s| (s * p / target_ctx, (s + 1) * p / target_ctx))
        .collect();
    let ctxs = bounds
        .iter()
        .map(|&(a, b)| {
            if b - a == 1 {
                t.ctxs[a].clone()
            } else {
                format!("{}..{}", t.ctxs[a], t.ctxs[b - 1])
            }
        })
        .collect();
    let mut empty_segments = Vec::new();
    let tensor = t.with_columns_replaced(ctxs, t.domains.clone(), |b| {
        for i in 0..t.n_obs() {
            for j in 0..t.n_vars() {
                for (s, &(lo, hi)) in bounds.iter().enumerate() {
                    let (sum, n) = (lo..hi)
                        .filter_map(|k| t.real(i, j, k))
                        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
                    if n == 0 {
                        empty_segments.push((i, j, s));
                    } else {
                        b.set(i, j, s, Value::Real(sum / n as f64))?;
                    }
                }
            }
        }
        Ok(())
    })?;
    Ok(PaaOutput {
        tensor,
        empty_segments,
    })
}
