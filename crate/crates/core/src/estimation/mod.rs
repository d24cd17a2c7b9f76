//! Empirical probability estimates over an ordinal tensor.
//!
//! Every estimate is a [`Frequency`]: a hit count over a non-missing support,
//! with optional additive smoothing already folded into both terms. Missing
//! cells never contribute to either.

mod gof;

pub use gof::{
    chi_square_two_sample, identically_distributed, ks_two_sample, ChiSquareOutcome, GofMethod,
    GofReport, KsOutcome, PairTest,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::{Category, Tensor3};

/// A probability as `hits / support`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frequency {
    pub hits: f64,
    pub support: f64,
}

impl Frequency {
    fn smoothed(hits: u64, support: u64, smoothing: f64, outcomes: f64) -> Self {
        Self {
            hits: hits as f64 + smoothing,
            support: support as f64 + smoothing * outcomes,
        }
    }

    pub fn prob(&self) -> f64 {
        self.hits / self.support
    }

    pub fn ln(&self) -> f64 {
        self.hits.ln() - self.support.ln()
    }
}

/// Where a probability is estimated: within a single context slice, or over
/// all observation-context pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    PerContext,
    Pooled,
}

fn check_smoothing(smoothing: f64) -> Result<()> {
    if smoothing.is_finite() && smoothing >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "smoothing must be >= 0, got {smoothing}"
        )))
    }
}

fn cardinality(t: &Tensor3, j: usize) -> Result<usize> {
    if j >= t.n_vars() {
        return Err(Error::InvalidArgument(format!(
            "variable {j} out of bounds"
        )));
    }
    t.domain(j).cardinality().ok_or(Error::NotOrdinal(j))
}

/// Category frequencies per variable, either per context or pooled.
#[derive(Debug, Clone, Serialize)]
pub struct MarginalTable {
    scope: Scope,
    smoothing: f64,
    cells_per_var: usize,
    cardinalities: Vec<Option<usize>>,
    /// `counts[j][cell * card + c]`, `cell` is the context (per-context) or 0.
    counts: Vec<Vec<u64>>,
    support: Vec<Vec<u64>>,
}

impl MarginalTable {
    pub fn scope(&self) -> Scope {
        self.scope
    }

    pub fn smoothing(&self) -> f64 {
        self.smoothing
    }

    fn cell(&self, ctx: Option<usize>) -> Result<usize> {
        match (self.scope, ctx) {
            (Scope::Pooled, _) => Ok(0),
            (Scope::PerContext, Some(k)) if k < self.cells_per_var => Ok(k),
            (Scope::PerContext, k) => Err(Error::InvalidArgument(format!(
                "per-context marginal needs a valid context, got {k:?}"
            ))),
        }
    }

    /// Raw `(count, support)` of category `c` for variable `j`. `ctx` is
    /// ignored for pooled tables.
    pub fn counts(&self, j: usize, ctx: Option<usize>, c: Category) -> Result<(u64, u64)> {
        let card = self
            .cardinalities
            .get(j)
            .copied()
            .flatten()
            .ok_or(Error::NotOrdinal(j))?;
        if c as usize >= card {
            return Err(Error::InvalidArgument(format!(
                "category {c} outside variable {j}"
            )));
        }
        let cell = self.cell(ctx)?;
        Ok((
            self.counts[j][cell * card + c as usize],
            self.support[j][cell],
        ))
    }

    pub fn frequency(&self, j: usize, ctx: Option<usize>, c: Category) -> Result<Frequency> {
        let (hits, support) = self.counts(j, ctx, c)?;
        let card = self.cardinalities[j].unwrap_or(0);
        let f = Frequency::smoothed(hits, support, self.smoothing, card as f64);
        if f.support == 0.0 {
            return Err(Error::EmptySupport(format!(
                "variable {j}, context {ctx:?}"
            )));
        }
        Ok(f)
    }

    pub fn prob(&self, j: usize, ctx: Option<usize>, c: Category) -> Result<f64> {
        self.frequency(j, ctx, c).map(|f| f.prob())
    }
}

/// Counts categories of every ordinal variable. Real-valued variables get
/// no entries; querying them yields [`Error::NotOrdinal`].
pub fn estimate_marginals(t: &Tensor3, scope: Scope, smoothing: f64) -> Result<MarginalTable> {
    check_smoothing(smoothing)?;
    let cells_per_var = match scope {
        Scope::PerContext => t.n_ctx(),
        Scope::Pooled => 1,
    };
    let n_ctx = t.n_ctx();
    let mut counts = Vec::with_capacity(t.n_vars());
    let mut support = Vec::with_capacity(t.n_vars());
    let mut cardinalities = Vec::with_capacity(t.n_vars());
    for j in 0..t.n_vars() {
        let Some(card) = t.domain(j).cardinality() else {
            cardinalities.push(None);
            counts.push(Vec::new());
            support.push(Vec::new());
            continue;
        };
        let mut cnt = vec![0u64; cells_per_var * card];
        let mut sup = vec![0u64; cells_per_var];
        for (at, c) in t.ordinal_values(j)?.enumerate() {
            if let Some(c) = c {
                let cell = match scope {
                    Scope::PerContext => at % n_ctx,
                    Scope::Pooled => 0,
                };
                cnt[cell * card + c as usize] += 1;
                sup[cell] += 1;
            }
        }
        cardinalities.push(Some(card));
        counts.push(cnt);
        support.push(sup);
    }
    Ok(MarginalTable {
        scope,
        smoothing,
        cells_per_var,
        cardinalities,
        counts,
        support,
    })
}

fn check_items(t: &Tensor3, items: &[(usize, Category)]) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::InvalidArgument(
            "joint query needs at least one variable".into(),
        ));
    }
    let mut outcomes = 1.0;
    for &(j, c) in items {
        let card = cardinality(t, j)?;
        if c as usize >= card {
            return Err(Error::InvalidArgument(format!(
                "category {c} outside variable {j}"
            )));
        }
        outcomes *= card as f64;
    }
    Ok(outcomes)
}

/// Fraction of observations showing every `(j, c)` at once, in context
/// `ctx` (`Some(k)`) or over all observation-context pairs (`None`).
/// Observations missing any queried variable are left out entirely.
pub fn joint_prob(
    t: &Tensor3,
    items: &[(usize, Category)],
    ctx: Option<usize>,
    smoothing: f64,
) -> Result<Frequency> {
    check_smoothing(smoothing)?;
    let outcomes = check_items(t, items)?;
    let ctx_range = match ctx {
        Some(k) if k < t.n_ctx() => k..k + 1,
        Some(k) => return Err(Error::InvalidArgument(format!("context {k} out of bounds"))),
        None => 0..t.n_ctx(),
    };
    let (mut hits, mut support) = (0u64, 0u64);
    for i in 0..t.n_obs() {
        for k in ctx_range.clone() {
            let mut all = true;
            let mut present = true;
            for &(j, c) in items {
                match t.cat(i, j, k) {
                    Some(v) => all &= v == c,
                    None => {
                        present = false;
                        break;
                    }
                }
            }
            if present {
                support += 1;
                hits += all as u64;
            }
        }
    }
    let f = Frequency::smoothed(hits, support, smoothing, outcomes);
    if f.support == 0.0 {
        return Err(Error::EmptySupport(format!(
            "joint over {items:?}, context {ctx:?}"
        )));
    }
    Ok(f)
}

/// A step `prev -> next` estimated over adjacent context pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionEstimate {
    /// `P(next at k, prev at k-1)`.
    pub joint: Frequency,
    /// `P(prev at k-1)`.
    pub prev: Frequency,
}

impl TransitionEstimate {
    /// Conditional `P(next | prev)`; zero when `prev` never occurs.
    pub fn ln_conditional(&self) -> f64 {
        if self.prev.hits == 0.0 {
            return f64::NEG_INFINITY;
        }
        self.joint.ln() - self.prev.ln()
    }
}

/// Stationary first-order transition counts per variable, pooled over all
/// adjacent context pairs `(k-1, k)` and observations. Only pairs with both
/// ends present count; the "previous" marginal is taken over those same
/// pairs, which equals the pooled marginal over contexts `0..p-1` whenever
/// nothing is missing.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionTable {
    smoothing: f64,
    cardinalities: Vec<Option<usize>>,
    /// `pairs[j][u * card + v]`.
    pairs: Vec<Vec<u64>>,
    support: Vec<u64>,
}

impl TransitionTable {
    pub fn pair_count(&self, j: usize, prev: Category, next: Category) -> Result<u64> {
        let card = self.card(j)?;
        Ok(self.pairs[j][prev as usize * card + next as usize])
    }

    pub fn prev_count(&self, j: usize, prev: Category) -> Result<u64> {
        let card = self.card(j)?;
        let u = prev as usize;
        Ok(self.pairs[j][u * card..(u + 1) * card].iter().sum())
    }

    pub fn support(&self, j: usize) -> u64 {
        self.support[j]
    }

    fn card(&self, j: usize) -> Result<usize> {
        self.cardinalities
            .get(j)
            .copied()
            .flatten()
            .ok_or(Error::NotOrdinal(j))
    }

    pub fn estimate(&self, j: usize, prev: Category, next: Category) -> Result<TransitionEstimate> {
        let card = self.card(j)?;
        if prev as usize >= card || next as usize >= card {
            return Err(Error::InvalidArgument(format!(
                "category outside variable {j}"
            )));
        }
        if self.support[j] == 0 && self.smoothing == 0.0 {
            return Err(Error::EmptySupport(format!("transitions of variable {j}")));
        }
        let outcomes = (card * card) as f64;
        Ok(TransitionEstimate {
            joint: Frequency::smoothed(
                self.pair_count(j, prev, next)?,
                self.support[j],
                self.smoothing,
                outcomes,
            ),
            prev: Frequency {
                hits: self.prev_count(j, prev)? as f64 + self.smoothing * card as f64,
                support: self.support[j] as f64 + self.smoothing * outcomes,
            },
        })
    }

    /// Joint probability table `P(prev = u, next = v)` for variable `j`.
    pub fn joint_probs(&self, j: usize) -> Result<Vec<Vec<f64>>> {
        let card = self.card(j)?;
        (0..card)
            .map(|u| {
                (0..card)
                    .map(|v| {
                        self.estimate(j, u as Category, v as Category)
                            .map(|e| e.joint.prob())
                    })
                    .collect()
            })
            .collect()
    }
}

pub fn estimate_transitions(t: &Tensor3, smoothing: f64) -> Result<TransitionTable> {
    check_smoothing(smoothing)?;
    if !t.is_temporal() {
        return Err(Error::UnsupportedProfile(
            "transitions need a temporal context axis".into(),
        ));
    }
    if t.n_ctx() < 2 {
        return Err(Error::InvalidArgument(
            "transitions need at least two contexts".into(),
        ));
    }
    let mut pairs = Vec::with_capacity(t.n_vars());
    let mut support = Vec::with_capacity(t.n_vars());
    let mut cardinalities = Vec::with_capacity(t.n_vars());
    for j in 0..t.n_vars() {
        let Some(card) = t.domain(j).cardinality() else {
            cardinalities.push(None);
            pairs.push(Vec::new());
            support.push(0);
            continue;
        };
        let mut cnt = vec![0u64; card * card];
        let mut sup = 0u64;
        for i in 0..t.n_obs() {
            for k in 1..t.n_ctx() {
                if let (Some(u), Some(v)) = (t.cat(i, j, k - 1), t.cat(i, j, k)) {
                    cnt[u as usize * card + v as usize] += 1;
                    sup += 1;
                }
            }
        }
        cardinalities.push(Some(card));
        pairs.push(cnt);
        support.push(sup);
    }
    Ok(TransitionTable {
        smoothing,
        cardinalities,
        pairs,
        support,
    })
}

/// Joint transition across several variables: over all adjacent pairs
/// where every variable is present at both ends, counts pairs where all of
/// them step `prev[j] -> next[j]` simultaneously.
pub fn joint_transition(
    t: &Tensor3,
    vars: &[usize],
    prev: &[Category],
    next: &[Category],
    smoothing: f64,
) -> Result<TransitionEstimate> {
    check_smoothing(smoothing)?;
    if vars.len() != prev.len() || vars.len() != next.len() {
        return Err(Error::InvalidArgument(
            "transition slices differ in length".into(),
        ));
    }
    if !t.is_temporal() {
        return Err(Error::UnsupportedProfile(
            "transitions need a temporal context axis".into(),
        ));
    }
    let items: Vec<(usize, Category)> = vars.iter().copied().zip(prev.iter().copied()).collect();
    let outcomes = check_items(t, &items)?;
    check_items(
        t,
        &vars
            .iter()
            .copied()
            .zip(next.iter().copied())
            .collect::<Vec<_>>(),
    )?;
    let (mut joint, mut prev_hits, mut support) = (0u64, 0u64, 0u64);
    for i in 0..t.n_obs() {
        for k in 1..t.n_ctx() {
            let mut present = true;
            let mut prev_ok = true;
            let mut next_ok = true;
            for (p, &j) in vars.iter().enumerate() {
                match (t.cat(i, j, k - 1), t.cat(i, j, k)) {
                    (Some(u), Some(v)) => {
                        prev_ok &= u == prev[p];
                        next_ok &= v == next[p];
                    }
                    _ => {
                        present = false;
                        break;
                    }
                }
            }
            if present {
                support += 1;
                prev_hits += prev_ok as u64;
                joint += (prev_ok && next_ok) as u64;
            }
        }
    }
    if support == 0 && smoothing == 0.0 {
        return Err(Error::EmptySupport(format!(
            "joint transition over {vars:?}"
        )));
    }
    Ok(TransitionEstimate {
        joint: Frequency::smoothed(joint, support, smoothing, outcomes * outcomes),
        prev: Frequency {
            hits: prev_hits as f64 + smoothing * outcomes,
            support: support as f64 + smoothing * outcomes * outcomes,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{TensorBuilder, Value, VariableDomain};
    use rand::{Rng, SeedableRng};

    fn random_tensor(
        n: usize,
        m: usize,
        p: usize,
        card: usize,
        seed: u64,
        missing: f64,
    ) -> Tensor3 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut b = TensorBuilder::with_shape(
            n,
            m,
            p,
            vec![VariableDomain::ordinal_indexed(card); m],
            true,
        )
        .unwrap();
        for i in 0..n {
            for j in 0..m {
                for k in 0..p {
                    if rng.random::<f64>() >= missing {
                        b.set(i, j, k, Value::Cat(rng.random_range(0..card) as Category))
                            .unwrap();
                    }
                }
            }
        }
        b.build()
    }

    #[test]
    fn direct_frequency_in_one_slice() {
        let cells = vec![
            vec![vec![Some(0)]],
            vec![vec![Some(0)]],
            vec![vec![Some(1)]],
            vec![vec![Some(1)]],
        ];
        let t = Tensor3::from_categories(&cells, &[2], false).unwrap();
        let m = estimate_marginals(&t, Scope::PerContext, 0.0).unwrap();
        assert_eq!(m.prob(0, Some(0), 0).unwrap(), 0.5);
        assert_eq!(m.prob(0, Some(0), 1).unwrap(), 0.5);
    }

    #[test]
    fn constant_variable_has_degenerate_marginal() {
        let cells = vec![vec![vec![Some(0), Some(0)]]; 3];
        let t = Tensor3::from_categories(&cells, &[3], true).unwrap();
        let m = estimate_marginals(&t, Scope::Pooled, 0.0).unwrap();
        assert_eq!(m.prob(0, None, 0).unwrap(), 1.0);
        assert_eq!(m.prob(0, None, 2).unwrap(), 0.0);
        let tr = estimate_transitions(&t, 0.0).unwrap();
        let e = tr.estimate(0, 0, 0).unwrap();
        assert_eq!(e.joint.prob(), 1.0);
        assert_eq!(e.ln_conditional(), 0.0);
        assert_eq!(tr.estimate(0, 0, 1).unwrap().joint.prob(), 0.0);
    }

    #[test]
    fn fully_missing_slice_is_empty_support() {
        let cells = vec![vec![vec![Some(0), None]]; 2];
        let t = Tensor3::from_categories(&cells, &[2], false).unwrap();
        let m = estimate_marginals(&t, Scope::PerContext, 0.0).unwrap();
        assert!(matches!(m.prob(0, Some(1), 0), Err(Error::EmptySupport(_))));
        assert!(matches!(
            joint_prob(&t, &[(0, 0)], Some(1), 0.0),
            Err(Error::EmptySupport(_))
        ));
        // smoothing makes the estimate defined
        let ms = estimate_marginals(&t, Scope::PerContext, 1.0).unwrap();
        assert_eq!(ms.prob(0, Some(1), 0).unwrap(), 0.5);
    }

    #[test]
    fn marginals_sum_to_one() {
        let t = random_tensor(40, 3, 5, 4, 1, 0.2);
        for scope in [Scope::PerContext, Scope::Pooled] {
            let m = estimate_marginals(&t, scope, 0.0).unwrap();
            for j in 0..3 {
                for k in 0..5 {
                    let total: f64 = (0..4).map(|c| m.prob(j, Some(k), c).unwrap()).sum();
                    assert!((total - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_variable_joint_equals_marginal() {
        let t = random_tensor(30, 3, 2, 3, 5, 0.1);
        let per = estimate_marginals(&t, Scope::PerContext, 0.0).unwrap();
        let pooled = estimate_marginals(&t, Scope::Pooled, 0.0).unwrap();
        for j in 0..3 {
            for c in 0..3 {
                let f = joint_prob(&t, &[(j, c)], Some(1), 0.0).unwrap();
                assert_eq!(f, per.frequency(j, Some(1), c).unwrap());
                let f = joint_prob(&t, &[(j, c)], None, 0.0).unwrap();
                assert_eq!(f, pooled.frequency(j, None, c).unwrap());
            }
        }
    }

    #[test]
    fn duplicated_variable_joint_equals_marginal() {
        let base = random_tensor(25, 1, 3, 3, 9, 0.0);
        let cells: Vec<_> = (0..25)
            .map(|i| {
                let s: Vec<_> = (0..3).map(|k| base.cat(i, 0, k)).collect();
                vec![s.clone(), s]
            })
            .collect();
        let t = Tensor3::from_categories(&cells, &[3, 3], false).unwrap();
        for c in 0..3 {
            let joint = joint_prob(&t, &[(0, c), (1, c)], None, 0.0).unwrap().prob();
            let marg = joint_prob(&t, &[(0, c)], None, 0.0).unwrap().prob();
            assert_eq!(joint, marg);
        }
    }

    #[test]
    fn joint_matches_row_scan() {
        let t = random_tensor(30, 3, 1, 3, 17, 0.0);
        for a in 0..3 {
            for b in 0..3 {
                let hits = (0..30)
                    .filter(|&i| t.cat(i, 0, 0) == Some(a) && t.cat(i, 2, 0) == Some(b))
                    .count();
                let f = joint_prob(&t, &[(0, a), (2, b)], Some(0), 0.0).unwrap();
                assert_eq!((f.hits, f.support), (hits as f64, 30.0));
            }
        }
    }

    #[test]
    fn transition_prev_marginal_equals_pooled_over_leading_contexts() {
        let t = random_tensor(20, 2, 4, 3, 23, 0.0);
        let tr = estimate_transitions(&t, 0.0).unwrap();
        for j in 0..2 {
            for u in 0..3 {
                let direct = (0..20)
                    .flat_map(|i| (0..3).map(move |k| (i, k)))
                    .filter(|&(i, k)| t.cat(i, j, k) == Some(u))
                    .count() as u64;
                assert_eq!(tr.prev_count(j, u).unwrap(), direct);
            }
            let total: f64 = tr.joint_probs(j).unwrap().iter().flatten().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_transition_matches_exhaustive_pair_count() {
        let t = random_tensor(20, 2, 4, 2, 31, 0.1);
        for prev in [[0, 0], [0, 1], [1, 1]] {
            for next in [[0, 1], [1, 0]] {
                let (mut j, mut p, mut s) = (0, 0, 0);
                for i in 0..20 {
                    for k in 1..4 {
                        let cells: Vec<_> = (0..2)
                            .map(|v| (t.cat(i, v, k - 1), t.cat(i, v, k)))
                            .collect();
                        if cells.iter().any(|(a, b)| a.is_none() || b.is_none()) {
                            continue;
                        }
                        s += 1;
                        let po = cells.iter().zip(prev).all(|((a, _), u)| *a == Some(u));
                        let no = cells.iter().zip(next).all(|((_, b), v)| *b == Some(v));
                        p += po as u64;
                        j += (po && no) as u64;
                    }
                }
                let e = joint_transition(&t, &[0, 1], &prev, &next, 0.0).unwrap();
                assert_eq!(
                    (e.joint.hits, e.prev.hits, e.joint.support),
                    (j as f64, p as f64, s as f64)
                );
            }
        }
    }

    #[test]
    fn iid_balanced_transitions_are_quarter() {
        let t = random_tensor(1000, 1, 101, 2, 77, 0.0);
        let tr = estimate_transitions(&t, 0.0).unwrap();
        assert_eq!(tr.support(0), 100_000);
        for row in tr.joint_probs(0).unwrap() {
            for p in row {
                assert!((p - 0.25).abs() < 0.01, "{p}");
            }
        }
    }

    #[test]
    fn transitions_need_temporal_axis() {
        let cells = vec![vec![vec![Some(0), Some(1)]]];
        let t = Tensor3::from_categories(&cells, &[2], false).unwrap();
        assert!(matches!(
            estimate_transitions(&t, 0.0),
            Err(Error::UnsupportedProfile(_))
        ));
    }
}
