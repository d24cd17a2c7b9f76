//! Probability of a pattern occurring for one observation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimation::{Frequency, TransitionEstimate};
use crate::tensor::{Category, Pattern};

use super::null::NullModel;
use super::tail::log_binomial;
use super::{AssumptionProfile, ContextModel, VarDependency};

/// One multiplicative term of a slice probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    Prob(Frequency),
    Conditional(TransitionEstimate),
}

impl Factor {
    pub fn ln(&self) -> f64 {
        match self {
            Factor::Prob(f) => f.ln(),
            Factor::Conditional(t) => t.ln_conditional(),
        }
    }
}

/// Contribution of the `kp`-th context of `K`: a marginal or joint slice
/// probability, or a transition from the previous slice under the temporal
/// model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceTerm {
    pub ctx: usize,
    pub factors: Vec<Factor>,
    pub log_prob: f64,
}

/// `p = placements * prod(slice terms)`, kept in log space and unclamped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternProbability {
    pub log_prob: f64,
    /// `ln` of the number of positions the pattern could occupy: 1 for
    /// independent contexts, `C(|Z|, |K|)` for dependent ones and
    /// `|Z| - |K| + 1` for temporal runs.
    pub log_placements: f64,
    pub slices: Vec<SliceTerm>,
}

impl PatternProbability {
    pub fn has_zero_factor(&self) -> bool {
        self.slices
            .iter()
            .flat_map(|s| &s.factors)
            .any(|f| f.ln() == f64::NEG_INFINITY)
    }
}

fn term(ctx: usize, factors: Vec<Factor>) -> SliceTerm {
    let log_prob = factors.iter().map(Factor::ln).sum();
    SliceTerm {
        ctx,
        factors,
        log_prob,
    }
}

fn slice_term(
    null: &dyn NullModel,
    var_dep: VarDependency,
    items: &[(usize, Category)],
    ctx: usize,
    scope: Option<usize>,
) -> Result<SliceTerm> {
    let factors = match var_dep {
        VarDependency::Independent => items
            .iter()
            .map(|item| {
                null.slice(std::slice::from_ref(item), scope)
                    .map(Factor::Prob)
            })
            .collect::<Result<Vec<_>>>()?,
        VarDependency::Dependent if items.is_empty() => Vec::new(),
        VarDependency::Dependent => vec![Factor::Prob(null.slice(items, scope)?)],
    };
    Ok(term(ctx, factors))
}

/// `ln p` of `pattern` under `profile`, with probabilities from `null`.
///
/// * independent contexts: per-context marginals (MI) or joints (MD),
///   multiplied over `K`;
/// * dependent contexts: the same with pooled estimates, times
///   `C(|Z|, |K|)`;
/// * temporal: pooled first slice, then one stationary transition per
///   further context (a product over variables for MI, a joint ratio for
///   MD), times `|Z| - |K| + 1`.
pub fn pattern_prob(
    pattern: &Pattern,
    profile: &AssumptionProfile,
    null: &dyn NullModel,
) -> Result<PatternProbability> {
    let n_ctx = null.n_ctx();
    let k_len = pattern.ctxs.len();
    if k_len == 0 || k_len > n_ctx || pattern.ctxs.iter().any(|&k| k >= n_ctx) {
        return Err(Error::InvalidTricluster(format!(
            "contexts {:?} do not fit a tensor with {n_ctx} contexts",
            pattern.ctxs
        )));
    }
    let var_dep = profile.var_dep;
    let (log_placements, slices) = match profile.ctx_model {
        ContextModel::Independent => {
            let slices = (0..k_len)
                .map(|kp| {
                    let k = pattern.ctxs[kp];
                    slice_term(null, var_dep, &pattern.slice(kp), k, Some(k))
                })
                .collect::<Result<Vec<_>>>()?;
            (0.0, slices)
        }
        ContextModel::Dependent => {
            let slices = (0..k_len)
                .map(|kp| slice_term(null, var_dep, &pattern.slice(kp), pattern.ctxs[kp], None))
                .collect::<Result<Vec<_>>>()?;
            (log_binomial(n_ctx as u64, k_len as u64), slices)
        }
        ContextModel::Temporal => {
            if !null.is_temporal() {
                return Err(Error::UnsupportedProfile(
                    "the temporal context model needs a temporal context axis".into(),
                ));
            }
            if pattern.ctxs.windows(2).any(|w| w[1] != w[0] + 1) {
                return Err(Error::UnsupportedProfile(format!(
                    "contexts {:?} are not a contiguous run",
                    pattern.ctxs
                )));
            }
            let mut slices = vec![slice_term(
                null,
                var_dep,
                &pattern.slice(0),
                pattern.ctxs[0],
                None,
            )?];
            for kp in 1..k_len {
                let factors = match var_dep {
                    VarDependency::Independent => (0..pattern.vars.len())
                        .map(|jp| {
                            null.transition(
                                &[pattern.vars[jp]],
                                &[pattern.at(jp, kp - 1)],
                                &[pattern.at(jp, kp)],
                            )
                            .map(Factor::Conditional)
                        })
                        .collect::<Result<Vec<_>>>()?,
                    VarDependency::Dependent if pattern.vars.is_empty() => Vec::new(),
                    VarDependency::Dependent => {
                        let prev: Vec<Category> = (0..pattern.vars.len())
                            .map(|jp| pattern.at(jp, kp - 1))
                            .collect();
                        let next: Vec<Category> = (0..pattern.vars.len())
                            .map(|jp| pattern.at(jp, kp))
                            .collect();
                        vec![Factor::Conditional(null.transition(
                            &pattern.vars,
                            &prev,
                            &next,
                        )?)]
                    }
                };
                slices.push(term(pattern.ctxs[kp], factors));
            }
            (((n_ctx - k_len + 1) as f64).ln(), slices)
        }
    };
    let log_prob = log_placements + slices.iter().map(|s| s.log_prob).sum::<f64>();
    Ok(PatternProbability {
        log_prob,
        log_placements,
        slices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::significance::{EmpiricalNull, UniformNull};
    use crate::tensor::Tensor3;
    use approx::assert_relative_eq;

    fn uniform_pattern(n_vars: usize, n_ctx: usize) -> Pattern {
        Pattern::new(
            (0..n_vars).collect(),
            (0..n_ctx).collect(),
            vec![vec![0; n_ctx]; n_vars],
        )
        .unwrap()
    }

    fn profile(v: VarDependency, c: ContextModel) -> AssumptionProfile {
        AssumptionProfile::new(v, c)
    }

    #[test]
    fn uniform_closed_forms() {
        let null = UniformNull::identical(3, 5, 50).unwrap();
        let p = pattern_prob(
            &uniform_pattern(3, 2),
            &profile(VarDependency::Independent, ContextModel::Dependent),
            &null,
        )
        .unwrap();
        assert_relative_eq!(p.log_prob.exp(), 0.0784, max_relative = 1e-12);

        let null = UniformNull::identical(2, 3, 50).unwrap();
        let p = pattern_prob(
            &uniform_pattern(2, 2),
            &profile(VarDependency::Independent, ContextModel::Temporal),
            &null,
        )
        .unwrap();
        assert_relative_eq!(p.log_prob.exp(), 49.0 / 81.0, max_relative = 1e-12);

        let p = pattern_prob(
            &uniform_pattern(2, 2),
            &profile(VarDependency::Dependent, ContextModel::Dependent),
            &null,
        )
        .unwrap();
        assert_relative_eq!(p.log_prob.exp(), 1225.0 / 81.0, max_relative = 1e-12);
    }

    fn small_tensor() -> Tensor3 {
        // 4 observations, 2 variables, 3 contexts
        let rows = vec![
            vec![
                vec![Some(0), Some(0), Some(1)],
                vec![Some(1), Some(1), Some(0)],
            ],
            vec![
                vec![Some(0), Some(1), Some(1)],
                vec![Some(1), Some(0), Some(0)],
            ],
            vec![
                vec![Some(1), Some(0), Some(0)],
                vec![Some(1), Some(1), Some(1)],
            ],
            vec![
                vec![Some(0), Some(0), Some(1)],
                vec![Some(0), Some(1), Some(0)],
            ],
        ];
        Tensor3::from_categories(&rows, &[2, 2], true).unwrap()
    }

    #[test]
    fn single_cell_collapses_to_the_marginal() {
        let t = small_tensor();
        let prof = profile(VarDependency::Independent, ContextModel::Independent);
        let null = EmpiricalNull::fit(&t, &prof).unwrap();
        let pat = Pattern::new(vec![0], vec![1], vec![vec![0]]).unwrap();
        let p = pattern_prob(&pat, &prof, &null).unwrap();
        assert_relative_eq!(p.log_prob, (3.0f64 / 4.0).ln(), max_relative = 1e-15);
    }

    #[test]
    fn hand_counted_profiles() {
        let t = small_tensor();
        let pat = Pattern::new(vec![0, 1], vec![0, 1], vec![vec![0, 0], vec![1, 1]]).unwrap();

        // MD vars, MI ctx: joint (0,1) in ctx 0 = 2/4, in ctx 1 = 3/4
        let prof = profile(VarDependency::Dependent, ContextModel::Independent);
        let p = pattern_prob(&pat, &prof, &EmpiricalNull::fit(&t, &prof).unwrap()).unwrap();
        assert_relative_eq!(p.log_prob.exp(), 0.375, max_relative = 1e-12);

        // MI vars, MD ctx: pooled P(y0=0) = 7/12, P(y1=1) = 7/12, C(3,2) = 3
        let prof = profile(VarDependency::Independent, ContextModel::Dependent);
        let p = pattern_prob(&pat, &prof, &EmpiricalNull::fit(&t, &prof).unwrap()).unwrap();
        assert_relative_eq!(
            p.log_prob.exp(),
            3.0 * (7.0f64 / 12.0).powi(4),
            max_relative = 1e-12
        );

        // MD vars, TC: 2 * P(0,1 pooled) * P((0,1)->(0,1)) = 2 * 6/12 * (2/8)/(5/8)
        let prof = profile(VarDependency::Dependent, ContextModel::Temporal);
        let p = pattern_prob(&pat, &prof, &EmpiricalNull::fit(&t, &prof).unwrap()).unwrap();
        assert_relative_eq!(p.log_prob.exp(), 2.0 * 0.5 * 0.4, max_relative = 1e-12);
    }

    #[test]
    fn temporal_rejects_gaps() {
        let null = UniformNull::identical(1, 2, 5).unwrap();
        let pat = Pattern::new(vec![0], vec![0, 2], vec![vec![0, 0]]).unwrap();
        let err = pattern_prob(
            &pat,
            &profile(VarDependency::Independent, ContextModel::Temporal),
            &null,
        );
        assert!(matches!(err, Err(Error::UnsupportedProfile(_))));
    }

    #[test]
    fn zero_factor_is_flagged() {
        let t = small_tensor();
        let prof = profile(VarDependency::Dependent, ContextModel::Independent);
        let null = EmpiricalNull::fit(&t, &prof).unwrap();
        // (y0, y1) = (1, 0) never occurs in context 0
        let pat = Pattern::new(vec![0, 1], vec![0], vec![vec![1], vec![0]]).unwrap();
        let p = pattern_prob(&pat, &prof, &null).unwrap();
        assert!(p.has_zero_factor());
        assert_eq!(p.log_prob, f64::NEG_INFINITY);
    }
}
