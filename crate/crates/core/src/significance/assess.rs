use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::tensor::{extract_pattern, Tensor3, Tricluster};

use super::null::{EmpiricalNull, NullModel};
use super::prob::pattern_prob;
use super::tail::{binomial_tail, span_correction};
use super::{AssumptionProfile, SignificanceResult, Warning};

/// How many binomial successes a tricluster contributes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuccessCount {
    /// Observations of `I` that show the extracted pattern on every cell.
    /// For a constant tricluster this is `|I|`.
    #[default]
    Matching,
    /// `|I|` regardless of how well the block fits its pattern.
    Size,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssessConfig {
    pub profile: AssumptionProfile,
    pub success: SuccessCount,
    /// Drop single-category variables from `J` and from the span count.
    pub exclude_degenerate: bool,
}

impl AssessConfig {
    pub fn new(profile: AssumptionProfile) -> Self {
        Self {
            profile,
            success: SuccessCount::default(),
            exclude_degenerate: true,
        }
    }
}

/// Scores each tricluster against one null model fitted to `t`.
///
/// The outer error covers problems with the tensor or profile as a whole;
/// each inner result is independent, and the output is index-aligned with
/// `triclusters` whatever order the work runs in.
pub fn assess(
    t: &Tensor3,
    triclusters: &[Tricluster],
    config: &AssessConfig,
) -> Result<Vec<Result<SignificanceResult>>> {
    let null = EmpiricalNull::fit(t, &config.profile)?;
    Ok(triclusters
        .par_iter()
        .map(|tc| assess_one(t, tc, config, &null))
        .collect())
}

/// Scores a single tricluster against a prepared null model.
pub fn assess_one(
    t: &Tensor3,
    tc: &Tricluster,
    config: &AssessConfig,
    null: &dyn NullModel,
) -> Result<SignificanceResult> {
    tc.check_bounds(t)?;
    let profile = &config.profile;
    let mut warnings = Vec::new();
    let mut pattern = extract_pattern(t, tc)?;
    let degenerate = |j: usize| config.exclude_degenerate && t.domain(j).is_degenerate();
    let n_vars_total = (0..t.n_vars()).filter(|&j| !degenerate(j)).count();
    let dropped: Vec<usize> = tc.vars.iter().copied().filter(|&j| degenerate(j)).collect();
    if !dropped.is_empty() {
        let keep: Vec<usize> = tc
            .vars
            .iter()
            .copied()
            .filter(|&j| !degenerate(j))
            .collect();
        pattern = pattern.restrict_vars(&keep);
        warnings.push(Warning::ExcludedDegenerate { vars: dropped });
    }
    if !pattern.is_constant() {
        warnings.push(Warning::NonConstantCell {
            cells: pattern.non_constant.clone(),
        });
    }

    let probability = pattern_prob(&pattern, profile, null)?;
    if probability.has_zero_factor() {
        warnings.push(Warning::ZeroProbability);
    }
    let log_p = probability.log_prob;
    let assessable = log_p < 0.0;
    let successes = match config.success {
        SuccessCount::Size => tc.obs.len() as u64,
        SuccessCount::Matching => tc.obs.iter().filter(|&&i| pattern.matches(t, i)).count() as u64,
    };
    let (log_pvalue_raw, log_pvalue_span) = if assessable {
        let raw = binomial_tail(log_p, t.n_obs() as u64, successes);
        let span = if profile.identically_distributed {
            span_correction(raw, n_vars_total as u64, pattern.vars.len() as u64)
        } else {
            raw
        };
        (raw, span)
    } else {
        (0.0, 0.0)
    };
    Ok(SignificanceResult {
        n_obs: tc.obs.len(),
        n_vars: pattern.vars.len(),
        n_ctx: tc.ctxs.len(),
        successes,
        p_pattern_clamped: log_p.exp().min(1.0),
        log_p_pattern: log_p,
        probability,
        pattern,
        log_pvalue_raw,
        log_pvalue_span,
        span_applied: profile.identically_distributed,
        assessable,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::significance::{ContextModel, VarDependency};
    use crate::tensor::{Category, TensorBuilder, Value, VariableDomain};

    fn config(ctx: ContextModel) -> AssessConfig {
        AssessConfig::new(AssumptionProfile::new(VarDependency::Independent, ctx))
    }

    fn checkerboard(n: usize, m: usize, p: usize) -> Tensor3 {
        let cells: Vec<Vec<Vec<Option<Category>>>> = (0..n)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        (0..p)
                            .map(|k| Some(((i + j + k) % 3) as Category))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Tensor3::from_categories(&cells, &vec![3; m], true).unwrap()
    }

    #[test]
    fn empty_batch() {
        let t = checkerboard(4, 2, 2);
        assert!(assess(&t, &[], &config(ContextModel::Dependent))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn saturated_constant_background_is_not_significant() {
        let cells = vec![vec![vec![Some(0); 3]; 2]; 10];
        let t = Tensor3::from_categories(&cells, &[2, 2], false).unwrap();
        let tc = Tricluster::new((0..10).collect(), vec![0, 1], vec![0, 1, 2], false).unwrap();
        let r = assess(&t, &[tc], &config(ContextModel::Independent))
            .unwrap()
            .remove(0)
            .unwrap();
        assert_eq!(r.log_p_pattern, 0.0);
        assert!(!r.assessable);
        assert_eq!(r.pvalue_raw(), 1.0);
        assert_eq!(r.pvalue_span(), 1.0);
    }

    #[test]
    fn per_tricluster_errors_do_not_abort_the_batch() {
        let t = checkerboard(6, 3, 4);
        let ok = Tricluster::new(vec![0, 3], vec![0], vec![1, 2], true).unwrap();
        let gap = Tricluster::new(vec![0, 3], vec![0], vec![0, 2], false).unwrap();
        let out = assess(&t, &[ok.clone(), gap, ok], &config(ContextModel::Temporal)).unwrap();
        assert!(out[0].is_ok());
        assert!(matches!(out[1], Err(Error::UnsupportedProfile(_))));
        assert_eq!(
            out[0].as_ref().unwrap().log_pvalue_raw,
            out[2].as_ref().unwrap().log_pvalue_raw
        );
    }

    #[test]
    fn temporal_profile_needs_a_temporal_tensor() {
        let cells = vec![vec![vec![Some(0); 3]; 2]; 4];
        let t = Tensor3::from_categories(&cells, &[2, 2], false).unwrap();
        assert!(matches!(
            assess(&t, &[], &config(ContextModel::Temporal)),
            Err(Error::UnsupportedProfile(_))
        ));
    }

    #[test]
    fn span_correction_uses_the_binomial_factor() {
        let t = checkerboard(30, 5, 3);
        let tc = Tricluster::new(vec![0, 3, 6, 9], vec![0, 1], vec![0], false).unwrap();
        let mut cfg = config(ContextModel::Dependent);
        let plain = assess(&t, std::slice::from_ref(&tc), &cfg)
            .unwrap()
            .remove(0)
            .unwrap();
        cfg.profile.identically_distributed = true;
        let corrected = assess(&t, &[tc], &cfg).unwrap().remove(0).unwrap();
        assert_eq!(plain.log_pvalue_span, plain.log_pvalue_raw);
        assert!(corrected.span_applied);
        let expected = (plain.log_pvalue_raw + 10f64.ln()).min(0.0);
        assert!((corrected.log_pvalue_span - expected).abs() < 1e-12);
    }

    #[test]
    fn degenerate_variables_are_dropped() {
        let domains = vec![
            VariableDomain::ordinal_indexed(2),
            VariableDomain::ordinal(["only"]),
        ];
        let mut b = TensorBuilder::with_shape(6, 2, 2, domains, false).unwrap();
        for i in 0..6 {
            for k in 0..2 {
                b.set(i, 0, k, Value::Cat((i % 2) as Category)).unwrap();
                b.set(i, 1, k, Value::Cat(0)).unwrap();
            }
        }
        let t = b.build();
        let tc = Tricluster::new(vec![0, 2, 4], vec![0, 1], vec![0, 1], false).unwrap();
        let r = assess(&t, &[tc], &config(ContextModel::Independent))
            .unwrap()
            .remove(0)
            .unwrap();
        assert_eq!(r.n_vars, 1);
        assert!(r
            .warnings
            .contains(&Warning::ExcludedDegenerate { vars: vec![1] }));
        assert!((r.log_p_pattern - 0.25f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn matching_successes_ignore_off_pattern_rows() {
        let t = checkerboard(9, 2, 2);
        // rows 0 and 3 share a pattern, row 1 does not
        let tc = Tricluster::new(vec![0, 1, 3], vec![0, 1], vec![0, 1], false).unwrap();
        let mut cfg = config(ContextModel::Dependent);
        let r = assess(&t, std::slice::from_ref(&tc), &cfg)
            .unwrap()
            .remove(0)
            .unwrap();
        assert_eq!(r.successes, 2);
        assert!(!r.warnings.is_empty());
        cfg.success = SuccessCount::Size;
        let r = assess(&t, &[tc], &cfg).unwrap().remove(0).unwrap();
        assert_eq!(r.successes, 3);
    }
}
