//! Monte-Carlo check of pattern probabilities under a uniform null.
//!
//! Each trial draws one observation, `|J|` variables over `|Z|` contexts,
//! uniformly over `|L|` categories, and counts the placements of a fixed
//! pattern: its own contexts only (independent contexts), every ordered
//! `|K|`-subset of `Z` (dependent contexts) or every contiguous run of
//! length `|K|` (temporal). The analytic probability equals the expected
//! number of placements, which bounds the chance of at least one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::significance::{
    pattern_prob, AssumptionProfile, ContextModel, UniformNull, VarDependency,
};
use crate::tensor::{Category, Pattern};

/// Two-sided 99% standard normal quantile.
const Z99: f64 = 2.575_829_303_548_901;

/// Trials per independently seeded chunk; fixes the random streams
/// regardless of thread count.
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    fn from_moments(sum: f64, sum_sq: f64, trials: u64) -> Self {
        let n = trials as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        let half = Z99 * (var / n).sqrt();
        Self {
            mean,
            lo: mean - half,
            hi: mean + half,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McOutcome {
    /// Share of trials with at least one placement.
    pub hit: Estimate,
    /// Mean number of placements per trial.
    pub placements: Estimate,
    /// Analytic `p` (unclamped) for the same setting.
    pub analytic: f64,
    pub trials: u64,
}

/// Uniform-null setting: `cardinality` categories, `n_ctx` contexts.
#[derive(Debug, Clone)]
pub struct McSetting {
    pub cardinality: usize,
    pub n_ctx: usize,
    /// Pattern over variables `0..|J|`; its contexts fix the placement for
    /// independent contexts and are otherwise only used for their count.
    pub pattern: Pattern,
    pub ctx_model: ContextModel,
}

fn placements(setting: &McSetting, obs: &[Category], n_vars: usize) -> u64 {
    let p = setting.n_ctx;
    let pat = &setting.pattern;
    let k_len = pat.ctxs.len();
    let fits = |ctxs: &[usize]| {
        (0..n_vars).all(|jp| {
            ctxs.iter()
                .enumerate()
                .all(|(kp, &k)| obs[jp * p + k] == pat.at(jp, kp))
        })
    };
    match setting.ctx_model {
        ContextModel::Independent => fits(&pat.ctxs) as u64,
        ContextModel::Temporal => (0..=p - k_len)
            .filter(|&s| fits(&(s..s + k_len).collect::<Vec<_>>()))
            .count() as u64,
        ContextModel::Dependent => {
            // all increasing k_len-subsets of 0..p
            let mut idx: Vec<usize> = (0..k_len).collect();
            let mut count = 0;
            loop {
                count += fits(&idx) as u64;
                let Some(pos) = (0..k_len).rev().find(|&i| idx[i] != i + p - k_len) else {
                    break;
                };
                idx[pos] += 1;
                for i in pos + 1..k_len {
                    idx[i] = idx[i - 1] + 1;
                }
            }
            count
        }
    }
}

/// Runs `trials` uniform-null trials. Deterministic for a given seed.
pub fn mc_pattern_frequency(setting: &McSetting, trials: u64, seed: u64) -> Result<McOutcome> {
    let n_vars = setting.pattern.vars.len();
    if trials == 0 || setting.cardinality < 2 || n_vars == 0 {
        return Err(Error::InvalidArgument(
            "need trials, |L| >= 2 and a non-empty pattern".into(),
        ));
    }
    if setting
        .pattern
        .vars
        .iter()
        .enumerate()
        .any(|(jp, &j)| j != jp)
    {
        return Err(Error::InvalidArgument(
            "pattern variables must be 0..|J|".into(),
        ));
    }
    let null = UniformNull::identical(n_vars, setting.cardinality, setting.n_ctx)?;
    let profile = AssumptionProfile::new(VarDependency::Independent, setting.ctx_model);
    let analytic = pattern_prob(&setting.pattern, &profile, &null)?
        .log_prob
        .exp();

    let chunks = trials.div_ceil(CHUNK);
    let (hits, sum, sum_sq) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let mut obs = vec![0 as Category; n_vars * setting.n_ctx];
            let (mut hits, mut sum, mut sum_sq) = (0u64, 0u64, 0u64);
            for _ in 0..CHUNK.min(trials - c * CHUNK) {
                for v in obs.iter_mut() {
                    *v = rng.random_range(0..setting.cardinality) as Category;
                }
                let n = placements(setting, &obs, n_vars);
                hits += (n > 0) as u64;
                sum += n;
                sum_sq += n * n;
            }
            (hits, sum, sum_sq)
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    Ok(McOutcome {
        hit: Estimate::from_moments(hits as f64, hits as f64, trials),
        placements: Estimate::from_moments(sum as f64, sum_sq as f64, trials),
        analytic,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setting(
        l: usize,
        j: usize,
        ctxs: Vec<usize>,
        n_ctx: usize,
        ctx_model: ContextModel,
    ) -> McSetting {
        let k = ctxs.len();
        McSetting {
            cardinality: l,
            n_ctx,
            pattern: Pattern::new((0..j).collect(), ctxs, vec![vec![0; k]; j]).unwrap(),
            ctx_model,
        }
    }

    #[test]
    fn single_binary_cell_is_a_coin() {
        let out = mc_pattern_frequency(
            &setting(2, 1, vec![0], 1, ContextModel::Independent),
            20_000,
            1,
        )
        .unwrap();
        assert!(out.hit.contains(0.5));
        assert_eq!(out.analytic, 0.5);
    }

    #[test]
    fn temporal_runs_match_the_expected_count() {
        let out = mc_pattern_frequency(
            &setting(3, 2, vec![0, 1], 4, ContextModel::Temporal),
            100_000,
            2,
        )
        .unwrap();
        assert!((out.analytic - 3.0 / 81.0).abs() < 1e-15);
        assert!(out.placements.contains(out.analytic), "{out:?}");
        assert!(out.hit.mean <= out.analytic);
    }

    #[test]
    fn dependent_contexts_bound_the_hit_probability() {
        // exactly 7/27 of the 27 strings over 3 contexts have two zeros or more
        let out = mc_pattern_frequency(
            &setting(3, 1, vec![0, 1], 3, ContextModel::Dependent),
            100_000,
            3,
        )
        .unwrap();
        assert!((out.analytic - 1.0 / 3.0).abs() < 1e-15);
        assert!(out.hit.contains(7.0 / 27.0), "{out:?}");
        assert!(out.placements.contains(1.0 / 3.0), "{out:?}");
    }

    #[test]
    fn deterministic_and_shrinking() {
        let s = setting(2, 1, vec![0, 1], 3, ContextModel::Dependent);
        let a = mc_pattern_frequency(&s, 10_000, 7).unwrap();
        assert_eq!(a, mc_pattern_frequency(&s, 10_000, 7).unwrap());
        let b = mc_pattern_frequency(&s, 160_000, 7).unwrap();
        let ratio = a.placements.half_width() / b.placements.half_width();
        assert!((ratio - 4.0).abs() < 0.4, "{ratio}");
    }
}
