//! Benjamini-Hochberg false discovery rate control and significance tiers.
//!
//! The procedure runs on natural-log p-values so that values far below the
//! smallest `f64` keep their order.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Nominal level separating [`Tier::Nominal`] from [`Tier::NotSignificant`].
pub const NOMINAL_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    /// Rejected by the step-up procedure.
    BhSignificant,
    /// Below the nominal level but not rejected.
    Nominal,
    NotSignificant,
}

impl Tier {
    pub fn label(self) -> &'static str {
        match self {
            Tier::BhSignificant => "bh_significant",
            Tier::Nominal => "nominal",
            Tier::NotSignificant => "not_significant",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustedEntry {
    pub log_p_value: f64,
    pub log_q_value: f64,
    /// 1-based position in the ascending order of p-values.
    pub rank: usize,
    pub rejected: bool,
    pub tier: Tier,
}

impl AdjustedEntry {
    pub fn p_value(&self) -> f64 {
        self.log_p_value.exp()
    }

    pub fn q_value(&self) -> f64 {
        self.log_q_value.exp()
    }
}

/// Outcome of the procedure, index-aligned with the input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustedReport {
    pub fdr: f64,
    pub entries: Vec<AdjustedEntry>,
    /// `ln` of the largest `p(i)` with `p(i) <= (i / m) q`, or `None` when
    /// nothing is rejected.
    pub log_bh_threshold: Option<f64>,
}

impl AdjustedReport {
    pub fn bh_threshold(&self) -> Option<f64> {
        self.log_bh_threshold.map(f64::exp)
    }

    pub fn n_rejected(&self) -> usize {
        self.entries.iter().filter(|e| e.rejected).count()
    }

    pub fn rejected(&self) -> Vec<bool> {
        self.entries.iter().map(|e| e.rejected).collect()
    }
}

fn check_fdr(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "FDR level must lie in (0, 1), got {q}"
        )))
    }
}

/// Benjamini-Hochberg over p-values in `[0, 1]`.
pub fn benjamini_hochberg(pvalues: &[f64], q: f64) -> Result<AdjustedReport> {
    if let Some(p) = pvalues.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!(
            "p-value {p} outside [0, 1]"
        )));
    }
    let logs: Vec<f64> = pvalues.iter().map(|p| p.ln()).collect();
    benjamini_hochberg_log(&logs, q)
}

/// Benjamini-Hochberg over natural-log p-values in `[-inf, 0]`.
///
/// Sorting is stable, so tied p-values keep their input order. q-values are
/// `min over j >= i of (m / j) p(j)`, capped at 1.
pub fn benjamini_hochberg_log(log_pvalues: &[f64], q: f64) -> Result<AdjustedReport> {
    benjamini_hochberg_tiered(log_pvalues, q, NOMINAL_ALPHA)
}

/// [`benjamini_hochberg_log`] with a custom nominal level for
/// [`Tier::Nominal`].
pub fn benjamini_hochberg_tiered(
    log_pvalues: &[f64],
    q: f64,
    nominal_alpha: f64,
) -> Result<AdjustedReport> {
    check_fdr(q)?;
    if !(nominal_alpha > 0.0 && nominal_alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "nominal level must lie in (0, 1], got {nominal_alpha}"
        )));
    }
    if let Some(lp) = log_pvalues.iter().find(|lp| lp.is_nan() || **lp > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "log p-value {lp} outside [-inf, 0]"
        )));
    }
    let m = log_pvalues.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| log_pvalues[a].total_cmp(&log_pvalues[b]));

    let ln_m = (m as f64).ln();
    let cutoff = order
        .iter()
        .enumerate()
        .rev()
        .find(|&(r, &idx)| log_pvalues[idx] <= ((r + 1) as f64 * q / m as f64).ln())
        .map(|(r, _)| r + 1)
        .unwrap_or(0);

    let mut log_q = vec![0.0; m];
    let mut running = 0.0f64;
    for (r, &idx) in order.iter().enumerate().rev() {
        let scaled = log_pvalues[idx] + ln_m - ((r + 1) as f64).ln();
        running = running.min(scaled);
        log_q[idx] = running;
    }

    let mut entries = vec![None; m];
    for (r, &idx) in order.iter().enumerate() {
        let rejected = r < cutoff;
        let tier = if rejected {
            Tier::BhSignificant
        } else if log_pvalues[idx] < nominal_alpha.ln() {
            Tier::Nominal
        } else {
            Tier::NotSignificant
        };
        entries[idx] = Some(AdjustedEntry {
            log_p_value: log_pvalues[idx],
            log_q_value: log_q[idx],
            rank: r + 1,
            rejected,
            tier,
        });
    }
    Ok(AdjustedReport {
        fdr: q,
        entries: entries
            .into_iter()
            .map(|e| e.expect("every index ranked"))
            .collect(),
        log_bh_threshold: (cutoff > 0).then(|| log_pvalues[order[cutoff - 1]]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Quadratic reference: reject `p` iff some `p(k) <= (k/m) q` with
    /// `p(k) >= p`, counting ranks by comparison.
    fn naive(p: &[f64], q: f64) -> Vec<bool> {
        let m = p.len();
        let rank = |x: f64| p.iter().filter(|&&y| y <= x).count();
        let passes: Vec<bool> = p
            .iter()
            .map(|&x| x <= rank(x) as f64 / m as f64 * q)
            .collect();
        p.iter()
            .map(|&x| p.iter().zip(&passes).any(|(&y, &ok)| ok && y >= x))
            .collect()
    }

    #[test]
    fn hand_worked_step_up() {
        let r = benjamini_hochberg(&[0.01, 0.02, 0.03], 0.05).unwrap();
        assert_eq!(r.rejected(), vec![true; 3]);
        assert!((r.bh_threshold().unwrap() - 0.03).abs() < 1e-15);
        let r = benjamini_hochberg(&[0.04, 0.001, 0.3], 0.05).unwrap();
        assert_eq!(r.rejected(), vec![false, true, false]);
        assert_eq!(r.entries[0].tier, Tier::Nominal);
        assert_eq!(r.entries[2].tier, Tier::NotSignificant);
        assert!((r.entries[0].q_value() - 0.06).abs() < 1e-12);
        assert!((r.entries[1].q_value() - 0.003).abs() < 1e-12);
    }

    #[test]
    fn equal_pvalues_at_half_the_level_are_all_rejected() {
        for m in [1, 7, 300] {
            let r = benjamini_hochberg(&vec![0.025; m], 0.05).unwrap();
            assert_eq!(r.n_rejected(), m);
        }
    }

    #[test]
    fn empty_input() {
        let r = benjamini_hochberg(&[], 0.05).unwrap();
        assert!(r.entries.is_empty());
        assert_eq!(r.bh_threshold(), None);
    }

    #[test]
    fn underflowing_pvalues_keep_their_order() {
        let r = benjamini_hochberg_log(&[-2000.0, -1000.0, 0.0], 0.05).unwrap();
        assert_eq!(r.rejected(), vec![true, true, false]);
        assert_eq!(r.entries[0].rank, 1);
        assert!((r.entries[1].log_q_value - (-1000.0 + 1.5f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(benjamini_hochberg(&[1.5], 0.05).is_err());
        assert!(benjamini_hochberg(&[0.5], 1.0).is_err());
        assert!(benjamini_hochberg_log(&[f64::NAN], 0.05).is_err());
    }

    #[test]
    fn matches_naive_reference_on_uniform_pvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p: Vec<f64> = (0..200)
                .map(|_| {
                    if rng.random_bool(0.2) {
                        rng.random::<f64>() * 1e-3
                    } else {
                        rng.random()
                    }
                })
                .collect();
            assert_eq!(
                benjamini_hochberg(&p, 0.05).unwrap().rejected(),
                naive(&p, 0.05)
            );
        }
    }

    proptest! {
        #[test]
        fn rejections_form_a_prefix_and_qvalues_are_monotone(p in prop::collection::vec(0.0f64..=1.0, 1..60), q in 0.01f64..0.5) {
            let r = benjamini_hochberg(&p, q).unwrap();
            let mut by_rank = r.entries.clone();
            by_rank.sort_by_key(|e| e.rank);
            let k = r.n_rejected();
            prop_assert!(by_rank.iter().take(k).all(|e| e.rejected));
            prop_assert!(by_rank.iter().skip(k).all(|e| !e.rejected));
            for w in by_rank.windows(2) {
                prop_assert!(w[0].log_q_value <= w[1].log_q_value);
            }
            prop_assert!(by_rank.iter().all(|e| e.log_q_value <= 0.0));
        }

        #[test]
        fn inflating_pvalues_never_adds_rejections(p in prop::collection::vec(0.0f64..=1.0, 1..60), c in 1.0f64..5.0) {
            let base = benjamini_hochberg(&p, 0.05).unwrap();
            let scaled: Vec<f64> = p.iter().map(|x| (x * c).min(1.0)).collect();
            let inflated = benjamini_hochberg(&scaled, 0.05).unwrap();
            prop_assert!(inflated.n_rejected() <= base.n_rejected());
        }

        #[test]
        fn tiers_follow_the_values_under_permutation(p in prop::collection::vec(0.0f64..=1.0, 1..40), seed in any::<u64>()) {
            let mut perm: Vec<usize> = (0..p.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in (1..perm.len()).rev() {
                perm.swap(i, rng.random_range(0..=i));
            }
            let shuffled: Vec<f64> = perm.iter().map(|&i| p[i]).collect();
            let a = benjamini_hochberg(&p, 0.05).unwrap();
            let b = benjamini_hochberg(&shuffled, 0.05).unwrap();
            for (pos, &i) in perm.iter().enumerate() {
                prop_assert_eq!(a.entries[i].tier, b.entries[pos].tier);
            }
        }
    }
}
