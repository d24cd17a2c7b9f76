//! Binomial upper tail and friends, all in natural-log space.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `ln C(n, k)`. Exact (up to the final `ln`) while the coefficient fits in
/// a `u128`, log-gamma beyond that.
pub fn log_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        // c * (n - i) / (i + 1) stays integral at every step
        match c.checked_mul((n - i) as u128) {
            Some(v) => c = v / (i + 1) as u128,
            None => {
                return ln_gamma(n as f64 + 1.0)
                    - ln_gamma(k as f64 + 1.0)
                    - ln_gamma((n - k) as f64 + 1.0);
            }
        }
    }
    (c as f64).ln()
}

/// `ln(1 - p)` for `p = exp(log_p)`, accurate near both ends.
fn ln_complement(log_p: f64) -> f64 {
    if log_p < -std::f64::consts::LN_2 {
        (-log_p.exp()).ln_1p()
    } else {
        (-log_p.exp_m1()).ln()
    }
}

fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `ln P(X >= k)` for `X ~ Bin(n, p)` with `p = min(exp(log_p), 1)`.
///
/// Sums the smaller side of the distribution with log-sum-exp and takes the
/// complement with `ln_1p` when the upper tail is close to 1.
pub fn binomial_tail(log_p: f64, n: u64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if k > n || log_p == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if log_p >= 0.0 {
        return 0.0;
    }
    let ln_q = ln_complement(log_p);
    let term = move |x: u64| log_binomial(n, x) + x as f64 * log_p + (n - x) as f64 * ln_q;
    let mean = n as f64 * log_p.exp();
    if (k as f64) <= mean {
        let lower = log_sum_exp((0..k).map(term));
        if lower < -std::f64::consts::LN_2 {
            return (-lower.exp()).ln_1p();
        }
    }
    log_sum_exp((k..=n).map(term)).min(0.0)
}

/// `ln C(|Y|, |J|)`, the number of variable subsets the pattern could span.
pub fn span_factor(n_vars_total: u64, n_vars_tric: u64) -> f64 {
    log_binomial(n_vars_total, n_vars_tric)
}

/// Multiplies a p-value (in log space) by `C(|Y|, |J|)`, capped at 1.
pub fn span_correction(log_pvalue: f64, n_vars_total: u64, n_vars_tric: u64) -> f64 {
    (log_pvalue + span_factor(n_vars_total, n_vars_tric)).min(0.0)
}

/// Which tail the minimum-observation search bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailBound {
    /// Smallest `n` in `1..=|X|` with `factor * P(X >= n) < alpha`.
    AtLeast,
    /// Smallest `n` in `1..|X|` with `factor * P(X > n) < alpha`; the
    /// reference minimum-observation grid follows this convention.
    #[default]
    Exceeds,
}

/// Minimum number of tricluster observations for significance at `alpha`,
/// or `None` when no count qualifies (always the case when `p >= 1`).
/// `log_factor` is the log of a multiplicative correction (0 for none).
pub fn min_observations(
    log_p: f64,
    n_obs_total: u64,
    alpha: f64,
    log_factor: f64,
    bound: TailBound,
) -> Result<Option<u64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    if log_factor < 0.0 || log_factor.is_nan() {
        return Err(Error::InvalidArgument(
            "correction factor must be >= 1".into(),
        ));
    }
    if log_p >= 0.0 || n_obs_total == 0 {
        return Ok(None);
    }
    let ln_alpha = alpha.ln();
    let (shift, hi) = match bound {
        TailBound::AtLeast => (0, n_obs_total),
        TailBound::Exceeds => (1, n_obs_total - 1),
    };
    let significant = |m: u64| log_factor + binomial_tail(log_p, n_obs_total, m + shift) < ln_alpha;
    if hi < 1 || !significant(hi) {
        return Ok(None);
    }
    // the tail is decreasing in m, so `significant` is monotone
    let (mut lo, mut hi) = (1, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if significant(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(Some(lo))
}
