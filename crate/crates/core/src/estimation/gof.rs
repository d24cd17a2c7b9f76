//! Pairwise similarity of variable distributions: two-sample chi-square for
//! ordinal variables, two-sample Kolmogorov-Smirnov for real-valued ones.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::tensor::{Tensor3, VariableDomain};

const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GofMethod {
    ChiSquare,
    KolmogorovSmirnov,
    /// The two variables have different domains and are never identically
    /// distributed.
    DomainMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairTest {
    pub a: usize,
    pub b: usize,
    pub method: GofMethod,
    pub statistic: f64,
    pub dof: Option<usize>,
    pub p_value: f64,
    pub rejected: bool,
    /// Reason the pair could not be tested.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GofReport {
    pub alpha: f64,
    /// Bonferroni level applied to each tested pair.
    pub pair_alpha: f64,
    pub pairs: Vec<PairTest>,
    /// True iff no tested pair rejects.
    pub identically_distributed: bool,
}

impl GofReport {
    pub fn skipped(&self) -> impl Iterator<Item = &PairTest> {
        self.pairs.iter().filter(|p| p.skipped.is_some())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square test of homogeneity on a `2 x C` table of category counts.
/// Categories whose expected count falls below 5 are merged into an adjacent
/// category, smallest column first. Fails with [`Error::EmptySupport`] when
/// fewer than two columns survive.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquareOutcome> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(
            "samples have different category counts".into(),
        ));
    }
    let mut cols: Vec<(f64, f64)> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| (x as f64, y as f64))
        .collect();
    let ra: f64 = cols.iter().map(|c| c.0).sum();
    let rb: f64 = cols.iter().map(|c| c.1).sum();
    let n = ra + rb;
    if ra == 0.0 || rb == 0.0 {
        return Err(Error::EmptySupport("one of the samples is empty".into()));
    }
    let expected_min = |col: &(f64, f64)| (col.0 + col.1) * ra.min(rb) / n;
    while cols.len() > 1 && cols.iter().any(|c| expected_min(c) < MIN_EXPECTED) {
        let total = |c: &(f64, f64)| c.0 + c.1;
        let (smallest, _) = cols
            .iter()
            .enumerate()
            .min_by(|x, y| total(x.1).total_cmp(&total(y.1)))
            .expect("non-empty");
        let neighbor = match (
            smallest.checked_sub(1),
            (smallest + 1 < cols.len()).then_some(smallest + 1),
        ) {
            (Some(l), Some(r)) if total(&cols[r]) < total(&cols[l]) => r,
            (Some(l), _) => l,
            (None, Some(r)) => r,
            (None, None) => unreachable!(),
        };
        let merged = cols.remove(smallest);
        let target = if neighbor > smallest {
            neighbor - 1
        } else {
            neighbor
        };
        cols[target].0 += merged.0;
        cols[target].1 += merged.1;
    }
    if cols.len() < 2 {
        return Err(Error::EmptySupport(
            "expected counts below 5 even after merging categories".into(),
        ));
    }
    let statistic: f64 = cols
        .iter()
        .map(|&(x, y)| {
            let col = x + y;
            let ea = col * ra / n;
            let eb = col * rb / n;
            (x - ea).powi(2) / ea + (y - eb).powi(2) / eb
        })
        .sum();
    let dof = cols.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(ChiSquareOutcome {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample KS test with the asymptotic Kolmogorov p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySupport("one of the samples is empty".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut x, mut y) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while x < a.len() && y < b.len() {
        let v = a[x].min(b[y]);
        while x < a.len() && a[x] <= v {
            x += 1;
        }
        while y < b.len() && b[y] <= v {
            y += 1;
        }
        d = d.max((x as f64 / na - y as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    Ok(KsOutcome {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
    })
}

/// `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} exp(-2 k² λ²)`.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Pairwise tests between the pooled distributions of every pair of
/// non-degenerate variables, Bonferroni-adjusted across the tested pairs.
pub fn identically_distributed(t: &Tensor3, alpha: f64) -> Result<GofReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let vars: Vec<usize> = (0..t.n_vars())
        .filter(|&j| !t.domain(j).is_degenerate())
        .collect();
    if vars.len() < 2 {
        return Err(Error::InvalidArgument(
            "the gate needs at least two non-degenerate variables".into(),
        ));
    }

    enum Sample {
        Counts(Vec<u64>),
        Values(Vec<f64>),
    }
    let samples: Vec<Sample> = vars
        .iter()
        .map(|&j| match t.domain(j) {
            VariableDomain::Ordinal { categories, .. } => {
                let mut counts = vec![0u64; categories.len()];
                for c in t.ordinal_values(j)?.flatten() {
                    counts[c as usize] += 1;
                }
                Ok(Sample::Counts(counts))
            }
            VariableDomain::Real => t.real_values(j).map(Sample::Values),
        })
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    for x in 0..vars.len() {
        for y in x + 1..vars.len() {
            let (a, b) = (vars[x], vars[y]);
            let mut test = PairTest {
                a,
                b,
                method: GofMethod::DomainMismatch,
                statistic: f64::INFINITY,
                dof: None,
                p_value: 0.0,
                rejected: false,
                skipped: None,
            };
            let same_domain = match (t.domain(a), t.domain(b)) {
                (VariableDomain::Real, VariableDomain::Real) => true,
                (da, db) => {
                    da.categories() == db.categories() && da.is_ordinal() && db.is_ordinal()
                }
            };
            if same_domain {
                let outcome = match (&samples[x], &samples[y]) {
                    (Sample::Counts(ca), Sample::Counts(cb)) => {
                        test.method = GofMethod::ChiSquare;
                        chi_square_two_sample(ca, cb).map(|o| (o.statistic, Some(o.dof), o.p_value))
                    }
                    (Sample::Values(va), Sample::Values(vb)) => {
                        test.method = GofMethod::KolmogorovSmirnov;
                        ks_two_sample(va, vb).map(|o| (o.statistic, None, o.p_value))
                    }
                    _ => unreachable!("domains agree"),
                };
                match outcome {
                    Ok((s, dof, p)) => {
                        test.statistic = s;
                        test.dof = dof;
                        test.p_value = p;
                    }
                    Err(e) => {
                        test.statistic = f64::NAN;
                        test.p_value = f64::NAN;
                        test.skipped = Some(e.to_string());
                    }
                }
            }
            pairs.push(test);
        }
    }
    let tested = pairs.iter().filter(|p| p.skipped.is_none()).count().max(1);
    let pair_alpha = alpha / tested as f64;
    for p in pairs.iter_mut().filter(|p| p.skipped.is_none()) {
        p.rejected = p.p_value < pair_alpha;
    }
    let identically_distributed = pairs.iter().all(|p| !p.rejected);
    Ok(GofReport {
        alpha,
        pair_alpha,
        pairs,
        identically_distributed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{Category, TensorBuilder, Value};
    use rand::{Rng, SeedableRng};

    #[test]
    fn identical_counts_give_zero_statistic() {
        let o = chi_square_two_sample(&[30, 40, 50], &[30, 40, 50]).unwrap();
        assert_eq!(o.statistic, 0.0);
        assert_eq!(o.dof, 2);
        assert!((o.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximal_divergence_is_rejected() {
        let o = chi_square_two_sample(&[100, 0], &[0, 100]).unwrap();
        assert!((o.statistic - 200.0).abs() < 1e-9);
        assert!(o.p_value < 1e-40);
    }

    #[test]
    fn sparse_categories_are_merged() {
        // Column 2 has expected 1 per row and is folded into column 1.
        let o = chi_square_two_sample(&[50, 40, 1], &[50, 40, 1]).unwrap();
        assert_eq!(o.dof, 1);
        assert!(chi_square_two_sample(&[2, 1], &[1, 2]).is_err());
    }

    #[test]
    fn type_one_error_is_calibrated() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let alpha = 0.05;
        let reps = 1000;
        let mut rejections = 0;
        for _ in 0..reps {
            let mut a = [0u64; 5];
            let mut b = [0u64; 5];
            for _ in 0..500 {
                a[rng.random_range(0..5)] += 1;
                b[rng.random_range(0..5)] += 1;
            }
            rejections += (chi_square_two_sample(&a, &b).unwrap().p_value < alpha) as usize;
        }
        let rate = rejections as f64 / reps as f64;
        // three binomial standard deviations around alpha
        assert!(
            (rate - alpha).abs() < 3.0 * (alpha * (1.0 - alpha) / reps as f64).sqrt(),
            "{rate}"
        );
    }

    #[test]
    fn ks_detects_shift_and_accepts_same_sample() {
        let a: Vec<f64> = (0..200).map(|x| x as f64).collect();
        let same = ks_two_sample(&a, &a).unwrap();
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.p_value, 1.0);
        let b: Vec<f64> = a.iter().map(|x| x + 100.0).collect();
        let shifted = ks_two_sample(&a, &b).unwrap();
        assert!((shifted.statistic - 0.5).abs() < 1e-12);
        assert!(shifted.p_value < 1e-10);
    }

    #[test]
    fn gate_over_tensor() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let dom = VariableDomain::ordinal_indexed(3);
        let mut b = TensorBuilder::with_shape(200, 3, 5, vec![dom; 3], false).unwrap();
        for i in 0..200 {
            for k in 0..5 {
                b.set(i, 0, k, Value::Cat(rng.random_range(0..3) as Category))
                    .unwrap();
                b.set(i, 1, k, Value::Cat(rng.random_range(0..3) as Category))
                    .unwrap();
                // variable 2 is heavily skewed
                let c = if rng.random::<f64>() < 0.8 {
                    0
                } else {
                    rng.random_range(1..3)
                };
                b.set(i, 2, k, Value::Cat(c)).unwrap();
            }
        }
        let report = identically_distributed(&b.build(), 0.05).unwrap();
        assert_eq!(report.pairs.len(), 3);
        assert!(!report.identically_distributed);
        let by_pair = |a, b| report.pairs.iter().find(|p| p.a == a && p.b == b).unwrap();
        assert!(!by_pair(0, 1).rejected);
        assert!(by_pair(0, 2).rejected && by_pair(1, 2).rejected);
        assert!((report.pair_alpha - 0.05 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn differing_domains_are_rejected() {
        let doms = vec![
            VariableDomain::ordinal_indexed(2),
            VariableDomain::ordinal_indexed(3),
        ];
        let mut b = TensorBuilder::with_shape(10, 2, 1, doms, false).unwrap();
        for i in 0..10 {
            b.set(i, 0, 0, Value::Cat((i % 2) as Category)).unwrap();
            b.set(i, 1, 0, Value::Cat((i % 3) as Category)).unwrap();
        }
        let report = identically_distributed(&b.build(), 0.05).unwrap();
        assert_eq!(report.pairs[0].method, GofMethod::DomainMismatch);
        assert!(report.pairs[0].rejected);
        assert!(!report.identically_distributed);
    }
}
