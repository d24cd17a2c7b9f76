//! Tail probabilities, minimum sizes and span corrections against
//! independent references.

use proptest::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

use trisig::harness::exact_tail_oracle;
use trisig::significance::{binomial_tail, min_observations, span_correction, TailBound};

#[test]
fn tail_matches_a_library_survival_function_in_the_body() {
    for &(p, n, k) in &[
        (0.3, 50, 10),
        (0.02, 1000, 30),
        (0.5, 200, 101),
        (0.9, 40, 35),
    ] {
        let reference = Binomial::new(p, n).unwrap().sf(k - 1);
        let ours = binomial_tail(f64::ln(p), n, k).exp();
        assert!((ours - reference).abs() <= 1e-10 * reference, "{p} {n} {k}");
    }
}

#[test]
fn deep_tails_stay_finite_in_log_space() {
    let ln = binomial_tail(f64::ln(1e-12), 1000, 900);
    assert!(ln.is_finite() && ln < -20_000.0);
    let exact = exact_tail_oracle(1e-12, 1000, 900).unwrap();
    assert!((ln - exact).abs() <= 1e-9 * exact.abs());
}

#[test]
fn minimum_size_is_the_first_significant_count() {
    let log_p = f64::ln(0.05);
    for bound in [TailBound::AtLeast, TailBound::Exceeds] {
        let n = min_observations(log_p, 500, 0.01, 0.0, bound)
            .unwrap()
            .unwrap();
        let shift = u64::from(bound == TailBound::Exceeds);
        let tail = |m: u64| binomial_tail(log_p, 500, m + shift);
        assert!(tail(n) < 0.01f64.ln());
        assert!(tail(n - 1) >= 0.01f64.ln());
    }
}

proptest! {
    #[test]
    fn tails_agree_with_exact_arithmetic(a in -12.0f64..0.0, n in 1u64..300, f in 0.0f64..=1.0) {
        let p = 10f64.powf(a);
        let k = (f * n as f64).round() as u64;
        let exact = exact_tail_oracle(p, n, k).unwrap();
        let ours = binomial_tail(p.ln(), n, k);
        prop_assert!((ours - exact).abs() <= 1e-9 * exact.abs().max(1.0));
    }

    #[test]
    fn span_correction_scales_and_caps(lp in -700.0f64..0.0, total in 1u64..80, f in 0.0f64..=1.0) {
        let j = ((f * total as f64) as u64).max(1);
        let corrected = span_correction(lp, total, j);
        prop_assert!(corrected >= lp && corrected <= 0.0);
        if j == total {
            prop_assert_eq!(corrected, lp);
        }
    }
}
