//! Exact binomial upper tail in integer arithmetic.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// `ln x` for an arbitrarily large integer, from its top 64 bits.
fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 64 {
        return x.to_u64().expect("fits").to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// `x / y` as an `f64`, accurate to a few ulps while it is a normal number.
fn ratio(x: &BigUint, y: &BigUint) -> f64 {
    (ln_big(x) - ln_big(y)).exp()
}

/// `ln P(X >= k)` for `X ~ Bin(n, num / den)`, summed exactly:
/// `sum_{x >= k} C(n, x) num^x (den - num)^(n - x) / den^n`.
///
/// The final logarithm is taken on whichever of the upper sum and its
/// complement is smaller, so tails close to 1 keep their relative
/// precision.
pub fn exact_tail_ln(num: &BigUint, den: &BigUint, n: u64, k: u64) -> Result<f64> {
    if den.is_zero() || num > den {
        return Err(Error::InvalidArgument(
            "probability must lie in [0, 1]".into(),
        ));
    }
    if k == 0 {
        return Ok(0.0);
    }
    if k > n {
        return Ok(f64::NEG_INFINITY);
    }
    let rest = den - num;
    let n_us = n as usize;
    let mut pow_a = Vec::with_capacity(n_us + 1);
    let mut pow_b = Vec::with_capacity(n_us + 1);
    pow_a.push(BigUint::one());
    pow_b.push(BigUint::one());
    for i in 0..n_us {
        pow_a.push(&pow_a[i] * num);
        pow_b.push(&pow_b[i] * &rest);
    }
    let total = den.pow(n as u32);
    let mut upper = BigUint::zero();
    let mut lower = BigUint::zero();
    let mut binom = BigUint::one();
    for x in 0..=n {
        let term = &binom * &pow_a[x as usize] * &pow_b[(n - x) as usize];
        if x >= k {
            upper += term;
        } else {
            lower += term;
        }
        binom = binom * (n - x) / (x + 1);
    }
    if upper <= lower {
        Ok(ln_big(&upper) - ln_big(&total))
    } else {
        let q = ratio(&lower, &total);
        if q > 0.0 {
            Ok((-q).ln_1p())
        } else if lower.is_zero() {
            Ok(0.0)
        } else {
            Ok(-(ln_big(&lower) - ln_big(&total)).exp())
        }
    }
}

/// Exact tail for an `f64` probability, read as the dyadic rational it
/// represents.
pub fn exact_tail_oracle(p: f64, n: u64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    let (num, den) = dyadic(p);
    exact_tail_ln(&num, &den, n, k)
}

/// `p = num / 2^e` exactly.
fn dyadic(p: f64) -> (BigUint, BigUint) {
    if p == 0.0 {
        return (BigUint::zero(), BigUint::one());
    }
    let bits = p.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e2) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    // p = mant * 2^e2 with e2 < 0 for p <= 1 unless p = 1 exactly
    if e2 >= 0 {
        return (BigUint::from(mant) << e2 as u64, BigUint::one());
    }
    let tz = mant.trailing_zeros().min((-e2) as u32) as i64;
    (
        BigUint::from(mant >> tz),
        BigUint::one() << (-e2 - tz) as u64,
    )
}
