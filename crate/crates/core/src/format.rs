//! Fixed numeric rendering for reports: 6 significant digits, scientific
//! notation below `1e-4`, trailing zeros trimmed.

/// Renders `x` with 6 significant digits.
pub fn g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

/// Renders a probability given by its natural log. Values that underflow
/// `f64` are rendered from the base-10 exponent directly.
pub fn prob_from_ln(ln_p: f64) -> String {
    if ln_p == f64::NEG_INFINITY {
        return "0".into();
    }
    if ln_p.is_nan() {
        return "nan".into();
    }
    let p = ln_p.exp();
    if p >= 1e-300 {
        return g6(p);
    }
    let log10 = ln_p / std::f64::consts::LN_10;
    let mut exp = log10.floor();
    let mut mantissa = 10f64.powf(log10 - exp);
    // Round to 6 significant digits and renormalize.
    mantissa = (mantissa * 1e5).round() / 1e5;
    if mantissa >= 10.0 {
        mantissa /= 10.0;
        exp += 1.0;
    }
    format!("{}e{}", trim_zeros(&format!("{mantissa:.5}")), exp as i64)
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
