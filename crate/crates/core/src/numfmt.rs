//! Fixed-precision rendering of floats for machine-readable output.

/// Significant digits kept in JSON and CSV output.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// Round to `digits` significant decimal digits. Non-finite values pass
/// through unchanged.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x)
        .parse()
        .expect("scientific notation round-trips")
}

pub fn sig9(x: f64) -> f64 {
    round_sig(x, SIGNIFICANT_DIGITS)
}

/// Nine significant digits, scientific outside `[1e-4, 1e15)`.
pub fn num9(x: f64) -> String {
    let r = sig9(x);
    if r == 0.0 || !r.is_finite() || (1e-4..1e15).contains(&r.abs()) {
        r.to_string()
    } else {
        format!("{r:e}")
    }
}

/// Human-readable probability: six decimals, scientific when tiny.
pub fn fmt6(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:.6e}")
    } else {
        format!("{x:.6}")
    }
}
