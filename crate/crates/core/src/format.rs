//! Number formatting shared by the dumps and exporters.

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Shortest decimal text of `x` rounded to 12 significant digits.
pub fn sig12(x: f64) -> String {
    format!("{:?}", round12(x))
}
