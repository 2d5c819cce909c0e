use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959963984540054;

/// A flag rate with its Wilson score interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub count: usize,
    pub total: usize,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl Rate {
    pub fn new(count: usize, total: usize) -> Self {
        let (wilson_low, wilson_high) = wilson_interval(count, total, WILSON_Z);
        let rate = if total == 0 { 0.0 } else { count as f64 / total as f64 };
        Rate { count, total, rate, wilson_low, wilson_high }
    }
}

/// Wilson score interval; `(0, 1)` when there are no trials.
pub fn wilson_interval(count: usize, total: usize, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = count as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the endpoints at 0 and 1 are exact; the formula leaves rounding dust there
    let lo = if count == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if count == total { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}
