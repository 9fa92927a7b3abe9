//! Small-sample statistics for Bernoulli rates.

/// Two-sided 95% z value.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `failures` successes out of `trials`, at 95%
/// confidence. Zero trials yields the vacuous `[0, 1]`.
pub fn wilson_interval(failures: u64, trials: u64) -> (f64, f64) {
    assert!(failures <= trials, "more failures than trials");
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = failures as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // At the boundaries center and half agree analytically; pin the exact
    // endpoint rather than keeping the rounding residue.
    let lo = if failures == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if failures == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Midpoint median of an unsorted sample. Panics on an empty slice.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
