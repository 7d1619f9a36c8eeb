//! Benchmark helpers: deterministic synthetic profiles shared by the
//! criterion targets.

use nlclaw_core::PiecewiseConstantProfile;

/// Piecewise-constant profile with `n` cells on [-1, 1] and a reproducible
/// value pattern.
pub fn synthetic_profile(n: usize) -> PiecewiseConstantProfile {
    let breakpoints: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 * 0.7548776662466927; // low-discrepancy angle
            0.5 + 0.5 * (x - x.floor() - 0.5)
        })
        .collect();
    PiecewiseConstantProfile::new(breakpoints, values, 0.3, 0.1).expect("valid profile")
}
