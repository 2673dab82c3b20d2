//! Helpers shared by the integration tests.
#![allow(dead_code)]

/// Standard normal distribution function by the all-positive Taylor series
/// `Φ(x) = ½ + φ(x)(x + x³/3 + x⁵/15 + ...)`, accurate to about 1e-16
/// absolute on `|x| ≤ 8` and independent of any erfc implementation.
pub fn n_cdf(x: f64) -> f64 {
    if x < -8.0 {
        return 0.0;
    }
    if x > 8.0 {
        return 1.0;
    }
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    let mut k = 1.0;
    while sum + term != sum {
        k += 2.0;
        term *= x2 / k;
        sum += term;
    }
    let pdf = (-0.5 * x2).exp() / (2.0 * std::f64::consts::PI).sqrt();
    0.5 + pdf * sum
}
