//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use acnet::Dataset;

/// Closed-form Clayton copula cdf.
pub fn clayton_cdf(theta: f64, u: &[f64]) -> f64 {
    let s: f64 = u.iter().map(|x| x.powf(-theta) - 1.0).sum();
    (1.0 + s).powf(-1.0 / theta)
}

/// Closed-form bivariate Clayton density.
pub fn clayton_density(theta: f64, u: f64, v: f64) -> f64 {
    (1.0 + theta)
        * (u * v).powf(-theta - 1.0)
        * (u.powf(-theta) + v.powf(-theta) - 1.0).powf(-2.0 - 1.0 / theta)
}

/// Kolmogorov-Smirnov distance of a sample to the uniform law on (0, 1).
pub fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

/// `k x k` interior grid levels `1/(k+1), ..., k/(k+1)`.
pub fn grid(k: usize) -> Vec<f64> {
    (1..=k).map(|i| i as f64 / (k + 1) as f64).collect()
}

/// Largest gap between the empirical bivariate cdf of `data` and `cdf` on a
/// `k x k` grid.
pub fn empirical_copula_gap(data: &Dataset, k: usize, cdf: impl Fn(f64, f64) -> f64) -> f64 {
    let levels = grid(k);
    let n = data.len() as f64;
    let mut worst: f64 = 0.0;
    for &a in &levels {
        for &b in &levels {
            let count = data.rows().filter(|r| r[0] <= a && r[1] <= b).count() as f64;
            worst = worst.max((count / n - cdf(a, b)).abs());
        }
    }
    worst
}

/// Relative error with an absolute floor.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
