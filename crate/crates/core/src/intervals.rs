//! Closed-form confidence intervals for a single binomial proportion.

use serde::{Deserialize, Serialize};

use crate::dist::special::{beta_quantile, normal_quantile};
use crate::error::{domain, Result};

/// A point estimate with two-sided interval bounds.
///
/// Bounds are never clamped to `[0, 1]`: Wald-type constructions can and do
/// report upper bounds above one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    estimate: f64,
    lower: f64,
    upper: f64,
    length: f64,
    /// Set when the method fell back to a conventional interval because its
    /// construction was infeasible for this input.
    #[serde(default)]
    fallback: bool,
}

impl IntervalEstimate {
    pub fn new(estimate: f64, lower: f64, upper: f64) -> Self {
        debug_assert!(lower <= upper, "interval bounds out of order: ({lower}, {upper})");
        debug_assert!((0.0..=1.0).contains(&estimate), "estimate {estimate} outside [0, 1]");
        Self { estimate, lower, upper, length: upper - lower, fallback: false }
    }

    pub(crate) fn with_fallback(mut self) -> Self {
        self.fallback = true;
        self
    }

    pub fn estimate(&self) -> f64 {
        self.estimate
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_fallback(&self) -> bool {
        self.fallback
    }

    /// Closed-interval containment, used for coverage.
    pub fn covers(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

fn cp_lower(y: u32, n: u32, tail: f64) -> f64 {
    if y == 0 {
        0.0
    } else {
        beta_quantile(tail, f64::from(y), f64::from(n - y + 1)).expect("valid beta shape")
    }
}

fn cp_upper(y: u32, n: u32, tail: f64) -> f64 {
    if y == n {
        1.0
    } else {
        beta_quantile(1.0 - tail, f64::from(y + 1), f64::from(n - y)).expect("valid beta shape")
    }
}

/// Exact (Clopper–Pearson) two-sided interval for `y` successes in `n` trials.
pub fn clopper_pearson(y: u32, n: u32, alpha: f64) -> Result<IntervalEstimate> {
    check_alpha(alpha)?;
    if n == 0 {
        return domain("Clopper-Pearson interval needs n >= 1");
    }
    if y > n {
        return domain(format!("successes {y} exceed trials {n}"));
    }
    let tail = alpha / 2.0;
    Ok(IntervalEstimate::new(f64::from(y) / f64::from(n), cp_lower(y, n, tail), cp_upper(y, n, tail)))
}

/// One-sided exact lower confidence bound at level `1 - alpha`.
pub fn clopper_pearson_lower_one_sided(y: u32, n: u32, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if n == 0 || y > n {
        return domain(format!("invalid binomial counts y={y}, n={n}"));
    }
    Ok(cp_lower(y, n, alpha))
}

/// Clopper–Pearson bounds for every `y = 0..=n` at a fixed `n` and `alpha`.
#[derive(Clone, Debug)]
pub struct CpTable {
    n: u32,
    alpha: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl CpTable {
    pub fn new(n: u32, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if n == 0 {
            return domain("Clopper-Pearson table needs n >= 1");
        }
        let tail = alpha / 2.0;
        let lower = (0..=n).map(|y| cp_lower(y, n, tail)).collect();
        let upper = (0..=n).map(|y| cp_upper(y, n, tail)).collect();
        Ok(Self { n, alpha, lower, upper })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lower(&self, y: u32) -> f64 {
        self.lower[y as usize]
    }

    pub fn upper(&self, y: u32) -> f64 {
        self.upper[y as usize]
    }
}

/// `center ± quantile · sqrt(variance)`, unclamped.
pub fn wald_interval(center: f64, variance: f64, quantile: f64) -> Result<IntervalEstimate> {
    if !(variance >= 0.0) {
        return domain(format!("variance must be non-negative, got {variance}"));
    }
    let half = quantile * variance.sqrt();
    Ok(IntervalEstimate::new(center, center - half, center + half))
}

/// Wilson score interval around `mean` for an effective sample size
/// `n_eff`, using critical value `quantile`: the two roots in `p` of
/// `(mean - p)^2 = quantile^2 p (1 - p) / n_eff`.
pub fn wilson_interval(mean: f64, n_eff: f64, quantile: f64) -> Result<IntervalEstimate> {
    if !(0.0..=1.0).contains(&mean) {
        return domain(format!("Wilson centre {mean} outside [0, 1]"));
    }
    if !(n_eff > 0.0) {
        return domain(format!("effective sample size must be positive, got {n_eff}"));
    }
    let q2n = quantile * quantile / n_eff;
    let denom = 1.0 + q2n;
    let center = (mean + q2n / 2.0) / denom;
    let half = quantile / denom * (mean * (1.0 - mean) / n_eff + q2n / (4.0 * n_eff)).sqrt();
    let lower = (center - half).max(0.0);
    let upper = (center + half).min(1.0);
    Ok(IntervalEstimate::new(mean, lower, upper))
}

/// Wilson-form interval with effective sample size `mean (1 - mean) / total_variance`.
///
/// When `mean` sits on a boundary the effective size is undefined and `n` is
/// used instead.
pub fn wilson_from_moments(mean: f64, total_variance: f64, n: u32, alpha: f64) -> Result<IntervalEstimate> {
    check_alpha(alpha)?;
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    wilson_from_moments_with_quantile(mean, total_variance, n, z)
}

pub fn wilson_from_moments_with_quantile(
    mean: f64,
    total_variance: f64,
    n: u32,
    quantile: f64,
) -> Result<IntervalEstimate> {
    if n == 0 {
        return domain("Wilson interval needs n >= 1");
    }
    let spread = mean * (1.0 - mean);
    let n_eff = if spread > 0.0 && total_variance > 0.0 { spread / total_variance } else { f64::from(n) };
    wilson_interval(mean, n_eff, quantile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::sample::binomial_pmf;

    fn round2(x: f64) -> f64 {
        (x * 100.0).round() / 100.0
    }

    #[test]
    fn clopper_pearson_worked_examples() {
        let ci = clopper_pearson(13, 20, 0.05).unwrap();
        assert_eq!(ci.estimate(), 0.65);
        assert_eq!((round2(ci.lower()), round2(ci.upper())), (0.41, 0.85));

        let ci = clopper_pearson(12, 20, 0.05).unwrap();
        assert_eq!(ci.estimate(), 0.60);
        assert_eq!((round2(ci.lower()), round2(ci.upper())), (0.36, 0.81));

        let ci = clopper_pearson(0, 10, 0.05).unwrap();
        assert_eq!(ci.lower(), 0.0);
        let ci = clopper_pearson(5, 5, 0.05).unwrap();
        assert_eq!(ci.upper(), 1.0);
    }

    #[test]
    fn one_sided_lower_bound_cit07() {
        let lb = clopper_pearson_lower_one_sided(42, 48, 0.05).unwrap();
        assert_eq!((lb * 1000.0).round() / 1000.0, 0.768);
    }

    #[test]
    fn clopper_pearson_rejects_bad_counts() {
        assert!(clopper_pearson(4, 3, 0.05).is_err());
        assert!(clopper_pearson(0, 0, 0.05).is_err());
        assert!(clopper_pearson(1, 3, 1.5).is_err());
    }

    #[test]
    fn clopper_pearson_exhaustive_coverage() {
        for n in 1..=50u32 {
            let table = CpTable::new(n, 0.05).unwrap();
            for &p in &[0.7, 0.8, 0.9, 0.99] {
                let cover: f64 = (0..=n)
                    .filter(|&y| table.lower(y) <= p && p <= table.upper(y))
                    .map(|y| binomial_pmf(n, y, p))
                    .sum();
                assert!(cover >= 0.95 - 1e-12, "n={n} p={p} coverage={cover}");
            }
        }
    }

    #[test]
    fn clopper_pearson_mirrors_failures() {
        for n in 1..=30u32 {
            for y in 0..=n {
                let s = clopper_pearson(y, n, 0.05).unwrap();
                let f = clopper_pearson(n - y, n, 0.05).unwrap();
                assert!((s.lower() - (1.0 - f.upper())).abs() < 1e-12);
                assert!((s.upper() - (1.0 - f.lower())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cp_table_agrees_with_direct_calls() {
        let table = CpTable::new(17, 0.05).unwrap();
        for y in 0..=17 {
            let ci = clopper_pearson(y, 17, 0.05).unwrap();
            assert_eq!(table.lower(y), ci.lower());
            assert_eq!(table.upper(y), ci.upper());
        }
    }

    #[test]
    fn wald_examples() {
        let ci = wald_interval(0.5, 0.0, 1.96).unwrap();
        assert_eq!((ci.lower(), ci.upper()), (0.5, 0.5));
        let ci = wald_interval(0.9, 0.0025, 1.959964).unwrap();
        assert!((ci.lower() - 0.8020).abs() < 1e-4 && (ci.upper() - 0.9980).abs() < 1e-4);
        let ci = wald_interval(0.99, 0.01, 1.959964).unwrap();
        assert!((ci.upper() - 1.186).abs() < 1e-3);
        assert!(wald_interval(0.5, -1.0, 1.96).is_err());
    }

    #[test]
    fn wilson_classic_case() {
        let ci = wilson_from_moments(0.5, 0.25 / 100.0, 100, 0.05).unwrap();
        // textbook Wilson for 50/100
        let z = 1.959963984540054_f64;
        let n = 100.0;
        let center = (0.5 + z * z / (2.0 * n)) / (1.0 + z * z / n);
        let half = z / (1.0 + z * z / n) * (0.25 / n + z * z / (4.0 * n * n)).sqrt();
        assert!((ci.lower() - (center - half)).abs() < 1e-12);
        assert!((ci.upper() - (center + half)).abs() < 1e-12);
        assert!((ci.lower() - 0.404).abs() < 0.002 && (ci.upper() - 0.596).abs() < 0.002);
    }

    #[test]
    fn wilson_boundary_fallback_and_roots() {
        let ci = wilson_from_moments(1.0, 0.0, 20, 0.05).unwrap();
        assert_eq!(ci.upper(), 1.0);
        assert!(ci.lower() > 0.8 && ci.lower() < 1.0);

        let z = 1.959963984540054_f64;
        for &(mean, var, n) in &[(0.63, 0.012, 20u32), (0.93, 0.0015, 48), (0.2, 0.05, 10)] {
            let ci = wilson_from_moments(mean, var, n, 0.05).unwrap();
            let n_eff = mean * (1.0 - mean) / var;
            for p in [ci.lower(), ci.upper()] {
                let resid = (mean - p).powi(2) - z * z * p * (1.0 - p) / n_eff;
                assert!(resid.abs() < 1e-10, "residual {resid}");
                assert!((0.0..=1.0).contains(&p));
            }
        }
    }
}
