//! Rubin's combining rules for a scalar estimand.

use serde::Serialize;

use crate::dist::empirical::{mean, sample_variance};
use crate::error::{domain, Error, Result};

/// Per-imputation estimates and their complete-data variances.
#[derive(Clone, Debug, Default)]
pub struct ImputedDraws {
    estimates: Vec<f64>,
    within_variances: Vec<f64>,
}

impl ImputedDraws {
    pub fn new(estimates: Vec<f64>, within_variances: Vec<f64>) -> Result<Self> {
        if estimates.len() != within_variances.len() {
            return Err(Error::LengthMismatch(estimates.len(), within_variances.len()));
        }
        if estimates.len() < 2 {
            return domain(format!("pooling needs at least 2 imputations, got {}", estimates.len()));
        }
        if let Some(v) = within_variances.iter().find(|v| !(**v >= 0.0)) {
            return domain(format!("within-imputation variance must be non-negative, got {v}"));
        }
        Ok(Self { estimates, within_variances })
    }

    pub fn with_capacity(d: usize) -> Self {
        Self { estimates: Vec::with_capacity(d), within_variances: Vec::with_capacity(d) }
    }

    pub(crate) fn push(&mut self, estimate: f64, within: f64) {
        debug_assert!(within >= 0.0);
        self.estimates.push(estimate);
        self.within_variances.push(within);
    }

    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn within_variances(&self) -> &[f64] {
        &self.within_variances
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PooledResult {
    pub mean: f64,
    pub within: f64,
    pub between: f64,
    pub total: f64,
    /// Rubin's degrees of freedom; `+inf` when `between` is zero.
    pub df: f64,
}

/// Pool `D >= 2` imputations.
///
/// With `inflate_between` the between-imputation variance enters the total
/// as `(1 + 1/D) B`; without it the plain sum `W + B` is used.
pub fn pool(draws: &ImputedDraws, inflate_between: bool) -> Result<PooledResult> {
    let d = draws.len();
    if d < 2 {
        return domain(format!("pooling needs at least 2 imputations, got {d}"));
    }
    let m = mean(&draws.estimates);
    let within = mean(&draws.within_variances);
    let between = sample_variance(&draws.estimates);
    let factor = if inflate_between { 1.0 + 1.0 / d as f64 } else { 1.0 };
    let total = within + factor * between;
    Ok(PooledResult { mean: m, within, between, total, df: rubin_df(d, within, between) })
}

/// `(D - 1) (1 + W / ((1 + 1/D) B))^2`, infinite when `B = 0`.
pub fn rubin_df(d: usize, within: f64, between: f64) -> f64 {
    let inflated = (1.0 + 1.0 / d as f64) * between;
    if inflated <= 0.0 {
        return f64::INFINITY;
    }
    let r = within / inflated;
    (d as f64 - 1.0) * (1.0 + r) * (1.0 + r)
}

/// Barnard–Rubin small-sample degrees of freedom, floored at 1.
pub fn barnard_rubin_df(d: usize, within: f64, between: f64, n_complete: u32) -> Result<f64> {
    if d < 2 {
        return domain(format!("D must be at least 2, got {d}"));
    }
    if n_complete < 2 {
        return domain(format!("complete-data sample size must be at least 2, got {n_complete}"));
    }
    let nu_com = f64::from(n_complete) - 1.0;
    let inflated = (1.0 + 1.0 / d as f64) * between;
    let total = within + inflated;
    let gamma = if inflated > 0.0 { inflated / total } else { 0.0 };
    let nu_obs = (nu_com + 1.0) / (nu_com + 3.0) * nu_com * (1.0 - gamma);
    let nu = if gamma == 0.0 {
        nu_obs
    } else {
        let nu_m = (d as f64 - 1.0) / (gamma * gamma);
        if nu_obs <= 0.0 {
            0.0
        } else {
            1.0 / (1.0 / nu_m + 1.0 / nu_obs)
        }
    };
    Ok(nu.max(1.0))
}
