//! Multiple-imputation estimators pooled with Rubin's rules.

use super::grid::shortest_beta_interval;
use super::{BetaMiCenter, LogitBoundary, LogitDf, PriorSpec, RunConfig, TrialData, WilsonQuantile};
use crate::dist::sample::{sample_beta_binomial, BetaSampler};
use crate::dist::{normal_quantile, student_t_quantile, RngStream};
use crate::error::{domain, Error, Result};
use crate::intervals::{wald_interval, wilson_from_moments_with_quantile, IntervalEstimate};
use crate::rubin::{barnard_rubin_df, pool, rubin_df, ImputedDraws};

/// One posterior-predictive draw of the number of successes among the
/// missing subjects.
pub fn draw_imputation(rng: &mut RngStream, data: &TrialData, prior: &PriorSpec) -> u32 {
    sample_beta_binomial(
        rng,
        data.n_miss(),
        prior.alpha + f64::from(data.y_obs()),
        prior.beta + f64::from(data.f_obs()),
    )
}

/// Completed-data success counts for `D` imputations.
fn completed_counts(rng: &mut RngStream, data: &TrialData, prior: &PriorSpec, d: usize) -> Vec<u32> {
    (0..d).map(|_| data.y_obs() + draw_imputation(rng, data, prior)).collect()
}

pub(crate) fn z_quantile(alpha: f64) -> Result<f64> {
    normal_quantile(1.0 - alpha / 2.0)
}

fn proportion_draws(counts: &[u32], n: u32) -> ImputedDraws {
    let nf = f64::from(n);
    let mut draws = ImputedDraws::with_capacity(counts.len());
    for &y in counts {
        let p = f64::from(y) / nf;
        draws.push(p, p * (1.0 - p) / nf);
    }
    draws
}

/// Wald interval on the pooled proportion with the normal critical value.
pub fn wald_mi(rng: &mut RngStream, data: &TrialData, prior: &PriorSpec, cfg: &RunConfig) -> Result<IntervalEstimate> {
    let counts = completed_counts(rng, data, prior, cfg.d);
    let pooled = pool(&proportion_draws(&counts, data.n()), cfg.inflate_between)?;
    wald_interval(pooled.mean, pooled.total, z_quantile(cfg.alpha)?)
}

/// Wilson interval with the effective sample size `n / (1 + r)`, where `r`
/// is the relative increase in variance due to missingness.
pub fn wilson_mi(
    rng: &mut RngStream,
    data: &TrialData,
    prior: &PriorSpec,
    cfg: &RunConfig,
) -> Result<IntervalEstimate> {
    let counts = completed_counts(rng, data, prior, cfg.d);
    let n = data.n();
    let pooled = pool(&proportion_draws(&counts, n), cfg.inflate_between)?;
    let p = pooled.mean;
    let z = z_quantile(cfg.alpha)?;
    let within = p * (1.0 - p) / f64::from(n);
    if within <= 0.0 {
        return wilson_from_moments_with_quantile(p, 0.0, n, z);
    }
    let factor = if cfg.inflate_between { 1.0 + 1.0 / cfg.d as f64 } else { 1.0 };
    let between = factor * pooled.between;
    let quantile = match cfg.options.wilson_quantile {
        WilsonQuantile::Z => z,
        WilsonQuantile::T => student_t_quantile(1.0 - cfg.alpha / 2.0, rubin_df(cfg.d, within, pooled.between))?,
    };
    wilson_from_moments_with_quantile(p, within + between, n, quantile)
}

fn expit(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Wald interval on the log-odds scale, back-transformed.
pub fn logodds_mi(
    rng: &mut RngStream,
    data: &TrialData,
    prior: &PriorSpec,
    cfg: &RunConfig,
) -> Result<IntervalEstimate> {
    let n = data.n();
    if n < 2 {
        return domain("log-odds MI needs at least two subjects");
    }
    let counts = completed_counts(rng, data, prior, cfg.d);
    let mut draws = ImputedDraws::with_capacity(cfg.d);
    for y in counts {
        let boundary = y == 0 || y == n;
        let shift = match cfg.options.logit_boundary {
            LogitBoundary::HaldaneAll => 0.5,
            LogitBoundary::HaldaneBoundary if boundary => 0.5,
            LogitBoundary::Undefined if boundary => {
                return Err(Error::Undefined("completed dataset with all successes or all failures".into()))
            }
            _ => 0.0,
        };
        let s = f64::from(y) + shift;
        let f = f64::from(n - y) + shift;
        draws.push((s / f).ln(), 1.0 / s + 1.0 / f);
    }
    let pooled = pool(&draws, cfg.inflate_between)?;
    let nu_com = match cfg.options.logit_df {
        LogitDf::NMinusTwo => n.saturating_sub(2),
        LogitDf::NMinusOne => n - 1,
        LogitDf::ObservedMinusOne => data.n_obs().saturating_sub(1),
    };
    let df = barnard_rubin_df(cfg.d, pooled.within, pooled.between, nu_com.max(1) + 1)?;
    let half = student_t_quantile(1.0 - cfg.alpha / 2.0, df)? * pooled.total.sqrt();
    Ok(IntervalEstimate::new(expit(pooled.mean), expit(pooled.mean - half), expit(pooled.mean + half)))
}

/// Moment-matched Beta approximation to the pooled posterior, summarised by
/// its shortest grid interval.
pub fn beta_mi(rng: &mut RngStream, data: &TrialData, prior: &PriorSpec, cfg: &RunConfig) -> Result<IntervalEstimate> {
    let n = data.n();
    let counts = completed_counts(rng, data, prior, cfg.d);
    let mut draws = ImputedDraws::with_capacity(cfg.d);
    for y in counts {
        let a = prior.alpha_post + f64::from(y);
        let b = prior.beta_post + f64::from(n - y);
        let s = a + b;
        let estimate = match cfg.options.beta_mi_center {
            BetaMiCenter::Draw => BetaSampler::new(a, b).sample(rng),
            BetaMiCenter::PosteriorMean => a / s,
        };
        draws.push(estimate, a * b / (s * s * (s + 1.0)));
    }
    let pooled = pool(&draws, cfg.inflate_between)?;
    let mu = pooled.mean;
    let Some((a, b)) = moment_match(mu, pooled.total) else {
        return Ok(IntervalEstimate::new(mu.clamp(0.0, 1.0), 0.0, 1.0).with_fallback());
    };
    let (lower, upper) = shortest_beta_interval(a, b, 1.0 - cfg.alpha, cfg.grid_step)?;
    Ok(IntervalEstimate::new(mu, lower, upper))
}

/// Shape parameters of the moment-matched Beta for given pooled moments.
pub fn moment_match(mean: f64, variance: f64) -> Option<(f64, f64)> {
    let k = mean * (1.0 - mean) / variance - 1.0;
    (k > 0.0 && k.is_finite()).then_some((mean * k, (1.0 - mean) * k))
}
