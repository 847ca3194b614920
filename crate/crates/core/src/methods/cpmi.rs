//! Modified Clopper–Pearson multiple imputation.
//!
//! Each completed dataset contributes the distances from its estimate to
//! its exact lower and upper bounds. The sampling variance of each distance
//! is estimated by a parametric bootstrap around the completed-data
//! proportion, the two sides are pooled separately with Rubin's rules, and
//! the final interval is
//!
//! `(p̄ - m̄_lo - t_lo sqrt(T_lo), p̄ + m̄_hi + t_hi sqrt(T_hi))`.
//!
//! With [`CpmiForm::Bounds`] the bounds themselves are pooled instead of the
//! distances; the pooled centres coincide, only the variances differ.

use super::{CpmiDf, CpmiForm, PriorSpec, RunConfig, TrialData};
use crate::dist::empirical::sample_variance;
use crate::dist::sample::BinomialGridSampler;
use crate::dist::{student_t_quantile, RngStream};
use crate::error::Result;
use crate::intervals::{CpTable, IntervalEstimate};
use crate::methods::mi::draw_imputation;
use crate::rubin::{barnard_rubin_df, pool, ImputedDraws, PooledResult};

/// Exact bounds and binomial sampling tables for one sample size.
#[derive(Clone, Debug)]
pub struct CpmiTables {
    cp: CpTable,
    sampler: BinomialGridSampler,
}

impl CpmiTables {
    pub fn new(n: u32, alpha: f64) -> Result<Self> {
        Ok(Self { cp: CpTable::new(n, alpha)?, sampler: BinomialGridSampler::new(n) })
    }

    pub fn n(&self) -> u32 {
        self.cp.n()
    }

    pub fn alpha(&self) -> f64 {
        self.cp.alpha()
    }

    /// Lower and upper quantities pooled for a success count `y`.
    fn sides(&self, y: u32, form: CpmiForm) -> (f64, f64) {
        let (lo, hi) = (self.cp.lower(y), self.cp.upper(y));
        match form {
            CpmiForm::Margins => {
                let p = f64::from(y) / f64::from(self.n());
                (p - lo, hi - p)
            }
            CpmiForm::Bounds => (lo, hi),
        }
    }
}

pub fn modified_cpmi(
    rng: &mut RngStream,
    data: &TrialData,
    prior: &PriorSpec,
    cfg: &RunConfig,
) -> Result<IntervalEstimate> {
    let tables = CpmiTables::new(data.n(), cfg.alpha)?;
    modified_cpmi_with(&tables, rng, data, prior, cfg)
}

pub(crate) fn modified_cpmi_with(
    tables: &CpmiTables,
    rng: &mut RngStream,
    data: &TrialData,
    prior: &PriorSpec,
    cfg: &RunConfig,
) -> Result<IntervalEstimate> {
    let n = data.n();
    debug_assert_eq!(tables.n(), n);
    let form = cfg.options.cpmi_form;
    let mut estimates = Vec::with_capacity(cfg.d);
    let mut lower = ImputedDraws::with_capacity(cfg.d);
    let mut upper = ImputedDraws::with_capacity(cfg.d);
    let mut boot_lo = vec![0.0; cfg.dd];
    let mut boot_hi = vec![0.0; cfg.dd];

    for _ in 0..cfg.d {
        let y = data.y_obs() + draw_imputation(rng, data, prior);
        estimates.push(f64::from(y) / f64::from(n));
        for (lo, hi) in boot_lo.iter_mut().zip(boot_hi.iter_mut()) {
            (*lo, *hi) = tables.sides(tables.sampler.sample(rng, y), form);
        }
        let (lo, hi) = tables.sides(y, form);
        lower.push(lo, sample_variance(&boot_lo));
        upper.push(hi, sample_variance(&boot_hi));
    }

    let p_bar = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let lo = pool(&lower, cfg.inflate_between)?;
    let hi = pool(&upper, cfg.inflate_between)?;
    let t_lo = critical_value(&lo, cfg, n)?;
    let t_hi = critical_value(&hi, cfg, n)?;
    let (lower_end, upper_end) = match form {
        CpmiForm::Margins => (p_bar - lo.mean - t_lo * lo.total.sqrt(), p_bar + hi.mean + t_hi * hi.total.sqrt()),
        CpmiForm::Bounds => (lo.mean - t_lo * lo.total.sqrt(), hi.mean + t_hi * hi.total.sqrt()),
    };
    Ok(IntervalEstimate::new(p_bar, lower_end, upper_end))
}

fn critical_value(pooled: &PooledResult, cfg: &RunConfig, n: u32) -> Result<f64> {
    let df = match cfg.options.cpmi_df {
        CpmiDf::Rubin => pooled.df,
        CpmiDf::BarnardRubin => barnard_rubin_df(cfg.d, pooled.within, pooled.between, n.max(2))?,
    };
    student_t_quantile(1.0 - cfg.alpha / 2.0, df)
}
