//! The eleven interval estimators for a binomial success rate with missing
//! outcomes, behind one dispatching [`Estimator`].

mod bayes;
mod cpmi;
mod grid;
mod mi;
mod resample;
mod single;
mod types;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

pub use bayes::{full_bayes, posterior_draws};
pub use cpmi::{modified_cpmi, CpmiTables};
pub use grid::{shortest_beta_interval, COVERAGE_EPS};
pub use mi::{beta_mi, draw_imputation, logodds_mi, moment_match, wald_mi, wilson_mi};
pub use resample::{bootstrap_ci, jackknife_ci};
pub use single::{complete_case, impute_all_failure, impute_all_success};
pub use types::{
    BayesSummary, BetaMiCenter, CpmiDf, CpmiForm, JackknifeDenominator, JackknifeImputation, LogitBoundary, LogitDf,
    MethodId, MethodOptions, PriorSpec, RunConfig, TrialData, WilsonQuantile,
};

use crate::dist::rng::stream_key;
use crate::dist::RngStream;
use crate::error::Result;
use crate::intervals::IntervalEstimate;

/// A validated configuration plus per-sample-size tables reused across calls.
///
/// Shareable across threads; results depend only on the arguments of each
/// call, never on which calls came before.
#[derive(Debug)]
pub struct Estimator {
    cfg: RunConfig,
    prior: PriorSpec,
    cpmi_tables: RwLock<HashMap<u32, Arc<CpmiTables>>>,
}

impl Estimator {
    pub fn new(cfg: RunConfig, prior: PriorSpec) -> Result<Self> {
        cfg.validate()?;
        prior.validate()?;
        Ok(Self { cfg, prior, cpmi_tables: RwLock::new(HashMap::new()) })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    fn tables(&self, n: u32) -> Result<Arc<CpmiTables>> {
        if let Some(t) = self.cpmi_tables.read().expect("table cache poisoned").get(&n) {
            return Ok(Arc::clone(t));
        }
        let built = Arc::new(CpmiTables::new(n, self.cfg.alpha)?);
        let mut cache = self.cpmi_tables.write().expect("table cache poisoned");
        Ok(Arc::clone(cache.entry(n).or_insert(built)))
    }

    /// Run `method` on `data`, drawing randomness from `rng`.
    pub fn estimate(&self, method: MethodId, data: &TrialData, rng: &mut RngStream) -> Result<IntervalEstimate> {
        let (cfg, prior, alpha) = (&self.cfg, &self.prior, self.cfg.alpha);
        match method {
            MethodId::CompleteCase => complete_case(data, alpha),
            MethodId::ImputeSuccess => impute_all_success(data, alpha),
            MethodId::ImputeFailure => impute_all_failure(data, alpha),
            MethodId::WaldMi => wald_mi(rng, data, prior, cfg),
            MethodId::WilsonMi => wilson_mi(rng, data, prior, cfg),
            MethodId::LogOddsMi => logodds_mi(rng, data, prior, cfg),
            MethodId::Bootstrap => bootstrap_ci(rng, data, cfg),
            MethodId::Jackknife => jackknife_ci(rng, data, cfg),
            MethodId::ModifiedCpmi => cpmi::modified_cpmi_with(&*self.tables(data.n())?, rng, data, prior, cfg),
            MethodId::FullBayes => full_bayes(rng, data, prior, cfg),
            MethodId::BetaMi => beta_mi(rng, data, prior, cfg),
        }
    }

    /// Run `method` on its own stream under the configured seed.
    pub fn estimate_seeded(&self, method: MethodId, data: &TrialData) -> Result<IntervalEstimate> {
        let mut rng = RngStream::new(self.cfg.seed, method_stream(method));
        self.estimate(method, data, &mut rng)
    }
}

/// Stream id used by [`Estimator::estimate_seeded`].
pub fn method_stream(method: MethodId) -> u64 {
    stream_key(&[0x0061_6e61_6c79_7a65, method.index() as u64])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_method_runs_and_is_deterministic() {
        let est = Estimator::new(RunConfig::default(), PriorSpec::default()).unwrap();
        let data = TrialData::new(12, 7, 1).unwrap();
        for m in MethodId::ALL {
            let a = est.estimate_seeded(m, &data).unwrap();
            let b = est.estimate_seeded(m, &data).unwrap();
            assert_eq!(a, b, "{m}");
            assert!(a.lower() <= a.upper());
            if !matches!(m, MethodId::WaldMi | MethodId::ModifiedCpmi | MethodId::Jackknife) {
                assert!(a.lower() >= 0.0 && a.upper() <= 1.0, "{m}: {a:?}");
            }
        }
    }

    #[test]
    fn cached_cpmi_matches_uncached() {
        let est = Estimator::new(RunConfig::default(), PriorSpec::default()).unwrap();
        let data = TrialData::new(30, 2, 4).unwrap();
        let cached = est.estimate(MethodId::ModifiedCpmi, &data, &mut RngStream::new(1, 1)).unwrap();
        let direct =
            modified_cpmi(&mut RngStream::new(1, 1), &data, &PriorSpec::default(), &RunConfig::default()).unwrap();
        assert_eq!(cached, direct);
    }

    #[test]
    fn invalid_configuration_is_rejected() {
        assert!(Estimator::new(RunConfig { d: 1, ..Default::default() }, PriorSpec::default()).is_err());
        let bad = PriorSpec { alpha: -1.0, ..PriorSpec::default() };
        assert!(Estimator::new(RunConfig::default(), bad).is_err());
    }
}
