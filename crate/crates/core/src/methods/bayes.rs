use super::{BayesSummary, PriorSpec, RunConfig, TrialData};
use crate::dist::empirical::{mean, median, quantile_pair};
use crate::dist::sample::{BetaBinomialSampler, BetaSampler};
use crate::dist::RngStream;
use crate::error::Result;
use crate::intervals::IntervalEstimate;

/// Monte Carlo posterior of the success rate with the missing outcomes
/// integrated out: draw the missing successes from the posterior
/// predictive, then the rate from the completed-data posterior.
pub fn full_bayes(
    rng: &mut RngStream,
    data: &TrialData,
    prior: &PriorSpec,
    cfg: &RunConfig,
) -> Result<IntervalEstimate> {
    let draws = posterior_draws(rng, data, prior, cfg.m);
    summarize(draws, cfg)
}

pub fn posterior_draws(rng: &mut RngStream, data: &TrialData, prior: &PriorSpec, m: usize) -> Vec<f64> {
    let (n, n_miss, y) = (data.n(), data.n_miss(), data.y_obs());
    let predictive = BetaBinomialSampler::new(n_miss, prior.alpha + f64::from(y), prior.beta + f64::from(data.f_obs()));
    let completed: Vec<BetaSampler> = (0..=n_miss)
        .map(|k| {
            let s = y + k;
            BetaSampler::new(prior.alpha_post + f64::from(s), prior.beta_post + f64::from(n - s))
        })
        .collect();
    (0..m)
        .map(|_| {
            let k = if n_miss == 0 { 0 } else { predictive.sample(rng) };
            completed[k as usize].sample(rng)
        })
        .collect()
}

fn summarize(mut draws: Vec<f64>, cfg: &RunConfig) -> Result<IntervalEstimate> {
    let estimate = match cfg.options.bayes_summary {
        BayesSummary::Median => median(&mut draws),
        BayesSummary::Mean => mean(&draws),
    };
    let (lower, upper) = quantile_pair(&mut draws, cfg.alpha / 2.0, 1.0 - cfg.alpha / 2.0);
    Ok(IntervalEstimate::new(estimate, lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::special::beta_quantile;

    #[test]
    fn no_missing_matches_exact_posterior_quantiles() {
        let d = TrialData::new(12, 7, 0).unwrap();
        let prior = PriorSpec::uniform();
        let cfg = RunConfig { m: 200_000, ..Default::default() };
        let ci = full_bayes(&mut RngStream::new(5, 5), &d, &prior, &cfg).unwrap();
        let lo = beta_quantile(0.025, 13.0, 8.0).unwrap();
        let hi = beta_quantile(0.975, 13.0, 8.0).unwrap();
        let med = beta_quantile(0.5, 13.0, 8.0).unwrap();
        assert!((ci.lower() - lo).abs() < 0.003, "{} vs {lo}", ci.lower());
        assert!((ci.upper() - hi).abs() < 0.003, "{} vs {hi}", ci.upper());
        assert!((ci.estimate() - med).abs() < 0.002);

        let cfg = RunConfig {
            options: super::super::MethodOptions { bayes_summary: BayesSummary::Mean, ..Default::default() },
            ..cfg
        };
        let ci = full_bayes(&mut RngStream::new(5, 5), &d, &prior, &cfg).unwrap();
        assert!((ci.estimate() - 13.0 / 21.0).abs() < 0.002);
    }

    #[test]
    fn worked_example_with_default_priors() {
        let d = TrialData::new(12, 7, 1).unwrap();
        let cfg = RunConfig { m: 100_000, ..Default::default() };
        let ci = full_bayes(&mut RngStream::new(9, 1), &d, &PriorSpec::default(), &cfg).unwrap();
        assert!((ci.estimate() - 0.63).abs() < 0.01);
        assert!((ci.lower() - 0.41).abs() < 0.01);
        assert!((ci.upper() - 0.82).abs() < 0.01);
    }

    #[test]
    fn draws_are_reproducible() {
        let d = TrialData::new(42, 3, 3).unwrap();
        let a = posterior_draws(&mut RngStream::new(1, 1), &d, &PriorSpec::default(), 500);
        let b = posterior_draws(&mut RngStream::new(1, 1), &d, &PriorSpec::default(), 500);
        assert_eq!(a, b);
        assert!(a.iter().all(|&p| p > 0.0 && p < 1.0));
    }
}
