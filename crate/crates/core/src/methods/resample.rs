//! Nonparametric bootstrap and jackknife, both imputing missing outcomes
//! from the observed success rate of the (re)sample.

use super::mi::z_quantile;
use super::{JackknifeDenominator, JackknifeImputation, RunConfig, TrialData};
use crate::dist::empirical::{mean, quantile_pair};
use crate::dist::sample::sample_binomial;
use crate::dist::RngStream;
use crate::error::{domain, Error, Result};
use crate::intervals::{wald_interval, IntervalEstimate};

/// Observed-rate imputation of `n_miss` outcomes.
fn impute(rng: &mut RngStream, y: u32, f: u32, n_miss: u32) -> u32 {
    sample_binomial(rng, n_miss, f64::from(y) / f64::from(y + f))
}

/// Percentile bootstrap over subject records.
///
/// A resample of `n` records is drawn as its category counts (successes,
/// failures, missing), which has the same law as `n` index draws with
/// replacement. Resamples without observed subjects are redrawn.
pub fn bootstrap_ci(rng: &mut RngStream, data: &TrialData, cfg: &RunConfig) -> Result<IntervalEstimate> {
    if data.n_obs() == 0 {
        return Err(Error::NoObservedData);
    }
    let (n, y, f, m) = (data.n(), data.y_obs(), data.f_obs(), data.n_miss());
    let nf = f64::from(n);
    let p_success = f64::from(y) / nf;
    let p_fail_given_not_success = if f + m == 0 { 0.0 } else { f64::from(f) / f64::from(f + m) };
    let mut stats = Vec::with_capacity(cfg.boot);
    while stats.len() < cfg.boot {
        let ys = sample_binomial(rng, n, p_success);
        let fs = sample_binomial(rng, n - ys, p_fail_given_not_success);
        if ys + fs == 0 {
            continue;
        }
        let ms = n - ys - fs;
        let ym = if ms == 0 { 0 } else { impute(rng, ys, fs, ms) };
        stats.push(f64::from(ys + ym) / nf);
    }
    let estimate = mean(&stats);
    let (lower, upper) = quantile_pair(&mut stats, cfg.alpha / 2.0, 1.0 - cfg.alpha / 2.0);
    Ok(IntervalEstimate::new(estimate.clamp(0.0, 1.0), lower, upper))
}

/// Leave-one-out jackknife with a normal-theory interval.
pub fn jackknife_ci(rng: &mut RngStream, data: &TrialData, cfg: &RunConfig) -> Result<IntervalEstimate> {
    if data.n_obs() == 0 {
        return Err(Error::NoObservedData);
    }
    let n = data.n();
    if n < 2 {
        return domain("jackknife needs at least two subjects");
    }
    let (y, f, m) = (data.y_obs(), data.f_obs(), data.n_miss());
    let denom = match cfg.options.jackknife_denominator {
        JackknifeDenominator::NMinusOne => f64::from(n - 1),
        JackknifeDenominator::N => f64::from(n),
    };

    let mut loo = Vec::with_capacity(n as usize);
    match cfg.options.jackknife_imputation {
        JackknifeImputation::Once => {
            let ym = if m == 0 { 0 } else { impute(rng, y, f, m) };
            let total = y + ym;
            // completed data: `total` successes among n subjects
            for j in 0..n {
                let left_out = u32::from(j < total);
                loo.push(f64::from(total - left_out) / denom);
            }
        }
        JackknifeImputation::PerSubsample => {
            // subjects ordered as successes, failures, missing
            for j in 0..n {
                let (yj, fj, mj) = if j < y {
                    (y - 1, f, m)
                } else if j < y + f {
                    (y, f - 1, m)
                } else {
                    (y, f, m - 1)
                };
                if yj + fj == 0 {
                    return Err(Error::NoObservedData);
                }
                let ym = if mj == 0 { 0 } else { impute(rng, yj, fj, mj) };
                loo.push(f64::from(yj + ym) / denom);
            }
        }
    }

    let center = mean(&loo);
    let nf = f64::from(n);
    let ss: f64 = loo.iter().map(|v| (v - center) * (v - center)).sum();
    let variance = (nf - 1.0) / nf * ss;
    wald_interval(center.clamp(0.0, 1.0), variance, z_quantile(cfg.alpha)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::MethodOptions;

    fn cfg_with(options: MethodOptions) -> RunConfig {
        RunConfig { options, ..Default::default() }
    }

    #[test]
    fn bootstrap_all_success_is_degenerate() {
        let d = TrialData::new(15, 0, 0).unwrap();
        let ci = bootstrap_ci(&mut RngStream::new(0, 0), &d, &RunConfig::default()).unwrap();
        assert_eq!((ci.estimate(), ci.lower(), ci.upper()), (1.0, 1.0, 1.0));
    }

    #[test]
    fn bootstrap_percentiles_bracket_median() {
        let d = TrialData::new(12, 7, 1).unwrap();
        let ci = bootstrap_ci(&mut RngStream::new(3, 0), &d, &RunConfig::default()).unwrap();
        assert!(ci.lower() <= ci.estimate() && ci.estimate() <= ci.upper());
        assert!(ci.length() < 0.5);
        assert!(bootstrap_ci(&mut RngStream::new(3, 0), &TrialData::new(0, 0, 5).unwrap(), &RunConfig::default())
            .unwrap_err()
            .is_undefined());
    }

    #[test]
    fn bootstrap_resample_law_matches_index_resampling() {
        // category counts drawn by the two-stage binomial versus explicit
        // index draws with replacement
        // 5 successes, 3 failures, 2 missing
        let mut rng = RngStream::new(77, 0);
        let reps = 200_000;
        let mut fast = [0u64; 11];
        let mut slow = [0u64; 11];
        for _ in 0..reps {
            let ys = sample_binomial(&mut rng, 10, 0.5);
            let fs = sample_binomial(&mut rng, 10 - ys, 3.0 / 5.0);
            fast[fs as usize] += 1;
            let mut fs2 = 0;
            for _ in 0..10 {
                let idx = (rng.uniform() * 10.0) as u32;
                if (5..8).contains(&idx) {
                    fs2 += 1;
                }
            }
            slow[fs2] += 1;
        }
        for k in 0..=10 {
            let (a, b) = (fast[k] as f64 / reps as f64, slow[k] as f64 / reps as f64);
            assert!((a - b).abs() < 0.006, "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn jackknife_no_missing_identity() {
        for &(y, f) in &[(7u32, 3u32), (13, 7), (1, 9)] {
            let d = TrialData::new(y, f, 0).unwrap();
            for imp in [JackknifeImputation::Once, JackknifeImputation::PerSubsample] {
                let cfg = cfg_with(MethodOptions { jackknife_imputation: imp, ..Default::default() });
                let ci = jackknife_ci(&mut RngStream::new(0, 0), &d, &cfg).unwrap();
                let p = f64::from(y) / f64::from(y + f);
                assert!((ci.estimate() - p).abs() < 1e-12);
                // the jackknife variance of a proportion is p (1 - p) / (n - 1)
                let n = f64::from(y + f);
                let half = z_quantile(0.05).unwrap() * (p * (1.0 - p) / (n - 1.0)).sqrt();
                assert!((ci.upper() - (p + half)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jackknife_all_success_is_degenerate() {
        let d = TrialData::new(10, 0, 0).unwrap();
        let ci = jackknife_ci(&mut RngStream::new(0, 0), &d, &RunConfig::default()).unwrap();
        assert_eq!((ci.lower(), ci.upper()), (1.0, 1.0));
    }

    #[test]
    fn jackknife_per_subsample_matches_direct_loop() {
        let d = TrialData::new(6, 2, 2).unwrap();
        let cfg = RunConfig::default();
        let ci = jackknife_ci(&mut RngStream::new(4, 4), &d, &cfg).unwrap();
        let mut rng = RngStream::new(4, 4);
        let mut est = Vec::new();
        for (yj, fj, mj) in std::iter::repeat_n((5u32, 2u32, 2u32), 6)
            .chain(std::iter::repeat_n((6, 1, 2), 2))
            .chain(std::iter::repeat_n((6, 2, 1), 2))
        {
            let ym = sample_binomial(&mut rng, mj, f64::from(yj) / f64::from(yj + fj));
            est.push(f64::from(yj + ym) / 9.0);
        }
        let c = mean(&est);
        let var = 0.9 * est.iter().map(|e| (e - c) * (e - c)).sum::<f64>();
        assert!((ci.estimate() - c).abs() < 1e-15);
        assert!((ci.upper() - c - z_quantile(0.05).unwrap() * var.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn jackknife_undefined_cases() {
        let cfg = RunConfig::default();
        assert!(jackknife_ci(&mut RngStream::new(0, 0), &TrialData::new(0, 0, 3).unwrap(), &cfg)
            .unwrap_err()
            .is_undefined());
        // leaving out the only observed subject
        assert!(jackknife_ci(&mut RngStream::new(0, 0), &TrialData::new(1, 0, 3).unwrap(), &cfg)
            .unwrap_err()
            .is_undefined());
        let once = cfg_with(MethodOptions { jackknife_imputation: JackknifeImputation::Once, ..Default::default() });
        assert!(jackknife_ci(&mut RngStream::new(0, 0), &TrialData::new(1, 0, 3).unwrap(), &once).is_ok());
    }
}
