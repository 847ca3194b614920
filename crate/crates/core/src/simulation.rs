//! Monte Carlo coverage study over a grid of true rates, sample sizes and
//! missing rates.
//!
//! Every `(scenario, replicate)` pair draws its dataset from its own RNG
//! stream, and every method applied to that dataset gets a further stream
//! of its own, so results do not depend on thread count or on which methods
//! are run together.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::rng::stream_key;
use crate::dist::sample::sample_binomial;
use crate::dist::RngStream;
use crate::error::{Error, Result};
use crate::io::{to_csv, write_atomic};
use crate::methods::{Estimator, MethodId, TrialData};

pub const TRUE_RATES: [f64; 4] = [0.7, 0.8, 0.9, 0.99];
pub const SAMPLE_SIZES: [u32; 4] = [10, 20, 30, 50];
pub const MISSING_RATES: [f64; 4] = [0.01, 0.1, 0.2, 0.3];
pub const DEFAULT_REPLICATES: usize = 5000;

const DATA_TAG: u64 = 0xDA7A;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub true_rate: f64,
    pub n: u32,
    pub missing_rate: f64,
    pub replicates: usize,
}

impl Scenario {
    pub fn new(true_rate: f64, n: u32, missing_rate: f64, replicates: usize) -> Result<Self> {
        if !(true_rate > 0.0 && true_rate < 1.0) {
            return Err(Error::Config(format!("true rate must lie in (0, 1), got {true_rate}")));
        }
        if n == 0 {
            return Err(Error::Config("scenario sample size must be positive".into()));
        }
        if !(0.0..1.0).contains(&missing_rate) {
            return Err(Error::Config(format!("missing rate must lie in [0, 1), got {missing_rate}")));
        }
        if replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        Ok(Self { true_rate, n, missing_rate, replicates })
    }

    /// Stream key identifying the cell; independent of `replicates`.
    fn key(&self) -> u64 {
        stream_key(&[self.true_rate.to_bits(), u64::from(self.n), self.missing_rate.to_bits()])
    }

    fn data_stream(&self, seed: u64, replicate: usize) -> RngStream {
        RngStream::new(seed, stream_key(&[self.key(), replicate as u64, DATA_TAG]))
    }

    fn method_stream(&self, seed: u64, replicate: usize, method: MethodId) -> RngStream {
        RngStream::new(seed, stream_key(&[self.key(), replicate as u64, method.index() as u64]))
    }
}

/// The 4 x 4 x 4 grid, ordered by true rate, then sample size, then missing rate.
pub fn default_grid(replicates: usize) -> Vec<Scenario> {
    let mut grid = Vec::with_capacity(64);
    for &p in &TRUE_RATES {
        for &n in &SAMPLE_SIZES {
            for &m in &MISSING_RATES {
                grid.push(Scenario { true_rate: p, n, missing_rate: m, replicates });
            }
        }
    }
    grid
}

/// How the number of missing subjects is generated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingMechanism {
    /// Each subject missing independently; datasets without any missing
    /// subject are redrawn when the missing rate is positive.
    #[default]
    BernoulliAtLeastOne,
    /// Each subject missing independently.
    Bernoulli,
    /// Exactly `ceil(n * missing_rate)` subjects missing.
    FixedCount,
}

impl std::str::FromStr for MissingMechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bernoulli-at-least-one" => Ok(Self::BernoulliAtLeastOne),
            "bernoulli" => Ok(Self::Bernoulli),
            "fixed-count" => Ok(Self::FixedCount),
            _ => Err(Error::Parse(format!("unknown missingness mechanism {s:?}"))),
        }
    }
}

/// Draw one MCAR dataset. Outcomes and missingness are independent, so the
/// missing count is drawn first and the observed successes second.
pub fn generate_replicate(rng: &mut RngStream, scenario: &Scenario, mechanism: MissingMechanism) -> TrialData {
    let (n, r) = (scenario.n, scenario.missing_rate);
    let n_miss = match mechanism {
        MissingMechanism::Bernoulli => sample_binomial(rng, n, r),
        MissingMechanism::BernoulliAtLeastOne if r > 0.0 => loop {
            let k = sample_binomial(rng, n, r);
            if k > 0 {
                break k;
            }
        },
        MissingMechanism::BernoulliAtLeastOne => 0,
        MissingMechanism::FixedCount => ((f64::from(n) * r - 1e-9).ceil().max(0.0) as u32).min(n),
    };
    let n_obs = n - n_miss;
    let y = sample_binomial(rng, n_obs, scenario.true_rate);
    TrialData::new(y, n_obs - y, n_miss).expect("scenario sample size is positive")
}

/// Coverage and average length of one method in one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub method: MethodId,
    pub true_rate: f64,
    pub n: u32,
    pub missing_rate: f64,
    pub replicates: usize,
    /// Mean interval length over defined replicates.
    pub avg_length: f64,
    /// Fraction of defined replicates whose interval contains the true rate.
    pub coverage: f64,
    pub undefined_count: usize,
}

impl ScenarioResult {
    pub fn scenario(&self) -> Scenario {
        Scenario { true_rate: self.true_rate, n: self.n, missing_rate: self.missing_rate, replicates: self.replicates }
    }
}

#[derive(Clone, Copy, Default)]
struct Tally {
    covered: usize,
    defined: usize,
    undefined: usize,
    length_sum: f64,
}

type Outcome = Option<(bool, f64)>;

fn run_replicate(
    estimator: &Estimator,
    scenario: &Scenario,
    methods: &[MethodId],
    mechanism: MissingMechanism,
    replicate: usize,
) -> Result<Vec<Outcome>> {
    let seed = estimator.config().seed;
    let data = generate_replicate(&mut scenario.data_stream(seed, replicate), scenario, mechanism);
    methods
        .iter()
        .map(|&m| {
            let mut rng = scenario.method_stream(seed, replicate, m);
            match estimator.estimate(m, &data, &mut rng) {
                Ok(ci) => Ok(Some((ci.covers(scenario.true_rate), ci.length()))),
                Err(e) if e.is_undefined() => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Run every replicate of `scenario` for each method, in parallel on the
/// current rayon pool. Output is identical for any pool size.
pub fn run_scenario(
    scenario: &Scenario,
    methods: &[MethodId],
    estimator: &Estimator,
    mechanism: MissingMechanism,
) -> Result<Vec<ScenarioResult>> {
    let outcomes: Vec<Vec<Outcome>> = (0..scenario.replicates)
        .into_par_iter()
        .map(|r| run_replicate(estimator, scenario, methods, mechanism, r))
        .collect::<Result<_>>()?;

    let mut tallies = vec![Tally::default(); methods.len()];
    for row in &outcomes {
        for (t, o) in tallies.iter_mut().zip(row) {
            match o {
                Some((covered, length)) => {
                    t.defined += 1;
                    t.covered += usize::from(*covered);
                    t.length_sum += length;
                }
                None => t.undefined += 1,
            }
        }
    }
    Ok(methods
        .iter()
        .zip(tallies)
        .map(|(&method, t)| {
            let (avg_length, coverage) = if t.defined == 0 {
                (f64::NAN, f64::NAN)
            } else {
                (t.length_sum / t.defined as f64, t.covered as f64 / t.defined as f64)
            };
            ScenarioResult {
                method,
                true_rate: scenario.true_rate,
                n: scenario.n,
                missing_rate: scenario.missing_rate,
                replicates: scenario.replicates,
                avg_length,
                coverage,
                undefined_count: t.undefined,
            }
        })
        .collect())
}

/// Run several scenarios; results are ordered by scenario, then method.
pub fn run_grid(
    scenarios: &[Scenario],
    methods: &[MethodId],
    estimator: &Estimator,
    mechanism: MissingMechanism,
) -> Result<Vec<ScenarioResult>> {
    let mut out = Vec::with_capacity(scenarios.len() * methods.len());
    for s in scenarios {
        out.extend(run_scenario(s, methods, estimator, mechanism)?);
    }
    Ok(out)
}

/// Table-1 style summary of one method across scenarios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: MethodId,
    pub length_mean: f64,
    pub length_median: f64,
    pub length_min: f64,
    pub length_max: f64,
    pub coverage_mean: f64,
    pub coverage_median: f64,
    pub coverage_min: f64,
    pub coverage_max: f64,
}

fn stats(mut v: Vec<f64>) -> (f64, f64, f64, f64) {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    let mean = v.iter().sum::<f64>() / k as f64;
    let median = if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) };
    (mean, median, v[0], v[k - 1])
}

/// Mean, median, minimum and maximum of the scenario-level lengths and
/// coverages, one row per method in order of first appearance. Scenarios
/// where a method was never defined are skipped.
pub fn summarize(results: &[ScenarioResult]) -> Vec<SummaryRow> {
    let mut methods: Vec<MethodId> = Vec::new();
    for r in results {
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    methods
        .into_iter()
        .filter_map(|m| {
            let rows: Vec<&ScenarioResult> =
                results.iter().filter(|r| r.method == m && r.avg_length.is_finite()).collect();
            if rows.is_empty() {
                return None;
            }
            let (lm, lmed, lmin, lmax) = stats(rows.iter().map(|r| r.avg_length).collect());
            let (cm, cmed, cmin, cmax) = stats(rows.iter().map(|r| r.coverage).collect());
            Some(SummaryRow {
                method: m,
                length_mean: lm,
                length_median: lmed,
                length_min: lmin,
                length_max: lmax,
                coverage_mean: cm,
                coverage_median: cmed,
                coverage_min: cmin,
                coverage_max: cmax,
            })
        })
        .collect()
}

/// The three one-dimensional slices of the grid shown as bar charts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slice {
    /// n = 50, 10% missing; true rate varies.
    ByTrueRate,
    /// 10% missing, true rate 99%; sample size varies.
    BySampleSize,
    /// n = 50, true rate 99%; missing rate varies.
    ByMissingRate,
}

impl Slice {
    pub const ALL: [Slice; 3] = [Slice::ByTrueRate, Slice::BySampleSize, Slice::ByMissingRate];

    pub fn name(self) -> &'static str {
        match self {
            Slice::ByTrueRate => "by-true-rate",
            Slice::BySampleSize => "by-sample-size",
            Slice::ByMissingRate => "by-missing-rate",
        }
    }

    fn select(self, r: &ScenarioResult) -> Option<f64> {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
        match self {
            Slice::ByTrueRate => (r.n == 50 && close(r.missing_rate, 0.1)).then_some(r.true_rate),
            Slice::BySampleSize => (close(r.missing_rate, 0.1) && close(r.true_rate, 0.99)).then_some(f64::from(r.n)),
            Slice::ByMissingRate => (r.n == 50 && close(r.true_rate, 0.99)).then_some(r.missing_rate),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceRow {
    pub slice: Slice,
    pub method: MethodId,
    /// Value of the free dimension.
    pub level: f64,
    pub avg_length: f64,
    pub coverage: f64,
}

/// Bar-chart table for one slice, grouped by method and sorted by level.
pub fn slice_report(results: &[ScenarioResult], slice: Slice) -> Vec<SliceRow> {
    let mut rows: Vec<SliceRow> = results
        .iter()
        .filter_map(|r| {
            slice.select(r).map(|level| SliceRow {
                slice,
                method: r.method,
                level,
                avg_length: r.avg_length,
                coverage: r.coverage,
            })
        })
        .collect();
    rows.sort_by(|a, b| a.method.cmp(&b.method).then(a.level.total_cmp(&b.level)));
    rows
}

pub fn write_results(path: &Path, results: &[ScenarioResult]) -> Result<()> {
    write_atomic(path, &to_csv(results)?)
}

pub fn read_results(path: &Path) -> Result<Vec<ScenarioResult>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_atomic(path, &to_csv(rows)?)
}

#[derive(Deserialize)]
struct ScenarioRecord {
    true_rate: f64,
    n: u32,
    missing_rate: f64,
    replicates: Option<usize>,
}

/// Read scenarios from a CSV with columns `true_rate,n,missing_rate` and an
/// optional `replicates` column.
pub fn read_scenarios(path: &Path, default_replicates: usize) -> Result<Vec<Scenario>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize::<ScenarioRecord>()
        .map(|row| {
            let s = row?;
            Scenario::new(s.true_rate, s.n, s.missing_rate, s.replicates.unwrap_or(default_replicates))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::methods::{PriorSpec, RunConfig};

    #[test]
    fn grid_has_64_distinct_cells() {
        let g = default_grid(10);
        assert_eq!(g.len(), 64);
        let mut keys: Vec<u64> = g.iter().map(Scenario::key).collect();
        keys.sort_unstable();
        keys.dedup();
        assert_eq!(keys.len(), 64);
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::new(1.0, 10, 0.1, 5).is_err());
        assert!(Scenario::new(0.9, 0, 0.1, 5).is_err());
        assert!(Scenario::new(0.9, 10, 1.0, 5).is_err());
        assert!(Scenario::new(0.9, 10, 0.0, 5).is_ok());
    }

    #[test]
    fn zero_missing_rate_never_drops_subjects() {
        let s = Scenario::new(0.9, 20, 0.0, 1).unwrap();
        let mut rng = RngStream::new(1, 1);
        for mech in [MissingMechanism::BernoulliAtLeastOne, MissingMechanism::Bernoulli, MissingMechanism::FixedCount] {
            for _ in 0..200 {
                assert_eq!(generate_replicate(&mut rng, &s, mech).n_miss(), 0);
            }
        }
    }

    #[test]
    fn missing_count_means() {
        let s = Scenario::new(0.9, 50, 0.3, 1).unwrap();
        let mut rng = RngStream::new(2, 2);
        let reps = 100_000;
        let total: u64 =
            (0..reps).map(|_| u64::from(generate_replicate(&mut rng, &s, MissingMechanism::Bernoulli).n_miss())).sum();
        let mean = total as f64 / reps as f64;
        // sd of the mean is sqrt(50 * 0.21 / 1e5) ~ 0.01
        assert!((mean - 15.0).abs() < 0.05, "{mean}");

        // conditioning on at least one missing subject: E[K | K > 0] = nr / (1 - (1-r)^n)
        let s = Scenario::new(0.9, 10, 0.1, 1).unwrap();
        let total: u64 = (0..reps)
            .map(|_| u64::from(generate_replicate(&mut rng, &s, MissingMechanism::BernoulliAtLeastOne).n_miss()))
            .sum();
        let expected = 1.0 / (1.0 - 0.9_f64.powi(10));
        assert!((total as f64 / reps as f64 - expected).abs() < 0.01);

        assert_eq!(generate_replicate(&mut rng, &s, MissingMechanism::FixedCount).n_miss(), 1);
        let s = Scenario::new(0.9, 30, 0.2, 1).unwrap();
        assert_eq!(generate_replicate(&mut rng, &s, MissingMechanism::FixedCount).n_miss(), 6);
    }

    #[test]
    fn observed_successes_follow_true_rate() {
        let s = Scenario::new(0.8, 20, 0.1, 1).unwrap();
        let mut rng = RngStream::new(3, 3);
        let (mut y, mut obs) = (0u64, 0u64);
        for _ in 0..50_000 {
            let d = generate_replicate(&mut rng, &s, MissingMechanism::Bernoulli);
            y += u64::from(d.y_obs());
            obs += u64::from(d.n_obs());
        }
        assert!((y as f64 / obs as f64 - 0.8).abs() < 0.003);
    }

    #[test]
    fn summary_statistics() {
        let mk = |len: f64, cov: f64| ScenarioResult {
            method: MethodId::Bootstrap,
            true_rate: 0.9,
            n: 10,
            missing_rate: 0.1,
            replicates: 1,
            avg_length: len,
            coverage: cov,
            undefined_count: 0,
        };
        let same = vec![mk(0.25, 0.9); 64];
        let row = &summarize(&same)[0];
        assert_eq!((row.length_mean, row.length_median, row.length_min, row.length_max), (0.25, 0.25, 0.25, 0.25));

        let varied: Vec<ScenarioResult> = (0..64).map(|i| mk(f64::from(i), 1.0)).collect();
        let row = &summarize(&varied)[0];
        assert_eq!(row.length_median, 31.5);
        assert_eq!((row.length_min, row.length_max), (0.0, 63.0));
    }

    #[test]
    fn slices_have_four_levels_per_method() {
        let est =
            Estimator::new(RunConfig { m: 100, boot: 100, d: 2, dd: 2, ..Default::default() }, PriorSpec::default())
                .unwrap();
        let methods = [MethodId::CompleteCase, MethodId::ImputeFailure];
        let results = run_grid(&default_grid(3), &methods, &est, MissingMechanism::default()).unwrap();
        assert_eq!(results.len(), 128);
        for slice in Slice::ALL {
            let rows = slice_report(&results, slice);
            assert_eq!(rows.len(), 8, "{slice:?}");
        }
    }

    #[test]
    fn results_round_trip_through_csv() {
        let est = Estimator::new(RunConfig::default(), PriorSpec::default()).unwrap();
        let s = Scenario::new(0.9, 10, 0.2, 20).unwrap();
        let results =
            run_scenario(&s, &[MethodId::CompleteCase, MethodId::Jackknife], &est, MissingMechanism::default())
                .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_results(&path, &results).unwrap();
        assert_eq!(read_results(&path).unwrap(), results);
        let header = std::fs::read_to_string(&path).unwrap();
        assert!(header.starts_with("method,true_rate,n,missing_rate,replicates,avg_length,coverage,undefined_count"));
    }

    #[test]
    fn replicate_results_are_bit_reproducible() {
        let est = Estimator::new(RunConfig::default(), PriorSpec::default()).unwrap();
        let s = Scenario::new(0.99, 20, 0.1, 1).unwrap();
        let a = run_scenario(&s, &MethodId::ALL, &est, MissingMechanism::default()).unwrap();
        let b = run_scenario(&s, &MethodId::ALL, &est, MissingMechanism::default()).unwrap();
        // undefined cells hold NaN, so compare serialized bytes
        assert_eq!(crate::io::to_csv(&a).unwrap(), crate::io::to_csv(&b).unwrap());
        // a method's draws do not depend on which other methods run
        let solo = run_scenario(&s, &[MethodId::BetaMi], &est, MissingMechanism::default()).unwrap();
        assert_eq!(solo[0], a[MethodId::BetaMi.index()]);
    }

    #[test]
    fn scenario_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, "true_rate,n,missing_rate,replicates\n0.9,20,0.1,7\n0.8,10,0.3,\n").unwrap();
        let s = read_scenarios(&path, 11).unwrap();
        assert_eq!(s[0], Scenario::new(0.9, 20, 0.1, 7).unwrap());
        assert_eq!(s[1].replicates, 11);
        std::fs::write(&path, "true_rate,n,missing_rate\n1.5,20,0.1\n").unwrap();
        assert!(read_scenarios(&path, 11).is_err());
    }
}
