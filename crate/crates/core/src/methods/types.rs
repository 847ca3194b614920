use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed successes, observed failures and missing outcomes of one
/// single-arm binary-endpoint dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TrialData {
    y_obs: u32,
    f_obs: u32,
    n_miss: u32,
}

impl TrialData {
    pub fn new(y_obs: u32, f_obs: u32, n_miss: u32) -> Result<Self> {
        let n = u64::from(y_obs) + u64::from(f_obs) + u64::from(n_miss);
        if n == 0 {
            return Err(Error::Domain("a dataset needs at least one subject".into()));
        }
        if n > u64::from(u32::MAX) {
            return Err(Error::Domain(format!("dataset size {n} overflows")));
        }
        Ok(Self { y_obs, f_obs, n_miss })
    }

    pub fn y_obs(&self) -> u32 {
        self.y_obs
    }

    pub fn f_obs(&self) -> u32 {
        self.f_obs
    }

    pub fn n_miss(&self) -> u32 {
        self.n_miss
    }

    pub fn n_obs(&self) -> u32 {
        self.y_obs + self.f_obs
    }

    pub fn n(&self) -> u32 {
        self.n_obs() + self.n_miss
    }
}

impl fmt::Display for TrialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} successes, {} failures, {} missing", self.y_obs, self.f_obs, self.n_miss)
    }
}

/// Beta hyperparameters: `(alpha, beta)` for the predictive draw of the
/// missing outcomes, `(alpha_post, beta_post)` for the completed-data
/// posterior.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_post: f64,
    pub beta_post: f64,
}

impl PriorSpec {
    pub fn new(alpha: f64, beta: f64, alpha_post: f64, beta_post: f64) -> Result<Self> {
        let p = Self { alpha, beta, alpha_post, beta_post };
        p.validate()?;
        Ok(p)
    }

    pub fn jeffreys() -> Self {
        Self { alpha: 0.5, beta: 0.5, alpha_post: 0.5, beta_post: 0.5 }
    }

    pub fn uniform() -> Self {
        Self { alpha: 1.0, beta: 1.0, alpha_post: 1.0, beta_post: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in
            [("alpha", self.alpha), ("beta", self.beta), ("alpha_post", self.alpha_post), ("beta_post", self.beta_post)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("prior {name} must be finite and positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self::jeffreys()
    }
}

impl FromStr for PriorSpec {
    type Err = Error;

    /// Parses `a,b,a',b'`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| Error::Parse(format!("prior component {p:?}: {e}"))))
            .collect::<Result<_>>()?;
        match parts.as_slice() {
            &[a, b, ap, bp] => PriorSpec::new(a, b, ap, bp),
            _ => Err(Error::Parse(format!("prior needs four comma-separated values, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodId {
    CompleteCase,
    ImputeSuccess,
    ImputeFailure,
    WaldMi,
    WilsonMi,
    #[serde(rename = "logodds-mi")]
    LogOddsMi,
    Bootstrap,
    Jackknife,
    ModifiedCpmi,
    FullBayes,
    BetaMi,
}

impl MethodId {
    pub const ALL: [MethodId; 11] = [
        MethodId::CompleteCase,
        MethodId::ImputeSuccess,
        MethodId::ImputeFailure,
        MethodId::WaldMi,
        MethodId::WilsonMi,
        MethodId::LogOddsMi,
        MethodId::Bootstrap,
        MethodId::Jackknife,
        MethodId::ModifiedCpmi,
        MethodId::FullBayes,
        MethodId::BetaMi,
    ];

    /// Row order of the forest plot.
    pub const FOREST: [MethodId; 7] = [
        MethodId::CompleteCase,
        MethodId::ImputeFailure,
        MethodId::ImputeSuccess,
        MethodId::WaldMi,
        MethodId::ModifiedCpmi,
        MethodId::BetaMi,
        MethodId::FullBayes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::CompleteCase => "complete-case",
            MethodId::ImputeSuccess => "impute-success",
            MethodId::ImputeFailure => "impute-failure",
            MethodId::WaldMi => "wald-mi",
            MethodId::WilsonMi => "wilson-mi",
            MethodId::LogOddsMi => "logodds-mi",
            MethodId::Bootstrap => "bootstrap",
            MethodId::Jackknife => "jackknife",
            MethodId::ModifiedCpmi => "modified-cpmi",
            MethodId::FullBayes => "full-bayes",
            MethodId::BetaMi => "beta-mi",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MethodId::CompleteCase => "Complete case",
            MethodId::ImputeSuccess => "Impute as success",
            MethodId::ImputeFailure => "Impute as failure",
            MethodId::WaldMi => "MI, Wald",
            MethodId::WilsonMi => "MI, Wilson",
            MethodId::LogOddsMi => "MI, log-odds",
            MethodId::Bootstrap => "Bootstrap",
            MethodId::Jackknife => "Jackknife",
            MethodId::ModifiedCpmi => "Modified CPMI",
            MethodId::FullBayes => "Fully Bayesian",
            MethodId::BetaMi => "MI, Beta",
        }
    }

    /// Position in [`MethodId::ALL`]; also the RNG purpose tag.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_stochastic(self) -> bool {
        !matches!(self, MethodId::CompleteCase | MethodId::ImputeSuccess | MethodId::ImputeFailure)
    }

    /// Parses a comma-separated list; `all` expands to every method.
    pub fn parse_list(s: &str) -> Result<Vec<MethodId>> {
        if s.trim() == "all" {
            return Ok(MethodId::ALL.to_vec());
        }
        let mut out = Vec::new();
        for part in s.split(',') {
            let m: MethodId = part.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        MethodId::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::Parse(format!("unknown method {s:?}")))
    }
}

/// How the per-imputation margins of the modified CPMI are formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CpmiForm {
    /// Pool the distances from the estimate to each exact bound.
    #[default]
    Margins,
    /// Pool the exact bounds themselves.
    Bounds,
}

/// Degrees of freedom for the CPMI critical value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CpmiDf {
    #[default]
    Rubin,
    BarnardRubin,
}

/// Critical value for the Wilson MI interval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WilsonQuantile {
    /// Student t with Rubin's degrees of freedom.
    #[default]
    T,
    Z,
}

/// Handling of completed datasets whose success count is 0 or n in the
/// log-odds MI.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogitBoundary {
    /// Add 0.5 to successes and failures only at boundary counts.
    HaldaneBoundary,
    /// Add 0.5 to successes and failures of every completed dataset.
    HaldaneAll,
    /// Treat a boundary count as making the method undefined for the dataset.
    #[default]
    Undefined,
}

/// Complete-data degrees of freedom fed to the Barnard–Rubin adjustment of
/// the log-odds MI.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogitDf {
    #[default]
    NMinusTwo,
    NMinusOne,
    ObservedMinusOne,
}

/// When the jackknife imputes the missing outcomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JackknifeImputation {
    /// Re-impute inside every leave-one-out sample.
    #[default]
    PerSubsample,
    /// Impute once, then leave subjects out of the completed data.
    Once,
}

/// Denominator of the leave-one-out proportions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JackknifeDenominator {
    #[default]
    NMinusOne,
    N,
}

/// Per-imputation estimate of the Beta MI.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaMiCenter {
    /// A draw from the completed-data posterior.
    #[default]
    Draw,
    /// The completed-data posterior mean.
    PosteriorMean,
}

/// Point estimate reported by the fully Bayesian method.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BayesSummary {
    #[default]
    Median,
    Mean,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodOptions {
    pub cpmi_form: CpmiForm,
    pub cpmi_df: CpmiDf,
    pub wilson_quantile: WilsonQuantile,
    pub logit_boundary: LogitBoundary,
    pub logit_df: LogitDf,
    pub jackknife_imputation: JackknifeImputation,
    pub jackknife_denominator: JackknifeDenominator,
    pub beta_mi_center: BetaMiCenter,
    pub bayes_summary: BayesSummary,
}

/// Tuning constants shared by every method.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Imputations per MI method.
    pub d: usize,
    /// Parametric-bootstrap replicates per imputation in the modified CPMI.
    pub dd: usize,
    /// Posterior draws of the fully Bayesian method.
    pub m: usize,
    /// Bootstrap resamples.
    pub boot: usize,
    /// Grid step of the shortest Beta interval search.
    pub grid_step: f64,
    /// One minus the interval confidence level.
    pub alpha: f64,
    pub seed: u64,
    /// Inflate the between-imputation variance by `1 + 1/D`.
    pub inflate_between: bool,
    pub options: MethodOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 50,
            dd: 50,
            m: 5000,
            boot: 1000,
            grid_step: 0.001,
            alpha: 0.05,
            seed: 20_240_101,
            inflate_between: true,
            options: MethodOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.d < 2 {
            return bad(format!("D must be at least 2, got {}", self.d));
        }
        if self.dd < 2 {
            return bad(format!("DD must be at least 2, got {}", self.dd));
        }
        if self.m < 100 {
            return bad(format!("M must be at least 100, got {}", self.m));
        }
        if self.boot < 100 {
            return bad(format!("bootstrap resamples must be at least 100, got {}", self.boot));
        }
        if !(self.grid_step > 0.0 && self.grid_step <= 0.01) {
            return bad(format!("grid step must lie in (0, 0.01], got {}", self.grid_step));
        }
        let cells = (1.0 / self.grid_step).round();
        if (cells * self.grid_step - 1.0).abs() > 1e-9 {
            return bad(format!("grid step {} does not divide the unit interval", self.grid_step));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        Ok(())
    }
}
