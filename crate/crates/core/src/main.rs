use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use binimpute::application::{self, forest_table, impute_failure_one_sided_lower, write_forest};
use binimpute::io::{to_csv, write_atomic};
use binimpute::methods::{
    BayesSummary, BetaMiCenter, CpmiDf, CpmiForm, JackknifeDenominator, JackknifeImputation, LogitBoundary, LogitDf,
    MethodOptions, WilsonQuantile,
};
use binimpute::simulation::{self, MissingMechanism, Slice};
use binimpute::{Error, Estimator, MethodId, PriorSpec, RunConfig, TrialData};

#[derive(Parser)]
#[command(name = "binimpute", version, about = "Interval estimates for a binomial rate with missing outcomes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the success rate of one dataset.
    Analyze(AnalyzeArgs),
    /// Monte Carlo coverage and length study over a scenario grid.
    Simulate(SimulateArgs),
    /// Collapse per-scenario results into one summary row per method.
    Summarize(SummarizeArgs),
    /// Re-run a canned case study and write its forest table and plot.
    Reproduce(ReproduceArgs),
}

/// Settings shared by every command that runs estimators.
#[derive(Args)]
struct Tuning {
    /// One minus the confidence level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Beta hyperparameters a,b,a',b' (imputation model, then analysis model).
    #[arg(long, value_parser = parse_prior)]
    prior: Option<PriorSpec>,
    /// Imputations per MI method.
    #[arg(long = "D", default_value_t = 50)]
    d: usize,
    /// Parametric-bootstrap replicates per imputation in the modified CPMI.
    #[arg(long = "DD", default_value_t = 50)]
    dd: usize,
    /// Posterior draws of the fully Bayesian method.
    #[arg(long = "M", default_value_t = 5000)]
    m: usize,
    /// Bootstrap resamples.
    #[arg(long, default_value_t = 1000)]
    boot: usize,
    /// Grid step of the shortest Beta interval.
    #[arg(long, default_value_t = 0.001)]
    grid_step: f64,
    #[arg(long, default_value_t = RunConfig::default().seed)]
    seed: u64,
    /// Do not inflate the between-imputation variance by 1 + 1/D.
    #[arg(long)]
    no_inflate: bool,
    #[arg(long, value_parser = kebab::<CpmiForm>, default_value = "margins")]
    cpmi_form: CpmiForm,
    #[arg(long, value_parser = kebab::<CpmiDf>, default_value = "rubin")]
    cpmi_df: CpmiDf,
    #[arg(long, value_parser = kebab::<WilsonQuantile>, default_value = "t")]
    wilson_quantile: WilsonQuantile,
    #[arg(long, value_parser = kebab::<LogitBoundary>, default_value = "undefined")]
    logit_boundary: LogitBoundary,
    #[arg(long, value_parser = kebab::<LogitDf>, default_value = "n-minus-two")]
    logit_df: LogitDf,
    #[arg(long, value_parser = kebab::<JackknifeImputation>, default_value = "per-subsample")]
    jackknife_imputation: JackknifeImputation,
    #[arg(long, value_parser = kebab::<JackknifeDenominator>, default_value = "n-minus-one")]
    jackknife_denominator: JackknifeDenominator,
    #[arg(long, value_parser = kebab::<BetaMiCenter>, default_value = "draw")]
    beta_mi_center: BetaMiCenter,
    #[arg(long, value_parser = kebab::<BayesSummary>, default_value = "median")]
    bayes_summary: BayesSummary,
}

impl Tuning {
    fn estimator(&self) -> Result<Estimator, Failure> {
        let cfg = RunConfig {
            d: self.d,
            dd: self.dd,
            m: self.m,
            boot: self.boot,
            grid_step: self.grid_step,
            alpha: self.alpha,
            seed: self.seed,
            inflate_between: !self.no_inflate,
            options: MethodOptions {
                cpmi_form: self.cpmi_form,
                cpmi_df: self.cpmi_df,
                wilson_quantile: self.wilson_quantile,
                logit_boundary: self.logit_boundary,
                logit_df: self.logit_df,
                jackknife_imputation: self.jackknife_imputation,
                jackknife_denominator: self.jackknife_denominator,
                beta_mi_center: self.beta_mi_center,
                bayes_summary: self.bayes_summary,
            },
        };
        Estimator::new(cfg, self.prior.unwrap_or_default()).map_err(Failure::usage)
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    successes: u32,
    #[arg(long)]
    failures: u32,
    #[arg(long)]
    missing: u32,
    /// Method id, comma-separated ids, or `all`.
    #[arg(long, default_value = "all")]
    method: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write results here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Grid {
    Default,
}

#[derive(Args)]
struct SimulateArgs {
    /// Built-in scenario grid (ignored when --scenarios is given).
    #[arg(long, value_enum, default_value_t = Grid::Default)]
    grid: Grid,
    /// CSV with columns true_rate,n,missing_rate and optional replicates.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    #[arg(long, default_value_t = simulation::DEFAULT_REPLICATES)]
    reps: usize,
    /// Method ids, comma-separated, or `all`.
    #[arg(long, default_value = "all")]
    methods: String,
    #[arg(long, value_parser = kebab::<MissingMechanism>, default_value = "bernoulli-at-least-one")]
    missing_mode: MissingMechanism,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Results CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `<prefix>-<slice>.csv` for the three one-factor slices.
    #[arg(long)]
    slices: Option<PathBuf>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct SummarizeArgs {
    results: PathBuf,
    /// Summary CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    Cit07,
}

#[derive(Clone, Copy, ValueEnum)]
enum Endpoint {
    Year1,
    Year2,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_enum)]
    study: Study,
    #[arg(long, value_enum, default_value_t = Endpoint::Year1)]
    endpoint: Endpoint,
    /// Output prefix; `.csv` and `.svg` are appended.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tuning: Tuning,
}

/// Error carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Self { code: 2, message: e.to_string() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::Config(_) => 2,
            Error::Io(_) | Error::Csv(_) => 1,
            _ => 3,
        };
        Self { code, message: e.to_string() }
    }
}

fn kebab<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

fn parse_prior(s: &str) -> Result<PriorSpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Serialize)]
struct ResolvedConfig<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    data: Option<&'a TrialData>,
    prior: &'a PriorSpec,
    config: &'a RunConfig,
}

#[derive(Serialize)]
struct AnalyzeRow {
    method: MethodId,
    estimate: f64,
    lower: f64,
    upper: f64,
    length: f64,
    fallback: bool,
}

fn echo_config(est: &Estimator, data: Option<&TrialData>, extra: &[(&str, String)]) {
    let resolved = ResolvedConfig { data, prior: est.prior(), config: est.config() };
    let mut v = serde_json::to_value(&resolved).expect("config serializes");
    for (k, val) in extra {
        v[*k] = serde_json::Value::String(val.clone());
    }
    eprintln!("resolved: {v}");
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => write_atomic(p, bytes)?,
        None => std::io::stdout().write_all(bytes).map_err(Error::from)?,
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let data = TrialData::new(a.successes, a.failures, a.missing).map_err(Failure::usage)?;
    let methods = MethodId::parse_list(&a.method).map_err(Failure::usage)?;
    let est = a.tuning.estimator()?;
    echo_config(&est, Some(&data), &[]);

    let rows = methods
        .iter()
        .map(|&method| {
            let ci = est.estimate_seeded(method, &data)?;
            Ok(AnalyzeRow {
                method,
                estimate: ci.estimate(),
                lower: ci.lower(),
                upper: ci.upper(),
                length: ci.length(),
                fallback: ci.is_fallback(),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let bytes = match a.format {
        Format::Csv => to_csv(&rows)?,
        Format::Json => {
            let doc = serde_json::json!({
                "data": data,
                "prior": est.prior(),
                "config": est.config(),
                "results": rows,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("results serialize");
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(a.out.as_deref(), &bytes)
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let scenarios = match (&a.scenarios, a.grid) {
        (Some(path), _) => simulation::read_scenarios(path, a.reps).map_err(Failure::usage)?,
        (None, Grid::Default) => simulation::default_grid(a.reps),
    };
    let methods = MethodId::parse_list(&a.methods).map_err(Failure::usage)?;
    let est = a.tuning.estimator()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = a.threads {
        if t == 0 {
            return Err(Failure::usage("--threads must be positive"));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| Failure { code: 1, message: e.to_string() })?;
    echo_config(
        &est,
        None,
        &[
            ("scenarios", scenarios.len().to_string()),
            ("methods", methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(",")),
            ("missing_mode", format!("{:?}", a.missing_mode)),
            ("threads", pool.current_num_threads().to_string()),
        ],
    );

    let results = pool.install(|| simulation::run_grid(&scenarios, &methods, &est, a.missing_mode))?;
    emit(a.out.as_deref(), &to_csv(&results)?)?;
    if let Some(prefix) = &a.slices {
        for slice in Slice::ALL {
            let rows = simulation::slice_report(&results, slice);
            if rows.is_empty() {
                continue;
            }
            let mut p = prefix.as_os_str().to_owned();
            p.push(format!("-{}.csv", slice.name()));
            write_atomic(Path::new(&p), &to_csv(&rows)?)?;
        }
    }
    Ok(())
}

fn summarize(a: SummarizeArgs) -> Result<(), Failure> {
    let results = simulation::read_results(&a.results)?;
    let rows = simulation::summarize(&results);
    match &a.out {
        Some(p) => simulation::write_summary(p, &rows)?,
        None => emit(None, &to_csv(&rows)?)?,
    }
    Ok(())
}

fn reproduce(a: ReproduceArgs) -> Result<(), Failure> {
    let Study::Cit07 = a.study;
    let dataset = match a.endpoint {
        Endpoint::Year1 => application::cit07_year1(),
        Endpoint::Year2 => application::cit07_year2(),
    };
    let est = a.tuning.estimator()?;
    echo_config(&est, Some(&dataset.data), &[("dataset", dataset.name.clone())]);
    let rows = forest_table(&dataset, &MethodId::FOREST, &est)?;
    let title = format!("{} ({})", dataset.name, dataset.data);
    let (csv, svg) = write_forest(&a.out, &title, &rows)?;
    let lb = impute_failure_one_sided_lower(&dataset, est.config().alpha)?;
    eprintln!("impute-failure one-sided lower bound: {lb:.4}");
    eprintln!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Simulate(a) => simulate(a),
        Command::Summarize(a) => summarize(a),
        Command::Reproduce(a) => reproduce(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
