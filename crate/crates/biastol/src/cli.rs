//! Command-line surface. Every subcommand is a thin adapter over the library
//! API: parse flags, call one function, serialize the result (JSON on stdout
//! by default, CSV behind `-o`).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::distributions::GenGammaSpec;
use crate::error::{Error, Result};
use crate::fft_conv::FftConfig;
use crate::pilot::{
    design_report, design_sweep, empirical_ghat, npmle_fhat, write_report_csv,
    DeclaredBias, PilotSample,
};
use crate::quantile_map::{QuantileMap, DEFAULT_KNOT_COUNT};
use crate::sim_harness::{parse_config_runs, run_grid, write_rows_csv};
use crate::tolerance_classic::{
    exact_coverage, exact_sample_size, scheffe_tukey_coverage, scheffe_tukey_sample_size,
    SampleSizeResult, ToleranceSpec,
};
use crate::tolerance_fft::{coverage_fft, sample_size_fft};
use crate::tolerance_inequality::{coverage_inequality, sample_size_inequality};

#[derive(Parser)]
#[command(name = "biastol", version, about = "Tolerance limits and sample sizes under biased sampling")]
struct Cli {
    /// Pretty-print JSON output
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distribution-free solvers for unbiased sampling
    Classic {
        #[command(subcommand)]
        cmd: ClassicCmd,
    },
    /// Solvers under a biased-sampling quantile map
    Biased {
        #[command(subcommand)]
        cmd: BiasedCmd,
    },
    /// Build a quantile map file
    MapMake(MapMakeArgs),
    /// Empirical-coverage simulation grid from a TOML config
    Simulate(SimulateArgs),
    /// Fit pilot estimates (empirical biased CDF, NPMLE target CDF)
    PilotFit(PilotFitArgs),
    /// Design-report table from pilot data
    PilotReport(PilotReportArgs),
}

#[derive(Subcommand)]
enum ClassicCmd {
    /// Smallest n meeting the (q, alpha) guarantee
    SampleSize(ClassicSizeArgs),
    /// Guaranteed coverage at a fixed n
    Coverage(ClassicCovArgs),
}

#[derive(Subcommand)]
enum BiasedCmd {
    /// Smallest n meeting the (q, alpha) guarantee under the map
    SampleSize(BiasedSizeArgs),
    /// Guaranteed coverage at a fixed n under the map
    Coverage(BiasedCovArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassicMethod {
    Exact,
    Scheffe,
}

#[derive(Clone, Copy, ValueEnum)]
enum BiasedMethod {
    Ineq,
    Fft,
}

#[derive(Clone, Copy, ValueEnum)]
enum BiasKind {
    Length,
    Size,
    None,
}

#[derive(Args)]
struct ClassicSizeArgs {
    #[arg(long)]
    r: u64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "exact")]
    method: ClassicMethod,
}

#[derive(Args)]
struct ClassicCovArgs {
    #[arg(long)]
    n: u64,
    #[arg(long)]
    r: u64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "exact")]
    method: ClassicMethod,
}

#[derive(Args)]
struct FftTuning {
    /// FFT tail-truncation epsilon
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// FFT grid cells per order-statistic law
    #[arg(long, default_value_t = 4096)]
    cells: usize,
}

impl FftTuning {
    fn config(&self) -> Result<FftConfig> {
        let config = FftConfig { epsilon: self.epsilon, target_cells: self.cells, ..FftConfig::default() };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct BiasedSizeArgs {
    #[arg(long, value_enum)]
    method: BiasedMethod,
    /// Quantile map JSON file
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    r: u64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    alpha: f64,
    #[command(flatten)]
    fft: FftTuning,
}

#[derive(Args)]
struct BiasedCovArgs {
    #[arg(long, value_enum)]
    method: BiasedMethod,
    /// Quantile map JSON file
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    n: u64,
    #[arg(long)]
    r: u64,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    alpha: f64,
    #[command(flatten)]
    fft: FftTuning,
}

#[derive(Clone, Copy, ValueEnum)]
enum MapKind {
    Identity,
    Analytic,
    MonteCarlo,
}

#[derive(Args)]
struct MapMakeArgs {
    #[arg(long, value_enum)]
    kind: MapKind,
    /// Output JSON path
    #[arg(short, long)]
    output: PathBuf,
    /// Target generalized-Gamma shape alpha (analytic / monte-carlo)
    #[arg(long)]
    shape: Option<f64>,
    /// Target rate beta
    #[arg(long)]
    rate: Option<f64>,
    /// Target second shape delta
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Selection-bias weight exponent kappa (1 = length bias)
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    #[arg(long, default_value_t = DEFAULT_KNOT_COUNT)]
    knots: usize,
    /// Monte Carlo draws (monte-carlo kind only)
    #[arg(long, default_value_t = 1_000_000)]
    draws: usize,
    /// RNG seed; required for the monte-carlo kind
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML configuration (single table or [[runs]] array)
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (default: logical cores)
    #[arg(long)]
    jobs: Option<usize>,
    /// Use only uncensored failure times as order statistics
    #[arg(long)]
    events_only: bool,
}

#[derive(Args)]
struct PilotInput {
    /// Pilot CSV with header `time,status`
    #[arg(long)]
    input: PathBuf,
    /// Declared sampling bias
    #[arg(long, value_enum, default_value = "length")]
    bias: BiasKind,
    /// Weight exponent for --bias size
    #[arg(long)]
    kappa: Option<f64>,
}

impl PilotInput {
    fn load(&self) -> Result<PilotSample> {
        let bias = match self.bias {
            BiasKind::Length => DeclaredBias::LengthBias,
            BiasKind::None => DeclaredBias::None,
            BiasKind::Size => DeclaredBias::SizeBias {
                kappa: self
                    .kappa
                    .ok_or_else(|| Error::domain("--bias size requires --kappa".to_string()))?,
            },
        };
        let file = fs::File::open(&self.input)?;
        PilotSample::from_csv(file, bias)
    }
}

#[derive(Args)]
struct PilotFitArgs {
    #[command(flatten)]
    pilot: PilotInput,
    /// Write the fitted target CDF JSON here (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the composed quantile map JSON here
    #[arg(long)]
    map_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
}

#[derive(Args)]
struct PilotReportArgs {
    #[command(flatten)]
    pilot: PilotInput,
    /// Output CSV path (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Worker threads (default: logical cores)
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,3,5,10")]
    r_grid: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,7,12")]
    m_grid: Vec<u64>,
    #[arg(long, default_value_t = 0.80)]
    q: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Sweep mode: fix r = m = 1 and vary (q, confidence) grids
    #[arg(long)]
    sweep: bool,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.6,0.7,0.8,0.9")]
    q_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.90,0.95,0.99")]
    confidence_grid: Vec<f64>,
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let obj = json!({ "error": { "kind": error_kind(&err), "message": err.to_string() } });
            eprintln!("{obj}");
            ExitCode::FAILURE
        }
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Domain(_) => "domain",
        Error::Infeasible(_) => "infeasible",
        Error::NoSolution { .. } => "no_solution",
        Error::NonConvergence { .. } => "non_convergence",
        Error::UnboundedQuantile => "unbounded_quantile",
        Error::InsufficientData(_) => "insufficient_data",
        Error::StepMismatch { .. } => "step_mismatch",
        Error::EmptyInput(_) => "empty_input",
        Error::Format(_) => "format",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Csv(_) => "csv",
    }
}

fn print_json(value: &serde_json::Value, pretty: bool) {
    if pretty {
        println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
    } else {
        println!("{value}");
    }
}

fn warn_small_n(n: u64, r: u64, m: u64) {
    if n < 3 * (r + m) {
        eprintln!(
            "warning: n = {n} is less than 3(r + m) = {}; the independence approximation may be poor",
            3 * (r + m)
        );
    }
}

fn size_result_json(result: &SampleSizeResult) -> serde_json::Value {
    serde_json::to_value(result).expect("serializable")
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Classic { cmd } => match cmd {
            ClassicCmd::SampleSize(a) => {
                let spec = ToleranceSpec::new(a.r, a.m, a.q, a.alpha)?;
                let result = match a.method {
                    ClassicMethod::Exact => exact_sample_size(&spec)?,
                    ClassicMethod::Scheffe => scheffe_tukey_sample_size(&spec)?,
                };
                warn_small_n(result.n, a.r, a.m);
                print_json(&size_result_json(&result), cli.pretty);
            }
            ClassicCmd::Coverage(a) => {
                let q = match a.method {
                    ClassicMethod::Exact => exact_coverage(a.n, a.r, a.m, a.alpha)?,
                    ClassicMethod::Scheffe => scheffe_tukey_coverage(a.n, a.r, a.m, a.alpha)?,
                };
                warn_small_n(a.n, a.r, a.m);
                print_json(&json!({ "n": a.n, "r": a.r, "m": a.m, "alpha": a.alpha, "q": q }), cli.pretty);
            }
        },
        Command::Biased { cmd } => match cmd {
            BiasedCmd::SampleSize(a) => {
                let spec = ToleranceSpec::new(a.r, a.m, a.q, a.alpha)?;
                let map = QuantileMap::read_json(&a.map)?;
                let result = match a.method {
                    BiasedMethod::Ineq => sample_size_inequality(&spec, &map)?,
                    BiasedMethod::Fft => sample_size_fft(&spec, &map, &a.fft.config()?)?,
                };
                warn_small_n(result.n, a.r, a.m);
                print_json(&size_result_json(&result), cli.pretty);
            }
            BiasedCmd::Coverage(a) => {
                let map = QuantileMap::read_json(&a.map)?;
                let q = match a.method {
                    BiasedMethod::Ineq => coverage_inequality(a.n, a.r, a.m, a.alpha, &map)?,
                    BiasedMethod::Fft => coverage_fft(a.n, a.r, a.m, a.alpha, &map, &a.fft.config()?)?,
                };
                warn_small_n(a.n, a.r, a.m);
                print_json(&json!({ "n": a.n, "r": a.r, "m": a.m, "alpha": a.alpha, "q": q }), cli.pretty);
            }
        },
        Command::MapMake(a) => {
            let map = match a.kind {
                MapKind::Identity => QuantileMap::identity(),
                MapKind::Analytic => {
                    let target = target_spec(a)?;
                    QuantileMap::analytic(&target, a.kappa, a.knots)?
                }
                MapKind::MonteCarlo => {
                    let target = target_spec(a)?;
                    let seed = a.seed.ok_or_else(|| {
                        Error::domain("--seed is required for the monte-carlo kind".to_string())
                    })?;
                    let biased = target.size_bias(a.kappa)?;
                    QuantileMap::monte_carlo(
                        |rng| target.sample_with(rng),
                        |rng| biased.sample_with(rng),
                        a.draws,
                        a.knots,
                        seed,
                    )?
                }
            };
            map.write_json(&a.output)?;
            print_json(
                &json!({ "written": a.output.display().to_string(), "kind": map.provenance().kind(), "knots": map.knots_p().len() }),
                cli.pretty,
            );
        }
        Command::Simulate(a) => {
            if let Some(jobs) = a.jobs {
                configure_jobs(jobs)?;
            }
            let text = fs::read_to_string(&a.config)?;
            let mut rows = Vec::new();
            for mut config in parse_config_runs(&text)? {
                if a.events_only {
                    config.events_only = true;
                }
                rows.extend(run_grid(&config)?);
            }
            match &a.output {
                Some(path) => write_rows_csv(&rows, fs::File::create(path)?)?,
                None => write_rows_csv(&rows, std::io::stdout().lock())?,
            }
        }
        Command::PilotFit(a) => {
            let sample = a.pilot.load()?;
            let (fhat, iterations) = if sample.declared_bias == DeclaredBias::None {
                (empirical_ghat(&sample)?, 0)
            } else {
                let fit = npmle_fhat(&sample, a.tolerance, a.max_iter)?;
                if fit.dropped_censored > 0 {
                    eprintln!(
                        "warning: {} censored record(s) at or beyond the largest event time were dropped",
                        fit.dropped_censored
                    );
                }
                (fit.cdf, fit.iterations)
            };
            if let Some(path) = &a.map_out {
                let ghat = empirical_ghat(&sample)?;
                let map = crate::pilot::pilot_map(&fhat, &ghat, DEFAULT_KNOT_COUNT)?;
                map.write_json(path)?;
            }
            let cdf_json = serde_json::to_value(&fhat)?;
            match &a.output {
                Some(path) => {
                    fs::write(path, serde_json::to_string_pretty(&cdf_json)?)?;
                    print_json(
                        &json!({ "written": path.display().to_string(), "support_points": fhat.support.len(), "iterations": iterations }),
                        cli.pretty,
                    );
                }
                None => print_json(&cdf_json, cli.pretty),
            }
        }
        Command::PilotReport(a) => {
            if let Some(jobs) = a.jobs {
                configure_jobs(jobs)?;
            }
            let sample = a.pilot.load()?;
            if a.sweep {
                let rows = design_sweep(&sample, &a.q_grid, &a.confidence_grid)?;
                let mut out: Box<dyn std::io::Write> = match &a.output {
                    Some(path) => Box::new(fs::File::create(path)?),
                    None => Box::new(std::io::stdout().lock()),
                };
                writeln!(out, "q,confidence,n_scheffe,n_ineq,n_fft")?;
                for (q, conf, row) in rows {
                    writeln!(
                        out,
                        "{q},{conf},{},{},{}",
                        opt_str(row.n_scheffe),
                        opt_str(row.n_ineq),
                        opt_str(row.n_fft)
                    )?;
                }
            } else {
                let rows = design_report(&sample, &a.r_grid, &a.m_grid, a.q, a.alpha)?;
                match &a.output {
                    Some(path) => write_report_csv(&rows, fs::File::create(path)?)?,
                    None => write_report_csv(&rows, std::io::stdout().lock())?,
                }
            }
        }
    }
    Ok(())
}

fn opt_str(v: Option<u64>) -> String {
    v.map(|n| n.to_string()).unwrap_or_default()
}

fn target_spec(a: &MapMakeArgs) -> Result<GenGammaSpec> {
    let shape = a
        .shape
        .ok_or_else(|| Error::domain("--shape is required for this map kind".to_string()))?;
    let rate = a
        .rate
        .ok_or_else(|| Error::domain("--rate is required for this map kind".to_string()))?;
    GenGammaSpec::new(shape, rate, a.delta)
}

fn configure_jobs(jobs: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| Error::domain(format!("could not size the worker pool: {e}")))
}
