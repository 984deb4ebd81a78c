//! Simulation harness: length-biased, informatively right-censored samples
//! from Gamma targets, empirical coverage of the solved sample sizes, and the
//! full comparison grid written as plot-ready CSV.
//!
//! A length-biased lifetime y is split at the sampling cross-section by a
//! uniform fraction (the stationarity assumption of prevalent sampling) into
//! a backward time A = U*y and a forward time R = (1-U)*y; an independent
//! Exponential censoring time acts on the forward part only, so censoring is
//! informative for the (length-biased) total lifetime. The observed time is
//! A + min(R, C) with event indicator R <= C.

use std::io::Write as IoWrite;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::GenGammaSpec;
use crate::error::{Error, Result};
use crate::fft_conv::FftConfig;
use crate::quantile_map::{QuantileMap, DEFAULT_KNOT_COUNT, DEFAULT_MC_DRAWS};
use crate::tolerance_classic::{scheffe_tukey_sample_size, Method, ToleranceSpec};
use crate::tolerance_fft::sample_size_fft;
use crate::tolerance_inequality::sample_size_inequality;

/// One observed survival time with its event/censor flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedTime {
    pub value: f64,
    /// true = failure observed, false = right-censored
    pub event: bool,
}

/// One simulation configuration cellgrid (a single target and censoring rate).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub target: GenGammaSpec,
    pub censor_rate: f64,
    pub r_grid: Vec<u64>,
    pub m_grid: Vec<u64>,
    pub q: f64,
    pub alpha: f64,
    pub replications: u64,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// When true, only uncensored failure times enter the order statistics.
    #[serde(default)]
    pub events_only: bool,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        GenGammaSpec::new(self.target.shape_alpha, self.target.rate_beta, self.target.shape_delta)?;
        if !(0.0..=0.9).contains(&self.censor_rate) {
            return Err(Error::domain(format!("censor_rate must lie in [0, 0.9], got {}", self.censor_rate)));
        }
        if self.replications < 100 {
            return Err(Error::domain(format!("replications must be >= 100, got {}", self.replications)));
        }
        ToleranceSpec::new(1, 1, self.q, self.alpha)?;
        if self.r_grid.is_empty() || self.m_grid.is_empty() || self.methods.is_empty() {
            return Err(Error::EmptyInput("r_grid, m_grid and methods must be nonempty".to_string()));
        }
        Ok(())
    }
}

/// Deterministic per-cell seed stream split from a master seed (splitmix64
/// over the mixed-in parts).
pub(crate) fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut z = master ^ 0x9e37_79b9_7f4a_7c15;
    for &p in parts {
        z ^= p.wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

/// Exact length-biased draws via the size-bias closure (kappa = 1).
pub fn draw_length_biased(target: &GenGammaSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    Ok(target.size_bias(1.0)?.sample(count, seed))
}

fn censor_one<R: Rng + ?Sized>(y: f64, lambda: f64, rng: &mut R) -> ObservedTime {
    let u: f64 = rng.random();
    let backward = u * y;
    let forward = y - backward;
    if lambda <= 0.0 {
        return ObservedTime { value: y, event: true };
    }
    let c = -rng.random::<f64>().ln() / lambda;
    ObservedTime {
        value: backward + forward.min(c),
        event: forward <= c,
    }
}

/// Apply forward-time Exponential(lambda) censoring to length-biased
/// lifetimes. With lambda -> 0 every record is an observed event.
pub fn censor_forward(lifetimes: &[f64], lambda: f64, seed: u64) -> Vec<ObservedTime> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    lifetimes.iter().map(|&y| censor_one(y, lambda, &mut rng)).collect()
}

/// Censoring rate lambda such that P(C < R) matches `censor_rate`. The
/// probability is estimated as the Monte Carlo mean of 1 - exp(-lambda R)
/// over 1e5 forward times (C marginalized analytically, so the same draws
/// serve every bisection step).
pub fn calibrate_lambda(target: &GenGammaSpec, censor_rate: f64, seed: u64) -> Result<f64> {
    if !(0.0 < censor_rate && censor_rate < 1.0) {
        return Err(Error::domain(format!("censor_rate must lie in (0,1), got {censor_rate}")));
    }
    let draws = 100_000usize;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let biased = target.size_bias(1.0)?;
    let forward: Vec<f64> = (0..draws)
        .map(|_| {
            let y = biased.sample_with(&mut rng);
            let u: f64 = rng.random();
            (1.0 - u) * y
        })
        .collect();
    let rate = |lambda: f64| -> f64 {
        forward.iter().map(|&r| -(-lambda * r).exp_m1()).sum::<f64>() / draws as f64
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut steps = 0usize;
    while rate(hi) < censor_rate {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 200 {
            return Err(Error::NonConvergence {
                iterations: steps,
                context: "calibrate_lambda bracket expansion".to_string(),
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = rate(mid);
        if (r - censor_rate).abs() < 1e-9 || (hi - lo) < 1e-12 * hi.max(1.0) {
            return Ok(mid);
        }
        if r < censor_rate {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Err(Error::NonConvergence { iterations: steps, context: "calibrate_lambda bisection".to_string() })
}

/// Empirical coverage: the fraction of replications in which the target-CDF
/// span of the (r, n+1-m) observed order statistics reaches q. Returns the
/// estimate and its binomial standard error.
#[allow(clippy::too_many_arguments)]
pub fn empirical_coverage(
    target: &GenGammaSpec,
    lambda: f64,
    n: u64,
    r: u64,
    m: u64,
    q: f64,
    reps: u64,
    seed: u64,
    events_only: bool,
) -> Result<(f64, f64)> {
    if n <= r + m {
        return Err(Error::infeasible(format!("empirical_coverage requires n > r + m, got n={n}")));
    }
    let biased = target.size_bias(1.0)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    let mut values = Vec::with_capacity(n as usize);
    for _ in 0..reps {
        values.clear();
        for _ in 0..n {
            let y = biased.sample_with(&mut rng);
            let obs = censor_one(y, lambda, &mut rng);
            if !events_only || obs.event {
                values.push(obs.value);
            }
        }
        let len = values.len() as u64;
        if len < r + m {
            continue; // tolerance interval undefined, counts as a miss
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lower = values[(r - 1) as usize];
        let upper = values[(len - m) as usize];
        let span = target.cdf(upper)? - target.cdf(lower)?;
        if span >= q {
            hits += 1;
        }
    }
    let p = hits as f64 / reps as f64;
    let se = (p * (1.0 - p) / reps as f64).sqrt();
    Ok((p, se))
}

/// One output row of the comparison grid.
#[derive(Debug, Clone, Serialize)]
pub struct GridRow {
    pub target_shape: f64,
    pub target_rate: f64,
    pub censor_rate: f64,
    pub r: u64,
    pub m: u64,
    pub method: String,
    pub n: Option<u64>,
    pub coverage: Option<f64>,
    pub stderr: Option<f64>,
    pub runtime_ms: f64,
}

/// Build the quantile map a configuration calls for: analytic under pure
/// length bias, Monte Carlo when censoring makes G intractable.
pub fn config_map(config: &SimConfig) -> Result<(QuantileMap, f64)> {
    if config.censor_rate == 0.0 {
        let map = QuantileMap::analytic(&config.target, 1.0, DEFAULT_KNOT_COUNT)?;
        return Ok((map, 0.0));
    }
    let lambda = calibrate_lambda(&config.target, config.censor_rate, derive_seed(config.seed, &[0xCA11]))?;
    let target = config.target;
    let biased = target.size_bias(1.0)?;
    let events_only = config.events_only;
    let map = QuantileMap::monte_carlo(
        move |rng| target.sample_with(rng),
        move |rng| loop {
            let y = biased.sample_with(rng);
            let obs = censor_one(y, lambda, rng);
            if !events_only || obs.event {
                return obs.value;
            }
        },
        DEFAULT_MC_DRAWS,
        DEFAULT_KNOT_COUNT,
        derive_seed(config.seed, &[0x3A9]),
    )?;
    Ok((map, lambda))
}

/// Run every (r, m, method) cell of a configuration: solve for n, then
/// estimate the empirical coverage at that n. Cells run in parallel;
/// per-cell failures are logged and leave the row's result fields empty.
pub fn run_grid(config: &SimConfig) -> Result<Vec<GridRow>> {
    config.validate()?;
    let (map, lambda) = config_map(config)?;
    let cells: Vec<(u64, u64, Method)> = config
        .r_grid
        .iter()
        .flat_map(|&r| {
            config.m_grid.iter().flat_map(move |&m| {
                config.methods.iter().map(move |&method| (r, m, method))
            })
        })
        .collect();

    let rows: Vec<GridRow> = cells
        .par_iter()
        .map(|&(r, m, method)| {
            let start = std::time::Instant::now();
            let mut row = GridRow {
                target_shape: config.target.shape_alpha,
                target_rate: config.target.rate_beta,
                censor_rate: config.censor_rate,
                r,
                m,
                method: method.label().to_string(),
                n: None,
                coverage: None,
                stderr: None,
                runtime_ms: 0.0,
            };
            match run_cell(config, &map, lambda, r, m, method) {
                Ok((n, coverage, stderr)) => {
                    row.n = Some(n);
                    row.coverage = Some(coverage);
                    row.stderr = Some(stderr);
                }
                Err(e) => {
                    log::warn!("cell r={r} m={m} method={}: {e}", method.label());
                }
            }
            row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            row
        })
        .collect();
    Ok(rows)
}

fn run_cell(
    config: &SimConfig,
    map: &QuantileMap,
    lambda: f64,
    r: u64,
    m: u64,
    method: Method,
) -> Result<(u64, f64, f64)> {
    let spec = ToleranceSpec::new(r, m, config.q, config.alpha)?;
    let n = match method {
        Method::ScheffeTukey => scheffe_tukey_sample_size(&spec)?.n,
        Method::ExactBeta => crate::tolerance_classic::exact_sample_size(&spec)?.n,
        Method::Inequality => sample_size_inequality(&spec, map)?.n,
        Method::Fft => sample_size_fft(&spec, map, &FftConfig::default())?.n,
    }
    .max(r + m + 1);
    let seed = derive_seed(config.seed, &[r, m, method as u64 + 1]);
    let (coverage, stderr) = empirical_coverage(
        &config.target,
        lambda,
        n,
        r,
        m,
        config.q,
        config.replications,
        seed,
        config.events_only,
    )?;
    Ok((n, coverage, stderr))
}

/// Write rows as CSV with the fixed header
/// `target_shape,target_rate,censor_rate,r,m,method,n,coverage,stderr,runtime_ms`.
pub fn write_rows_csv<W: IoWrite>(rows: &[GridRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Parse a simulation TOML file: either a single table mirroring [`SimConfig`]
/// or an array of such tables under `[[runs]]`.
pub fn parse_config_runs(text: &str) -> Result<Vec<SimConfig>> {
    #[derive(Deserialize)]
    struct Runs {
        runs: Vec<SimConfig>,
    }
    if let Ok(multi) = toml::from_str::<Runs>(text) {
        return Ok(multi.runs);
    }
    let single: SimConfig =
        toml::from_str(text).map_err(|e| Error::Format(format!("simulation config: {e}")))?;
    Ok(vec![single])
}
