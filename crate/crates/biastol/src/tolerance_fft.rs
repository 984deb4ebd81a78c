//! User-facing FFT solvers: two-sided coverage as the alpha-quantile of the
//! convolved difference law, and sample size by integer root-finding on n.

use crate::error::{Error, Result};
use crate::fft_conv::{difference_law, FftConfig};
use crate::quantile_map::QuantileMap;
use crate::search::smallest_feasible_n;
use crate::tolerance_classic::{
    scheffe_tukey_sample_size, Diagnostics, Method, SampleSizeResult, ToleranceSpec,
    SAMPLE_SIZE_CAP,
};

/// Coverage q such that P[F(Y_{n+1-m}) - F(Y_r) >= q] ~= 1 - alpha:
/// the alpha-quantile of the convolved difference law, with a second-order
/// dependence correction.
///
/// The convolution treats F(Y_r) and F(Y_{n+1-m}) as independent, which
/// inflates the variance of the difference by 2 cov(F(Y_r), F(Y_{n+1-m})).
/// The uniform order statistics underneath have the known covariance
/// r m / ((n+1)^2 (n+2)); the delta method carries it through the inverse
/// map. Rescaling the law about its mean to remove the inflation makes the
/// identity-map case match the exact Beta(n+1-k, k) quantile to well under
/// one integer step of n, without leaving the convolution framework.
pub fn coverage_fft(
    n: u64,
    r: u64,
    m: u64,
    alpha: f64,
    map: &QuantileMap,
    config: &FftConfig,
) -> Result<f64> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let d = difference_law(n, r, m, map, config)?;
    let q_raw = d.quantile(alpha)?;

    let (mut mean, mut var) = (0.0, 0.0);
    for (i, &mass) in d.masses.iter().enumerate() {
        let x = d.origin + d.step * (i as f64 + 0.5);
        mean += mass * x;
        var += mass * x * x;
    }
    var -= mean * mean;
    let slope = |p: f64| -> Result<f64> {
        let h = 5e-3;
        let lo = (p - h).max(0.0);
        let hi = (p + h).min(1.0);
        Ok((map.inverse_eval(hi)? - map.inverse_eval(lo)?) / (hi - lo))
    };
    let np1 = (n + 1) as f64;
    let cov_uniform = (r * m) as f64 / (np1 * np1 * (n + 2) as f64);
    let cov = slope(r as f64 / np1)? * slope((n + 1 - m) as f64 / np1)? * cov_uniform;
    let scale = if var > 0.0 { ((var - 2.0 * cov).max(0.0) / var).sqrt() } else { 1.0 };
    let q = mean + scale * (q_raw - mean);

    if q < 0.0 {
        return Err(Error::infeasible(format!(
            "FFT coverage negative ({q:.4}) at n = {n}, r = {r}, m = {m}"
        )));
    }
    Ok(q.min(1.0))
}

/// Smallest n with coverage_fft >= q. Discretizations are rebuilt per n; only
/// the map and config are shared across the search.
pub fn sample_size_fft(
    spec: &ToleranceSpec,
    map: &QuantileMap,
    config: &FftConfig,
) -> Result<SampleSizeResult> {
    let start = std::time::Instant::now();
    let guess = scheffe_tukey_sample_size(spec)?.n;
    let (n, evaluations) = smallest_feasible_n(spec.k() + 1, guess, SAMPLE_SIZE_CAP, |n| {
        Ok(coverage_fft(n, spec.r, spec.m, spec.alpha, map, config)? >= spec.q)
    })?;
    let achieved = coverage_fft(n, spec.r, spec.m, spec.alpha, map, config)?;
    Ok(SampleSizeResult {
        n,
        method: Method::Fft,
        achieved,
        diagnostics: Diagnostics {
            evaluations,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            grid_cells: Some(config.target_cells),
            truncated_mass: Some(2.0 * config.epsilon),
        },
    })
}
