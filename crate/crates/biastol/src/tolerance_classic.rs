//! Tolerance solvers for unbiased sampling: the exact Beta solution and the
//! Scheffe-Tukey closed-form approximation, in both the sample-size and
//! coverage directions. These are distribution-free: no quantile map enters.

use serde::{Deserialize, Serialize};

use crate::distributions::{chisq_quantile, pbeta, qbeta, BetaParams};
use crate::error::{Error, Result};
use crate::search::smallest_feasible_n;

/// The design tuple of a two-sided tolerance problem: cover at least a
/// proportion `q` of the population between the `r`-th smallest and `m`-th
/// largest order statistics, with confidence `1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSpec {
    pub r: u64,
    pub m: u64,
    pub q: f64,
    pub alpha: f64,
}

impl ToleranceSpec {
    pub fn new(r: u64, m: u64, q: f64, alpha: f64) -> Result<Self> {
        if r < 1 || m < 1 {
            return Err(Error::domain(format!("order statistic indices must be >= 1, got r={r}, m={m}")));
        }
        if !(0.0 < q && q < 1.0) {
            return Err(Error::domain(format!("q must lie in (0,1), got {q}")));
        }
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::domain(format!("alpha must lie in (0,1), got {alpha}")));
        }
        Ok(Self { r, m, q, alpha })
    }

    /// k = r + m, the combined order-statistic depth.
    pub fn k(&self) -> u64 {
        self.r + self.m
    }
}

/// Which solver produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactBeta,
    ScheffeTukey,
    Inequality,
    Fft,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::ExactBeta => "ExactBeta",
            Method::ScheffeTukey => "ScheffeTukey",
            Method::Inequality => "Inequality",
            Method::Fft => "FFT",
        }
    }
}

/// Solver diagnostics surfaced through the CLI.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub evaluations: u32,
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_mass: Option<f64>,
}

/// A solved sample size together with the coverage achieved at that n.
#[derive(Debug, Clone, Serialize)]
pub struct SampleSizeResult {
    pub n: u64,
    pub method: Method,
    pub achieved: f64,
    pub diagnostics: Diagnostics,
}

/// Hard cap on every integer sample-size search.
pub const SAMPLE_SIZE_CAP: u64 = 10_000_000;

/// Smallest n with pbeta(1-q; k, n+1-k) >= 1 - alpha (exact Beta solution).
pub fn exact_sample_size(spec: &ToleranceSpec) -> Result<SampleSizeResult> {
    let start = std::time::Instant::now();
    let k = spec.k();
    let guess = scheffe_tukey_n(spec)?.max(k + 1);
    let (n, evaluations) = smallest_feasible_n(k, guess, SAMPLE_SIZE_CAP, |n| {
        let p = BetaParams::new(k as f64, (n + 1 - k) as f64)?;
        Ok(pbeta(1.0 - spec.q, &p)? >= 1.0 - spec.alpha)
    })?;
    let achieved = exact_coverage(n, spec.r, spec.m, spec.alpha)?;
    Ok(SampleSizeResult {
        n,
        method: Method::ExactBeta,
        achieved,
        diagnostics: Diagnostics {
            evaluations,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            ..Default::default()
        },
    })
}

fn scheffe_tukey_n(spec: &ToleranceSpec) -> Result<u64> {
    let k = spec.k();
    let x_alpha = chisq_quantile(1.0 - spec.alpha, 2 * k)?;
    let n = 0.25 * x_alpha * (1.0 + spec.q) / (1.0 - spec.q) + 0.5 * (k as f64 - 1.0);
    Ok(n.ceil() as u64)
}

/// Scheffe-Tukey closed form n = ceil(x_alpha (1+q) / (4(1-q)) + (k-1)/2),
/// with x_alpha the 1-alpha quantile of Chi-square(2k). Rounded up: the
/// coverage guarantee is one-sided.
pub fn scheffe_tukey_sample_size(spec: &ToleranceSpec) -> Result<SampleSizeResult> {
    let start = std::time::Instant::now();
    let n = scheffe_tukey_n(spec)?.max(spec.k());
    let achieved = scheffe_tukey_coverage(n, spec.r, spec.m, spec.alpha).unwrap_or(f64::NAN);
    Ok(SampleSizeResult {
        n,
        method: Method::ScheffeTukey,
        achieved,
        diagnostics: Diagnostics {
            evaluations: 1,
            runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            ..Default::default()
        },
    })
}

/// Exact coverage q = 1 - qbeta(1-alpha; k, n+1-k) at fixed n.
pub fn exact_coverage(n: u64, r: u64, m: u64, alpha: f64) -> Result<f64> {
    let k = r + m;
    if n < k {
        return Err(Error::infeasible(format!("n = {n} < r + m = {k}")));
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let p = BetaParams::new(k as f64, (n + 1 - k) as f64)?;
    Ok(1.0 - qbeta(1.0 - alpha, &p)?)
}

/// Scheffe-Tukey coverage approximation
/// q = (n - (k-1)/2 - x_alpha/4) / (n - (k-1)/2 + x_alpha/4).
/// Reported as infeasible rather than clamped when the numerator is
/// nonpositive: a silent clamp would hide the approximation breaking down.
pub fn scheffe_tukey_coverage(n: u64, r: u64, m: u64, alpha: f64) -> Result<f64> {
    let k = r + m;
    if n < k {
        return Err(Error::infeasible(format!("n = {n} < r + m = {k}")));
    }
    let x_alpha = chisq_quantile(1.0 - alpha, 2 * k)?;
    let center = n as f64 - 0.5 * (k as f64 - 1.0);
    let num = center - 0.25 * x_alpha;
    if num <= 0.0 {
        return Err(Error::infeasible(format!(
            "Scheffe-Tukey coverage nonpositive at n = {n}, k = {k}"
        )));
    }
    Ok(num / (center + 0.25 * x_alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    const R_GRID: [u64; 4] = [1, 3, 5, 10];
    const M_GRID: [u64; 4] = [1, 2, 7, 12];

    #[test]
    fn exact_sample_size_examples() {
        // closed-form oracle for k = 2: 1 - n q^{n-1} + (n-1) q^n >= 1 - alpha
        let oracle = |q: f64, conf: f64| -> u64 {
            let mut n = 2u64;
            loop {
                let nf = n as f64;
                if 1.0 - nf * q.powi(n as i32 - 1) + (nf - 1.0) * q.powi(n as i32) >= conf {
                    return n;
                }
                n += 1;
            }
        };
        let s = ToleranceSpec::new(1, 1, 0.80, 0.05).unwrap();
        let n = exact_sample_size(&s).unwrap().n;
        assert_eq!(n, oracle(0.80, 0.95));
        assert_eq!(n, 22);

        let s = ToleranceSpec::new(1, 1, 0.99, 0.05).unwrap();
        let n = exact_sample_size(&s).unwrap().n;
        assert_eq!(n, oracle(0.99, 0.95));
        assert_eq!(n, 473);

        let s = ToleranceSpec::new(1, 1, 1e-9, 0.05).unwrap();
        assert_eq!(exact_sample_size(&s).unwrap().n, 2);
    }

    #[test]
    fn scheffe_tukey_table1_rows() {
        for (r, m, expect) in [(1u64, 1u64, 22u64), (10, 12, 147), (3, 7, 76)] {
            let s = ToleranceSpec::new(r, m, 0.80, 0.05).unwrap();
            assert_eq!(scheffe_tukey_sample_size(&s).unwrap().n, expect);
        }
    }

    #[test]
    fn exact_coverage_examples() {
        let q = exact_coverage(22, 1, 1, 0.05).unwrap();
        assert!((q - 0.801_877_868_363_118_5).abs() < 1e-9);
        let q = exact_coverage(473, 1, 1, 0.05).unwrap();
        assert!((q - 0.990_010_292_525_775_3).abs() < 1e-9);
        // alpha -> 1 limit
        let q = exact_coverage(22, 1, 1, 1.0 - 1e-9).unwrap();
        assert!(q > 0.999);
        assert!(exact_coverage(1, 1, 1, 0.05).is_err());
    }

    #[test]
    fn exact_coverage_inverse_consistency() {
        let q = exact_coverage(100, 2, 3, 0.05).unwrap();
        let s = ToleranceSpec::new(2, 3, q, 0.05).unwrap();
        assert!(exact_sample_size(&s).unwrap().n <= 100);
    }

    #[test]
    fn scheffe_tukey_coverage_examples() {
        let x = chisq_quantile(0.95, 4).unwrap();
        let expect = (22.0 - 0.5 - 0.25 * x) / (22.0 - 0.5 + 0.25 * x);
        let q = scheffe_tukey_coverage(22, 1, 1, 0.05).unwrap();
        assert!((q - expect).abs() < 1e-12);
        assert!((q - 0.80).abs() < 0.01);
        // large-n limit
        let q = scheffe_tukey_coverage(100_000_000, 1, 1, 0.05).unwrap();
        assert!(q > 0.999_999);
        // numerator-zero boundary reports infeasible
        assert!(matches!(scheffe_tukey_coverage(2, 1, 1, 0.05), Err(Error::Infeasible(_))));
    }

    #[test]
    fn scheffe_tukey_within_one_of_exact_on_grid() {
        for r in R_GRID {
            for m in M_GRID {
                for q in [0.8, 0.9, 0.95, 0.99] {
                    for alpha in [0.01, 0.05, 0.1] {
                        let s = ToleranceSpec::new(r, m, q, alpha).unwrap();
                        let ne = exact_sample_size(&s).unwrap().n as i64;
                        let ns = scheffe_tukey_sample_size(&s).unwrap().n as i64;
                        assert!(
                            (ne - ns).abs() <= 1,
                            "r={r} m={m} q={q} alpha={alpha}: exact {ne} vs ST {ns}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn scheffe_tukey_coverage_close_to_exact() {
        for r in R_GRID {
            for m in M_GRID {
                for n in [50u64, 100, 400] {
                    if n < 3 * (r + m) {
                        continue;
                    }
                    let e = exact_coverage(n, r, m, 0.05).unwrap();
                    let s = scheffe_tukey_coverage(n, r, m, 0.05).unwrap();
                    assert!((e - s).abs() < 0.01, "n={n} r={r} m={m}: {e} vs {s}");
                }
            }
        }
    }

    #[test]
    fn sample_size_monotonicity() {
        let n_of = |r, m, q, alpha| exact_sample_size(&ToleranceSpec::new(r, m, q, alpha).unwrap()).unwrap().n;
        assert!(n_of(1, 1, 0.9, 0.05) >= n_of(1, 1, 0.8, 0.05));
        assert!(n_of(1, 1, 0.8, 0.01) >= n_of(1, 1, 0.8, 0.05));
        assert!(n_of(3, 1, 0.8, 0.05) >= n_of(1, 1, 0.8, 0.05));
        assert!(n_of(1, 5, 0.8, 0.05) >= n_of(1, 1, 0.8, 0.05));
    }
}
