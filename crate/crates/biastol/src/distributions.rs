//! Parametric distribution families used by the solvers: Beta (CDF and
//! quantile), Chi-square quantiles, and the Generalized Gamma family with its
//! closure under size-biased sampling.
//!
//! Random draws use an explicitly seeded ChaCha12 generator throughout the
//! crate; no operation touches global RNG state.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special;

/// Parameters of a Beta(a, b) distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaParams {
    pub a: f64,
    pub b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain(format!("Beta parameters must be positive, got a={a}, b={b}")));
        }
        Ok(Self { a, b })
    }
}

/// Regularized incomplete beta function I_x(a, b), the Beta(a, b) CDF.
pub fn pbeta(x: f64, p: &BetaParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("pbeta requires x in [0,1], got {x}")));
    }
    Ok(special::inc_beta(p.a, p.b, x))
}

/// Beta(a, b) quantile, inverse of [`pbeta`].
pub fn qbeta(prob: f64, p: &BetaParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::domain(format!("qbeta requires prob in [0,1], got {prob}")));
    }
    if prob == 0.0 {
        return Ok(0.0);
    }
    if prob == 1.0 {
        return Ok(1.0);
    }
    let (a, b) = (p.a, p.b);
    let ln_b = special::ln_beta(a, b);
    let pdf = move |x: f64| {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            ((a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_b).exp()
        }
    };
    Ok(special::invert_monotone(
        |x| special::inc_beta(a, b, x) - prob,
        pdf,
        0.0,
        1.0,
        1e-14,
    ))
}

/// Quantile of the Chi-square distribution with `df` degrees of freedom.
pub fn chisq_quantile(prob: f64, df: u64) -> Result<f64> {
    if !(0.0 < prob && prob < 1.0) {
        return Err(Error::domain(format!("chisq_quantile requires prob in (0,1), got {prob}")));
    }
    if df == 0 {
        return Err(Error::domain("chisq_quantile requires df >= 1".to_string()));
    }
    let a = df as f64 / 2.0;
    // bracket in x-space by doubling past the target probability
    let mut hi = 2.0 * df as f64 + 10.0;
    while special::inc_gamma_lower(a, hi / 2.0) < prob {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::domain("chisq_quantile bracket expansion failed".to_string()));
        }
    }
    let pdf = move |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            0.5 * ((a - 1.0) * (x / 2.0).ln() - x / 2.0 - special::ln_gamma(a)).exp()
        }
    };
    Ok(special::invert_monotone(
        |x| special::inc_gamma_lower(a, x / 2.0) - prob,
        pdf,
        0.0,
        hi,
        1e-13,
    ))
}

/// Generalized Gamma distribution with density
/// `f(x) = delta * beta^alpha / Gamma(alpha/delta) * x^{alpha-1} * exp(-(beta x)^delta)`
/// for x > 0. With `shape_delta = 1` this is the ordinary
/// Gamma(shape_alpha, rate_beta); with `shape_alpha = shape_delta = 1` it is
/// Exponential(rate_beta).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenGammaSpec {
    pub shape_alpha: f64,
    pub rate_beta: f64,
    #[serde(default = "one")]
    pub shape_delta: f64,
}

fn one() -> f64 {
    1.0
}

impl GenGammaSpec {
    pub fn new(shape_alpha: f64, rate_beta: f64, shape_delta: f64) -> Result<Self> {
        for (name, v) in [("shape_alpha", shape_alpha), ("rate_beta", rate_beta), ("shape_delta", shape_delta)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("GenGammaSpec.{name} must be positive, got {v}")));
            }
        }
        Ok(Self { shape_alpha, rate_beta, shape_delta })
    }

    /// Ordinary Gamma(shape, rate).
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(shape, rate, 1.0)
    }

    /// Exponential(rate).
    pub fn exponential(rate: f64) -> Result<Self> {
        Self::new(1.0, rate, 1.0)
    }

    /// CDF at `x >= 0`, via the regularized lower incomplete gamma function:
    /// (beta X)^delta ~ Gamma(alpha/delta, 1).
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 || x.is_nan() {
            return Err(Error::domain(format!("gengamma cdf requires x >= 0, got {x}")));
        }
        let u = (self.rate_beta * x).powf(self.shape_delta);
        Ok(special::inc_gamma_lower(self.shape_alpha / self.shape_delta, u))
    }

    /// Density at `x > 0` (0 at x <= 0 unless the density diverges there).
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (a, b, d) = (self.shape_alpha, self.rate_beta, self.shape_delta);
        (d.ln() + a * b.ln() - special::ln_gamma(a / d) + (a - 1.0) * x.ln() - (b * x).powf(d))
            .exp()
    }

    /// Quantile function, inverse of [`GenGammaSpec::cdf`].
    pub fn quantile(&self, prob: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::domain(format!("gengamma quantile requires prob in [0,1], got {prob}")));
        }
        if prob == 1.0 {
            return Err(Error::UnboundedQuantile);
        }
        if prob == 0.0 {
            return Ok(0.0);
        }
        let a = self.shape_alpha / self.shape_delta;
        // invert in u = (beta x)^delta space, where u ~ Gamma(a, 1)
        let mut hi = a + 10.0;
        while special::inc_gamma_lower(a, hi) < prob {
            hi *= 2.0;
        }
        let pdf = move |u: f64| {
            if u <= 0.0 {
                0.0
            } else {
                ((a - 1.0) * u.ln() - u - special::ln_gamma(a)).exp()
            }
        };
        let u = special::invert_monotone(
            |u| special::inc_gamma_lower(a, u) - prob,
            pdf,
            0.0,
            hi,
            1e-15,
        );
        Ok(u.powf(1.0 / self.shape_delta) / self.rate_beta)
    }

    /// E\[X^k\] = Gamma((alpha + k)/delta) / (Gamma(alpha/delta) beta^k).
    pub fn moment(&self, k: f64) -> f64 {
        let (a, b, d) = (self.shape_alpha, self.rate_beta, self.shape_delta);
        (special::ln_gamma((a + k) / d) - special::ln_gamma(a / d) - k * b.ln()).exp()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1.0)
    }

    /// Exact law of the size-biased density `x^kappa f(x) / E[X^kappa]`:
    /// the family is closed, with shape_alpha shifted by kappa.
    pub fn size_bias(&self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::domain(format!("size_bias requires kappa > 0, got {kappa}")));
        }
        Self::new(self.shape_alpha + kappa, self.rate_beta, self.shape_delta)
    }

    /// One draw using the supplied generator, via (beta X)^delta ~ Gamma(a, 1).
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = self.shape_alpha / self.shape_delta;
        let g = rand_distr::Gamma::new(a, 1.0).expect("validated shape");
        let u: f64 = rng.sample(g);
        u.powf(1.0 / self.shape_delta) / self.rate_beta
    }

    /// Reproducible draws from an explicit seed (ChaCha12).
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample_with(&mut rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pbeta_examples() {
        let p = BetaParams::new(2.0, 2.0).unwrap();
        assert!((pbeta(0.5, &p).unwrap() - 0.5).abs() < 1e-14);
        // binomial-identity oracle: I_0.2(2, 21) = P(Bin(22, 0.2) >= 2)
        let p = BetaParams::new(2.0, 21.0).unwrap();
        assert!((pbeta(0.2, &p).unwrap() - 0.952_038_465_408_355_1).abs() < 1e-12);
        let p = BetaParams::new(3.0, 7.0).unwrap();
        assert_eq!(pbeta(0.0, &p).unwrap(), 0.0);
        assert!(pbeta(1.5, &p).is_err());
        assert!(BetaParams::new(-1.0, 2.0).is_err());
    }

    #[test]
    fn pbeta_monotone_in_x() {
        let p = BetaParams::new(2.5, 7.0).unwrap();
        let mut prev = 0.0;
        for i in 0..=100 {
            let v = pbeta(i as f64 / 100.0, &p).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn qbeta_examples() {
        let p = BetaParams::new(2.0, 2.0).unwrap();
        assert!((qbeta(0.5, &p).unwrap() - 0.5).abs() < 1e-12);
        let p = BetaParams::new(2.0, 21.0).unwrap();
        let x = qbeta(0.95, &p).unwrap();
        assert!((pbeta(x, &p).unwrap() - 0.95).abs() < 1e-10);
        let p = BetaParams::new(5.0, 1.0).unwrap();
        assert_eq!(qbeta(1.0, &p).unwrap(), 1.0);
    }

    #[test]
    fn pbeta_qbeta_round_trip_grid() {
        for &a in &[0.5, 1.0, 2.0, 21.0, 100.0] {
            for &b in &[0.5, 1.0, 2.0, 21.0, 100.0] {
                let p = BetaParams::new(a, b).unwrap();
                for i in 1..20 {
                    let prob = i as f64 / 20.0;
                    let x = qbeta(prob, &p).unwrap();
                    let back = pbeta(x, &p).unwrap();
                    assert!(
                        (back - prob).abs() <= 1e-9,
                        "round trip a={a} b={b} prob={prob}: got {back}"
                    );
                }
            }
        }
    }

    #[test]
    fn chisq_quantile_examples() {
        // df = 2 closed form: -2 ln(1 - p)
        assert!((chisq_quantile(0.95, 2).unwrap() - 5.991_464_547_107_98).abs() < 1e-10);
        assert!((chisq_quantile(0.5, 2).unwrap() - 1.386_294_361_119_890_6).abs() < 1e-12);
        assert!((chisq_quantile(0.95, 4).unwrap() - 9.487_729_036_781_154).abs() < 1e-9);
        assert!(chisq_quantile(0.0, 2).is_err());
        assert!(chisq_quantile(1.0, 2).is_err());
    }

    #[test]
    fn chisq_df2_closed_form_grid() {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let exact = -2.0 * (1.0 - p).ln();
            assert!((chisq_quantile(p, 2).unwrap() - exact).abs() < 1e-12 * (1.0 + exact));
        }
    }

    #[test]
    fn gengamma_cdf_special_cases() {
        let exp2 = GenGammaSpec::exponential(2.0).unwrap();
        for i in 0..20 {
            let x = i as f64 * 0.2;
            assert!((exp2.cdf(x).unwrap() - (1.0 - (-2.0 * x).exp())).abs() < 1e-13);
        }
        let g22 = GenGammaSpec::gamma(2.0, 2.0).unwrap();
        assert_eq!(g22.cdf(0.0).unwrap(), 0.0);
        // Gamma(2, rate 2) CDF at 1: 1 - e^{-2}(1 + 2)
        assert!((g22.cdf(1.0).unwrap() - 0.593_994_150_290_161_6).abs() < 1e-12);
        assert!(g22.cdf(-0.1).is_err());
    }

    #[test]
    fn gengamma_cdf_vs_independent_gamma_series() {
        // Independent series oracle for the Gamma CDF (delta = 1):
        // P(a, x) = x^a e^{-x} sum_{k>=0} x^k / Gamma(a + k + 1).
        let series = |a: f64, x: f64| {
            let mut term = (a * x.ln() - x - special::ln_gamma(a + 1.0)).exp();
            let mut sum = term;
            let mut k = 0.0;
            while term > 1e-18 * sum && k < 10_000.0 {
                term *= x / (a + k + 1.0);
                sum += term;
                k += 1.0;
            }
            sum
        };
        for &(a, b) in &[(0.5, 2.0), (1.0, 2.0), (2.0, 2.0), (3.7, 0.9)] {
            let spec = GenGammaSpec::gamma(a, b).unwrap();
            for i in 1..15 {
                let x = i as f64 * 0.3;
                assert!(
                    (spec.cdf(x).unwrap() - series(a, b * x)).abs() < 1e-10,
                    "gamma cdf mismatch a={a} b={b} x={x}"
                );
            }
        }
    }

    #[test]
    fn gengamma_quantile_examples() {
        let exp2 = GenGammaSpec::exponential(2.0).unwrap();
        assert!((exp2.quantile(0.5).unwrap() - 2f64.ln() / 2.0).abs() < 1e-12);
        assert_eq!(exp2.quantile(0.0).unwrap(), 0.0);
        assert!(matches!(exp2.quantile(1.0), Err(Error::UnboundedQuantile)));
        let g22 = GenGammaSpec::gamma(2.0, 2.0).unwrap();
        // bisection oracle: root of 1 - e^{-2y}(1 + 2y) = 0.8
        let y = g22.quantile(0.8).unwrap();
        assert!((y - 1.497_154_173_501_061_2).abs() < 1e-9);
        // round trip across the family
        let gg = GenGammaSpec::new(1.3, 0.7, 2.2).unwrap();
        for i in 1..20 {
            let p = i as f64 / 20.0;
            assert!((gg.cdf(gg.quantile(p).unwrap()).unwrap() - p).abs() < 1e-10);
        }
    }

    #[test]
    fn size_bias_closure() {
        let exp2 = GenGammaSpec::exponential(2.0).unwrap();
        let b = exp2.size_bias(1.0).unwrap();
        assert_eq!(b, GenGammaSpec::gamma(2.0, 2.0).unwrap());
        let g = GenGammaSpec::gamma(0.5, 2.0).unwrap().size_bias(1.0).unwrap();
        assert_eq!(g, GenGammaSpec::gamma(1.5, 2.0).unwrap());
        // degree-zero limit
        let s = GenGammaSpec::new(1.4, 2.0, 1.1).unwrap();
        let tiny = s.size_bias(1e-12).unwrap();
        assert!((tiny.shape_alpha - s.shape_alpha).abs() < 1e-9);
        assert!(s.size_bias(0.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_calibrated() {
        let g22 = GenGammaSpec::gamma(2.0, 2.0).unwrap();
        assert_eq!(g22.sample(1, 99)[0], g22.sample(1, 99)[0]);
        let draws = g22.sample(200_000, 17);
        let mean: f64 = draws.iter().sum::<f64>() / draws.len() as f64;
        // Gamma(2, rate 2): mean 1, var 1/2; 4 sigma band
        assert!((mean - 1.0).abs() < 4.0 * (0.5f64 / 200_000.0).sqrt(), "mean {mean}");
    }

    #[test]
    fn sampling_ks_against_cdf() {
        let exp2 = GenGammaSpec::exponential(2.0).unwrap();
        let mut draws = exp2.sample(100_000, 5);
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = draws.len() as f64;
        let mut ks = 0.0f64;
        for (i, &x) in draws.iter().enumerate() {
            let c = exp2.cdf(x).unwrap();
            ks = ks.max((c - i as f64 / n).abs()).max(((i + 1) as f64 / n - c).abs());
        }
        // 1% critical value 1.63 / sqrt(n)
        assert!(ks < 1.63 / n.sqrt(), "KS = {ks}");
    }
}
