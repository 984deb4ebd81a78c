//! Distribution of the transformed order statistic F(Y_j) when Y_1 <= ... <=
//! Y_n are drawn from the biased distribution G: the CDF
//! `H_j(z) = pbeta(Phi(z); j, n+1-j)` and its inverse
//! `H_j^{-1}(p) = Phi^{-1}(qbeta(p; j, n+1-j))`, plus the one-sided
//! Scheffe-Tukey coverage solutions under bias.

use crate::distributions::{chisq_quantile, pbeta, qbeta, BetaParams};
use crate::error::{Error, Result};
use crate::quantile_map::QuantileMap;

/// The law of F(Y_j) for a biased sample of size n.
#[derive(Debug, Clone, Copy)]
pub struct OrderStatLaw<'a> {
    pub j: u64,
    pub n: u64,
    pub map: &'a QuantileMap,
}

impl<'a> OrderStatLaw<'a> {
    pub fn new(j: u64, n: u64, map: &'a QuantileMap) -> Result<Self> {
        if j < 1 || j > n {
            return Err(Error::domain(format!("order statistic index requires 1 <= j <= n, got j={j}, n={n}")));
        }
        Ok(Self { j, n, map })
    }

    fn beta(&self) -> BetaParams {
        // validated: j >= 1, n + 1 - j >= 1
        BetaParams {
            a: self.j as f64,
            b: (self.n + 1 - self.j) as f64,
        }
    }

    /// H_j(z) = pbeta(Phi(z); j, n+1-j). Phi is evaluated through the stored
    /// forward knots, never by inverting the inverse knots.
    pub fn hcdf(&self, z: f64) -> Result<f64> {
        pbeta(self.map.eval(z)?, &self.beta())
    }

    /// H_j^{-1}(p) = Phi^{-1}(qbeta(p; j, n+1-j)).
    pub fn hquantile(&self, p: f64) -> Result<f64> {
        self.map.inverse_eval(qbeta(p, &self.beta())?)
    }
}

/// The Scheffe-Tukey rational term (n - (j-1)/2 - x/4) / (n - (j-1)/2 + x/4),
/// with x the 1-alpha quantile of Chi-square(2j). Note the one-sided formulas
/// use 2j degrees of freedom, unlike the two-sided k = r + m convention.
fn rho(n: u64, j: u64, alpha: f64) -> Result<f64> {
    let x = chisq_quantile(1.0 - alpha, 2 * j)?;
    let center = n as f64 - 0.5 * (j as f64 - 1.0);
    let num = center - 0.25 * x;
    if num < 0.0 {
        return Err(Error::infeasible(format!(
            "one-sided Scheffe-Tukey term negative at n = {n}, j = {j}"
        )));
    }
    Ok(num / (center + 0.25 * x))
}

/// One-sided lower solution: proportion q_r of the target population above
/// the r-th smallest biased order statistic with confidence 1 - alpha_r:
/// q_r = 1 - Phi^{-1}(1 - rho_r(n)).
pub fn one_sided_lower(n: u64, r: u64, alpha_r: f64, map: &QuantileMap) -> Result<f64> {
    if n <= r {
        return Err(Error::infeasible(format!("one_sided_lower requires n > r, got n={n}, r={r}")));
    }
    Ok(1.0 - map.inverse_eval(1.0 - rho(n, r, alpha_r)?)?)
}

/// One-sided upper solution: proportion q_m of the target population below
/// the m-th largest biased order statistic with confidence 1 - alpha_m:
/// q_m = Phi^{-1}(rho_m(n)).
pub fn one_sided_upper(n: u64, m: u64, alpha_m: f64, map: &QuantileMap) -> Result<f64> {
    if n <= m {
        return Err(Error::infeasible(format!("one_sided_upper requires n > m, got n={n}, m={m}")));
    }
    map.inverse_eval(rho(n, m, alpha_m)?)
}
