//! FFT convolution engine: discretize the laws of F(Y_{n+1-m}) and -F(Y_r)
//! on aligned uniform grids and form the density of their sum
//! D = F(Y_{n+1-m}) - F(Y_r) by minimal-size circular convolution.
//!
//! Cell masses are exact CDF increments rather than midpoint density values:
//! increments telescope to the exact truncated mass and stay finite where the
//! density of an extreme order statistic diverges at the support edge. The
//! transform size M = len_a + len_b exceeds the linear convolution length
//! len_a + len_b - 1, so the circular convolution is alias-free.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::order_stats::OrderStatLaw;
use crate::quantile_map::QuantileMap;

/// Zero-padding policy for the transform size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// Transform size exactly len_a + len_b.
    ExactM,
    /// Next power of two at or above len_a + len_b.
    NextPow2,
}

/// Grid and truncation parameters of the engine.
#[derive(Debug, Clone, Copy)]
pub struct FftConfig {
    /// Total tail mass truncated per order-statistic law (epsilon/2 each side).
    pub epsilon: f64,
    /// Approximate total number of cells across both discretized laws.
    pub target_cells: usize,
    pub padding: Padding,
}

impl Default for FftConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            target_cells: 4096,
            padding: Padding::NextPow2,
        }
    }
}

impl FftConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1e-4) {
            return Err(Error::domain(format!(
                "FftConfig.epsilon must lie in (0, 1e-4], got {}",
                self.epsilon
            )));
        }
        if self.target_cells < 64 {
            return Err(Error::domain(format!(
                "FftConfig.target_cells must be >= 64, got {}",
                self.target_cells
            )));
        }
        Ok(())
    }
}

/// A density discretized on a uniform grid: cell i covers
/// [origin + i*step, origin + (i+1)*step) and holds probability masses[i].
#[derive(Debug, Clone)]
pub struct GridDensity {
    pub origin: f64,
    pub step: f64,
    pub masses: Vec<f64>,
}

impl GridDensity {
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Scale masses to total 1.
    pub fn renormalize(&mut self) {
        let total = self.total_mass();
        if total > 0.0 {
            for m in &mut self.masses {
                *m /= total;
            }
        }
    }

    /// p-quantile of the piecewise-linear CDF through the cell right edges.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("quantile requires p in [0,1], got {p}")));
        }
        let mut cum = 0.0;
        for (i, &m) in self.masses.iter().enumerate() {
            let next = cum + m;
            if next >= p {
                let left = self.origin + i as f64 * self.step;
                let frac = if m > 0.0 { (p - cum) / m } else { 1.0 };
                return Ok(left + frac * self.step);
            }
            cum = next;
        }
        Ok(self.origin + self.masses.len() as f64 * self.step)
    }

    /// CDF of the piecewise-linear interpolant at `z`.
    pub fn cdf(&self, z: f64) -> f64 {
        if z <= self.origin {
            return 0.0;
        }
        let pos = (z - self.origin) / self.step;
        let cell = pos.floor() as usize;
        if cell >= self.masses.len() {
            return self.total_mass();
        }
        let before: f64 = self.masses[..cell].iter().sum();
        before + self.masses[cell] * (pos - cell as f64)
    }
}

/// Effective support (L, U) of the law: L = H^{-1}(eps/2), U = H^{-1}(1-eps/2).
pub fn support_bounds(law: &OrderStatLaw, epsilon: f64) -> Result<(f64, f64)> {
    if !(0.0 < epsilon && epsilon < 1.0) {
        return Err(Error::domain(format!("support_bounds requires epsilon in (0,1), got {epsilon}")));
    }
    let lo = law.hquantile(epsilon / 2.0)?;
    let hi = law.hquantile(1.0 - epsilon / 2.0)?;
    Ok((lo, hi))
}

/// Discretize a law on `len` cells starting at `origin` with width `step`.
/// Masses are CDF increments over the cell edges (edges clamped into [0, 1],
/// where the CDF is constant outside). With `negate` the returned density is
/// the law of -F(Y_j) on the mirrored grid.
pub fn discretize(
    law: &OrderStatLaw,
    negate: bool,
    origin: f64,
    step: f64,
    len: usize,
) -> Result<GridDensity> {
    if !(step > 0.0) {
        return Err(Error::domain(format!("grid step must be positive, got {step}")));
    }
    if len == 0 {
        return Err(Error::EmptyInput("discretize called with zero cells".to_string()));
    }
    let cdf_at = |z: f64| law.hcdf(z.clamp(0.0, 1.0));
    let mut masses = Vec::with_capacity(len);
    if negate {
        // cell [origin + k*step, origin + (k+1)*step) holds
        // H(-(origin + k*step)) - H(-(origin + (k+1)*step))
        let mut right = cdf_at(-origin)?;
        for k in 0..len {
            let left = cdf_at(-(origin + (k + 1) as f64 * step))?;
            masses.push((right - left).max(0.0));
            right = left;
        }
    } else {
        let mut left = cdf_at(origin)?;
        for k in 0..len {
            let right = cdf_at(origin + (k + 1) as f64 * step)?;
            masses.push((right - left).max(0.0));
            left = right;
        }
    }
    Ok(GridDensity { origin, step, masses })
}

/// Linear convolution of the two mass vectors via the FFT. The result is the
/// law of the sum, with origin a.origin + b.origin and len_a + len_b - 1 cells.
pub fn convolve(a: &GridDensity, b: &GridDensity) -> Result<GridDensity> {
    convolve_with(a, b, Padding::NextPow2)
}

pub fn convolve_with(a: &GridDensity, b: &GridDensity, padding: Padding) -> Result<GridDensity> {
    if a.masses.is_empty() || b.masses.is_empty() {
        return Err(Error::EmptyInput("convolve requires nonempty densities".to_string()));
    }
    if a.step != b.step {
        return Err(Error::StepMismatch { left: a.step, right: b.step });
    }
    let out_len = a.masses.len() + b.masses.len() - 1;
    let m = match padding {
        Padding::ExactM => a.masses.len() + b.masses.len(),
        Padding::NextPow2 => (a.masses.len() + b.masses.len()).next_power_of_two(),
    };

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    let ifft = planner.plan_fft_inverse(m);

    let mut fa: Vec<Complex<f64>> = a
        .masses
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(m)
        .collect();
    let mut fb: Vec<Complex<f64>> = b
        .masses
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(m)
        .collect();
    fft.process(&mut fa);
    fft.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    ifft.process(&mut fa);

    let scale = 1.0 / m as f64;
    let masses: Vec<f64> = fa[..out_len]
        .iter()
        .map(|c| (c.re * scale).max(0.0))
        .collect();
    Ok(GridDensity {
        origin: a.origin + b.origin,
        step: a.step,
        masses,
    })
}

/// Approximate law of D = F(Y_{n+1-m}) - F(Y_r): discretize the upper law on
/// its effective support, the reflected lower law on [-U_r, -L_r], align both
/// to a common step (interval edges snapped outward to grid multiples), and
/// convolve. The result is renormalized to total mass 1; the truncation
/// budget before renormalization is at most 2 * epsilon.
pub fn difference_law(
    n: u64,
    r: u64,
    m: u64,
    map: &QuantileMap,
    config: &FftConfig,
) -> Result<GridDensity> {
    config.validate()?;
    if n <= r + m {
        return Err(Error::infeasible(format!("difference_law requires n > r + m, got n={n}, r={r}, m={m}")));
    }
    let upper = OrderStatLaw::new(n + 1 - m, n, map)?;
    let lower = OrderStatLaw::new(r, n, map)?;
    let (l_m, u_m) = support_bounds(&upper, config.epsilon)?;
    let (l_r, u_r) = support_bounds(&lower, config.epsilon)?;

    let width = (u_m - l_m) + (u_r - l_r);
    // degenerate supports only arise for degenerate maps; keep the step positive
    let step = (width / config.target_cells as f64).max(1e-12);

    // snap outward so interval edges are integer grid multiples
    let snap_down = |x: f64| (x / step).floor() * step;
    let snap_up = |x: f64| (x / step).ceil() * step;
    let (l_m, u_m) = (snap_down(l_m), snap_up(u_m));
    let (l_r, u_r) = (snap_down(l_r), snap_up(u_r));
    let n_m = ((u_m - l_m) / step).round() as usize;
    let n_r = ((u_r - l_r) / step).round() as usize;

    let a = discretize(&upper, false, l_m, step, n_m.max(1))?;
    let b = discretize(&lower, true, -u_r, step, n_r.max(1))?;
    let mut d = convolve_with(&a, &b, config.padding)?;
    // midpoint correction: each input cell's mass sits at its center, so the
    // sum of two centers lands step/2 past the left edge the raw convolution
    // assigns it to; shifting the output grid removes the O(step) bias
    d.origin += 0.5 * step;
    d.renormalize();
    Ok(d)
}
