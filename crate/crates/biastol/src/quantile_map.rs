//! The quantile mappings Phi = G o F^{-1} and Phi^{-1} = F o G^{-1},
//! stored as a pair of monotone piecewise-linear functions on [0, 1].
//!
//! All bias enters the tolerance solvers through this object. Three
//! construction routes are provided: analytic (Generalized Gamma closure),
//! Monte Carlo (matched empirical quantiles of two samplers), and pilot
//! (composition of estimated step CDFs, see the `pilot` module).

use std::io::{BufWriter, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::Value;

use crate::distributions::GenGammaSpec;
use crate::error::{Error, Result};

/// How a map was built; carried through serialization as `kind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Identity,
    Analytic,
    MonteCarlo,
    Pilot,
}

impl Provenance {
    pub fn kind(self) -> &'static str {
        match self {
            Provenance::Identity => "identity",
            Provenance::Analytic => "analytic",
            Provenance::MonteCarlo => "monte_carlo",
            Provenance::Pilot => "pilot",
        }
    }

    fn from_kind(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Provenance::Identity),
            "analytic" => Ok(Provenance::Analytic),
            "monte_carlo" => Ok(Provenance::MonteCarlo),
            "pilot" => Ok(Provenance::Pilot),
            other => Err(Error::Format(format!("unknown map kind {other:?}"))),
        }
    }
}

/// Monotone piecewise-linear map pair (Phi, Phi^{-1}) on [0, 1].
///
/// Both directions are stored explicitly on the same probability knot grid so
/// evaluation is O(log M) either way; the pair is validated for monotonicity
/// and endpoint pinning at construction.
#[derive(Debug, Clone)]
pub struct QuantileMap {
    knots_p: Vec<f64>,
    forward: Vec<f64>,
    inverse: Vec<f64>,
    provenance: Provenance,
    meta: Value,
}

/// Default number of knots for constructed maps.
pub const DEFAULT_KNOT_COUNT: usize = 1001;

/// Default number of Monte Carlo draws per sampler.
pub const DEFAULT_MC_DRAWS: usize = 1_000_000;

/// Uniform grid of `knot_count` points on [0, 1] augmented with geometric
/// points near both endpoints (1e-6 .. 1e-2 and mirrored). Extreme quantiles
/// of the knot grid are probed by the tail bounds of the FFT engine.
pub fn probability_grid(knot_count: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..knot_count)
        .map(|i| i as f64 / (knot_count - 1) as f64)
        .collect();
    for e in 2..=6 {
        let p = 10f64.powi(-e);
        grid.push(p);
        grid.push(1.0 - p);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

fn interp(knots_x: &[f64], knots_y: &[f64], x: f64) -> f64 {
    // knots_x strictly increasing with first = 0, last = 1; x in [0, 1]
    let i = knots_x.partition_point(|&k| k < x);
    if i == 0 {
        return knots_y[0];
    }
    if i >= knots_x.len() {
        return *knots_y.last().unwrap();
    }
    let (x0, x1) = (knots_x[i - 1], knots_x[i]);
    let (y0, y1) = (knots_y[i - 1], knots_y[i]);
    if x1 == x0 {
        return y1;
    }
    y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
}

impl QuantileMap {
    /// Validating constructor over explicit knots.
    pub fn from_knots(
        knots_p: Vec<f64>,
        forward: Vec<f64>,
        inverse: Vec<f64>,
        provenance: Provenance,
        meta: Value,
    ) -> Result<Self> {
        if knots_p.len() < 2 || knots_p.len() != forward.len() || knots_p.len() != inverse.len() {
            return Err(Error::Format(format!(
                "knot vectors must have equal length >= 2 (got {}, {}, {})",
                knots_p.len(),
                forward.len(),
                inverse.len()
            )));
        }
        let endpoints = |v: &[f64], name: &str| -> Result<()> {
            if v[0] != 0.0 || *v.last().unwrap() != 1.0 {
                return Err(Error::Format(format!("{name} must start at 0 and end at 1")));
            }
            Ok(())
        };
        endpoints(&knots_p, "knots_p")?;
        endpoints(&forward, "forward knots")?;
        endpoints(&inverse, "inverse knots")?;
        for w in knots_p.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Format("knots_p must be strictly increasing".to_string()));
            }
        }
        for (name, v) in [("forward", &forward), ("inverse", &inverse)] {
            for w in v.windows(2) {
                if !(w[1] >= w[0]) || !w[1].is_finite() {
                    return Err(Error::Format(format!("{name} knots must be nondecreasing and finite")));
                }
            }
        }
        Ok(Self { knots_p, forward, inverse, provenance, meta })
    }

    /// The unbiased special case G = F: Phi(z) = z exactly.
    pub fn identity() -> Self {
        let knots_p = vec![0.0, 1.0];
        Self {
            knots_p: knots_p.clone(),
            forward: knots_p.clone(),
            inverse: knots_p,
            provenance: Provenance::Identity,
            meta: Value::Null,
        }
    }

    /// Analytic route: F = `target` CDF, G = CDF of `target.size_bias(kappa)`.
    /// Knot values are exact CDF/quantile compositions on the probability grid.
    pub fn analytic(target: &GenGammaSpec, kappa: f64, knot_count: usize) -> Result<Self> {
        if knot_count < 2 {
            return Err(Error::domain("knot_count must be >= 2".to_string()));
        }
        let biased = target.size_bias(kappa)?;
        let grid = probability_grid(knot_count);
        let mut forward = Vec::with_capacity(grid.len());
        let mut inverse = Vec::with_capacity(grid.len());
        for &p in &grid {
            if p == 0.0 {
                forward.push(0.0);
                inverse.push(0.0);
            } else if p == 1.0 {
                forward.push(1.0);
                inverse.push(1.0);
            } else {
                forward.push(biased.cdf(target.quantile(p)?)?);
                inverse.push(target.cdf(biased.quantile(p)?)?);
            }
        }
        let meta = serde_json::json!({
            "target": target,
            "kappa": kappa,
            "knot_count": knot_count,
        });
        Self::from_knots(grid, monotone_fixup(forward), monotone_fixup(inverse), Provenance::Analytic, meta)
    }

    /// Monte Carlo route: empirical quantiles of the two samplers matched on
    /// the probability grid. Deterministic given `seed` (ChaCha12).
    pub fn monte_carlo<F, G>(
        mut target_sampler: F,
        mut biased_sampler: G,
        draws: usize,
        knot_count: usize,
        seed: u64,
    ) -> Result<Self>
    where
        F: FnMut(&mut ChaCha12Rng) -> f64,
        G: FnMut(&mut ChaCha12Rng) -> f64,
    {
        if knot_count < 2 {
            return Err(Error::domain("knot_count must be >= 2".to_string()));
        }
        if draws < 10 * knot_count {
            return Err(Error::InsufficientData(format!(
                "monte_carlo map needs draws >= 10 * knot_count ({} < {})",
                draws,
                10 * knot_count
            )));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut target: Vec<f64> = (0..draws).map(|_| target_sampler(&mut rng)).collect();
        let mut biased: Vec<f64> = (0..draws).map(|_| biased_sampler(&mut rng)).collect();
        target.sort_by(|a, b| a.partial_cmp(b).unwrap());
        biased.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let ecdf = |sorted: &[f64], x: f64| -> f64 {
            sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
        };
        let quantile = |sorted: &[f64], p: f64| -> f64 {
            let idx = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
            sorted[idx - 1]
        };

        let grid = probability_grid(knot_count);
        let mut forward = Vec::with_capacity(grid.len());
        let mut inverse = Vec::with_capacity(grid.len());
        for &p in &grid {
            if p == 0.0 {
                forward.push(0.0);
                inverse.push(0.0);
            } else if p == 1.0 {
                forward.push(1.0);
                inverse.push(1.0);
            } else {
                forward.push(ecdf(&biased, quantile(&target, p)));
                inverse.push(ecdf(&target, quantile(&biased, p)));
            }
        }
        let meta = serde_json::json!({ "draws": draws, "knot_count": knot_count, "seed": seed });
        Self::from_knots(grid, monotone_fixup(forward), monotone_fixup(inverse), Provenance::MonteCarlo, meta)
    }

    /// Forward map Phi(z) = G(F^{-1}(z)) by linear interpolation.
    pub fn eval(&self, z: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::domain(format!("map eval requires z in [0,1], got {z}")));
        }
        Ok(interp(&self.knots_p, &self.forward, z))
    }

    /// Inverse map Phi^{-1}(p) = F(G^{-1}(p)) by linear interpolation.
    pub fn inverse_eval(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("map inverse_eval requires p in [0,1], got {p}")));
        }
        Ok(interp(&self.knots_p, &self.inverse, p))
    }

    pub fn knots_p(&self) -> &[f64] {
        &self.knots_p
    }

    pub fn forward_knots(&self) -> &[f64] {
        &self.forward
    }

    pub fn inverse_knots(&self) -> &[f64] {
        &self.inverse
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn meta(&self) -> &Value {
        &self.meta
    }

    /// Largest gap in the probability knot grid; bounds the round-trip error
    /// of the map pair.
    pub fn mesh(&self) -> f64 {
        self.knots_p
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Serialize to the on-disk JSON schema. Numbers carry 17 significant
    /// digits so the file round-trips bit-exactly.
    pub fn to_json_string(&self) -> String {
        let fmt_vec = |v: &[f64]| -> String {
            let items: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
            format!("[{}]", items.join(","))
        };
        format!(
            "{{\"kind\":{},\"knots_p\":{},\"knots_v_forward\":{},\"knots_v_inverse\":{},\"meta\":{}}}",
            serde_json::to_string(self.provenance.kind()).unwrap(),
            fmt_vec(&self.knots_p),
            fmt_vec(&self.forward),
            fmt_vec(&self.inverse),
            serde_json::to_string(&self.meta).unwrap(),
        )
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        w.write_all(self.to_json_string().as_bytes())?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        let kind = v
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Format("map JSON missing string field 'kind'".to_string()))?;
        let vec_field = |name: &str| -> Result<Vec<f64>> {
            v.get(name)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Format(format!("map JSON missing array field '{name}'")))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| Error::Format(format!("non-numeric entry in '{name}'")))
                })
                .collect()
        };
        Self::from_knots(
            vec_field("knots_p")?,
            vec_field("knots_v_forward")?,
            vec_field("knots_v_inverse")?,
            Provenance::from_kind(kind)?,
            v.get("meta").cloned().unwrap_or(Value::Null),
        )
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Clamp tiny negative drift from independent numeric evaluations so the knot
/// vector is exactly nondecreasing.
fn monotone_fixup(mut v: Vec<f64>) -> Vec<f64> {
    for i in 1..v.len() {
        if v[i] < v[i - 1] {
            v[i] = v[i - 1];
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_map_is_exact() {
        let m = QuantileMap::identity();
        assert_eq!(m.eval(0.37).unwrap(), 0.37);
        assert_eq!(m.inverse_eval(0.9).unwrap(), 0.9);
        assert!(m.eval(1.1).is_err());
    }

    #[test]
    fn eval_linear_between_knots() {
        let m = QuantileMap::from_knots(
            vec![0.0, 0.2, 0.4, 1.0],
            vec![0.0, 0.1, 0.3, 1.0],
            vec![0.0, 0.1, 0.3, 1.0],
            Provenance::Identity,
            Value::Null,
        )
        .unwrap();
        assert!((m.eval(0.3).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(m.eval(0.2).unwrap(), 0.1); // exact at knots
    }

    #[test]
    fn analytic_exp2_length_bias() {
        let exp2 = GenGammaSpec::exponential(2.0).unwrap();
        let m = QuantileMap::analytic(&exp2, 1.0, 201).unwrap();
        // oracle: solve (1 + u) e^{-u} = 0.5, Phi^{-1}(0.5) = 1 - e^{-u}
        assert!((m.inverse_eval(0.5).unwrap() - 0.813_317_691_149_163).abs() < 1e-6);
        assert_eq!(m.inverse_eval(0.0).unwrap(), 0.0);
        assert_eq!(m.inverse_eval(1.0).unwrap(), 1.0);
        // rightward bias: Phi^{-1}(p) >= p at every knot
        for (&p, &v) in m.knots_p().iter().zip(m.inverse_knots()) {
            assert!(v >= p - 1e-12, "Phi^-1({p}) = {v} < p");
        }
    }

    #[test]
    fn monte_carlo_self_map_is_near_identity() {
        let exp2 = GenGammaSpec::exponential(2.0).unwrap();
        let draws = 100_000;
        let m = QuantileMap::monte_carlo(
            |rng| exp2.sample_with(rng),
            |rng| exp2.sample_with(rng),
            draws,
            101,
            11,
        )
        .unwrap();
        for (&p, &v) in m.knots_p().iter().zip(m.forward_knots()) {
            let tol = 3.0 * (p * (1.0 - p) / draws as f64).sqrt() + 2.0 / draws as f64;
            assert!((v - p).abs() <= tol.max(1e-3), "knot {p}: {v}");
        }
    }

    #[test]
    fn monte_carlo_matches_analytic() {
        let exp2 = GenGammaSpec::exponential(2.0).unwrap();
        let g22 = GenGammaSpec::gamma(2.0, 2.0).unwrap();
        let analytic = QuantileMap::analytic(&exp2, 1.0, 101).unwrap();
        let mc = QuantileMap::monte_carlo(
            |rng| exp2.sample_with(rng),
            |rng| g22.sample_with(rng),
            1_000_000,
            101,
            23,
        )
        .unwrap();
        for &p in analytic.knots_p() {
            let a = analytic.inverse_eval(p).unwrap();
            let b = mc.inverse_eval(p).unwrap();
            assert!((a - b).abs() < 0.005, "knot {p}: analytic {a} vs mc {b}");
        }
    }

    #[test]
    fn monte_carlo_insufficient_draws_rejected() {
        let exp2 = GenGammaSpec::exponential(2.0).unwrap();
        let r = QuantileMap::monte_carlo(
            |rng| exp2.sample_with(rng),
            |rng| exp2.sample_with(rng),
            100,
            101,
            1,
        );
        assert!(matches!(r, Err(Error::InsufficientData(_))));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let exp2 = GenGammaSpec::exponential(2.0).unwrap();
        let m = QuantileMap::analytic(&exp2, 1.0, 51).unwrap();
        let s = m.to_json_string();
        let back = QuantileMap::from_json_str(&s).unwrap();
        assert_eq!(m.knots_p(), back.knots_p());
        assert_eq!(m.forward_knots(), back.forward_knots());
        assert_eq!(m.inverse_knots(), back.inverse_knots());
        assert_eq!(back.provenance(), Provenance::Analytic);
        assert_eq!(s, back.to_json_string());
    }

    #[test]
    fn round_trip_bounded_by_mesh() {
        let g = GenGammaSpec::gamma(0.5, 2.0).unwrap();
        let m = QuantileMap::analytic(&g, 1.0, 1001).unwrap();
        for i in 0..=500 {
            let p = i as f64 / 500.0;
            let rt = m.eval(m.inverse_eval(p).unwrap()).unwrap();
            assert!((rt - p).abs() <= m.mesh() + 1e-9, "p={p} rt={rt}");
        }
    }

    proptest! {
        #[test]
        fn eval_monotone(z1 in 0.0f64..1.0, z2 in 0.0f64..1.0) {
            let exp2 = GenGammaSpec::exponential(2.0).unwrap();
            let m = QuantileMap::analytic(&exp2, 1.0, 51).unwrap();
            let (lo, hi) = if z1 <= z2 { (z1, z2) } else { (z2, z1) };
            prop_assert!(m.eval(lo).unwrap() <= m.eval(hi).unwrap() + 1e-15);
            prop_assert!(m.inverse_eval(lo).unwrap() <= m.inverse_eval(hi).unwrap() + 1e-15);
        }
    }
}
