//! Two real roots: `Y` as a Möbius transform of a (possibly negative)
//! geometric Brownian motion `Z_t = z0·exp(σB_t - σ²t/2)`,
//! `Y = (r2 - r1·Z)/(1 - Z)`, observed up to the first time `τ` that `Z` hits 1.

use crate::engine::{run_paths, weighted_value, ClaimSpec, Estimator, McParams, PathGrid, PriceEstimate};
use crate::error::{QnvError, Result};
use crate::poly::{classify, PolynomialSpec, RootProfile};
use crate::scalar::Scalar;

/// Stream offset that keeps the GBM estimator independent of the
/// transformed-BM estimator run with the same seed.
const GBM_STREAM_OFFSET: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmDualSpec<T> {
    pub sigma: T,
    pub z0: T,
    pub r1: T,
    pub r2: T,
    pub e1: T,
    pub y0: T,
}

impl<T: Scalar> GbmDualSpec<T> {
    pub fn new(spec: &PolynomialSpec<T>) -> Result<Self> {
        let cls = classify(spec)?;
        let RootProfile::TwoRealRoots { r1, r2, .. } = cls.profile else {
            return Err(QnvError::Case(format!("GBM representation needs two real roots, got {}", cls.profile)));
        };
        if cls.at_root {
            return Err(QnvError::Case("y0 is a root; the process is constant".into()));
        }
        let y0 = spec.y0;
        Ok(Self { sigma: spec.e1 * (r2 - r1), z0: (y0 - r2) / (y0 - r1), r1, r2, e1: spec.e1, y0 })
    }

    /// `(r2 - r1·z)/(1 - z)`.
    pub fn mobius(&self, z: T) -> T {
        (self.r2 - self.r1 * z) / (T::one() - z)
    }

    /// `Q(τ > T)`, from the first-passage law of `log Z`, a Brownian motion
    /// with volatility `|σ|` and drift `-σ²/2`, to the level 0.
    pub fn survival_probability(&self, horizon: T) -> T {
        let zero = T::zero();
        if horizon <= zero || self.z0 <= zero {
            return T::one();
        }
        let x = self.z0.ln();
        let s = self.sigma.abs();
        let half = T::lit(0.5);
        // distance d to the level and drift ν towards it
        let (d, nu) = if x < zero { (-x, -half * s * s) } else { (x, half * s * s) };
        let st = s * horizon.sqrt();
        let hit = ((-d + nu * horizon) / st).norm_cdf()
            + (T::lit(2.0) * nu * d / (s * s)).exp() * ((-d - nu * horizon) / st).norm_cdf();
        T::one() - hit.min(T::one())
    }

    /// `y0 - E[Y_T] = (y0 - r1)·Q(τ ≤ T)`.
    pub fn defect(&self, horizon: T) -> T {
        (self.y0 - self.r1) * (T::one() - self.survival_probability(horizon))
    }
}

/// `Q(τ > T)` for the spec's GBM representation.
pub fn survival_probability<T: Scalar>(spec: &PolynomialSpec<T>, horizon: T) -> Result<T> {
    Ok(GbmDualSpec::new(spec)?.survival_probability(horizon))
}

/// Values of `Z` along the grid, and the step in which `Z` reaches 1 (if any).
struct ZPath {
    z: Vec<f64>,
    hit_step: Option<usize>,
}

fn z_path(g: &GbmDualSpec<f64>, grid: &PathGrid) -> ZPath {
    let n = grid.n_steps();
    let s2 = g.sigma * g.sigma;
    let log_at = |i: usize| g.sigma * grid.w[i] - 0.5 * s2 * grid.time(i);
    let z: Vec<f64> = (0..=n).map(|i| g.z0 * log_at(i).exp()).collect();
    if g.z0 <= 0.0 {
        return ZPath { z, hit_step: None };
    }
    let lz0 = g.z0.ln();
    let below = lz0 < 0.0;
    let var = s2 * grid.dt();
    for i in 0..n {
        // signed distances of log Z to 0, positive on the starting side
        let (d0, d1) = if below {
            (-(lz0 + log_at(i)), -(lz0 + log_at(i + 1)))
        } else {
            (lz0 + log_at(i), lz0 + log_at(i + 1))
        };
        if d1 <= 0.0 || (1.0 - z[i + 1]).abs() < 1e-12 {
            return ZPath { z, hit_step: Some(i) };
        }
        let e = 2.0 * d0 * d1 / var;
        if e < 40.0 {
            let u = if below { grid.u_hi(i) } else { grid.u_lo(i) };
            if u.ln() <= -e {
                return ZPath { z, hit_step: Some(i) };
            }
        }
    }
    ZPath { z, hit_step: None }
}

/// Estimates `E[h(Y)]` as `(y0 - r1)/(r2 - r1)·E[h(N)·1{τ>T}·(1 - Z_T)]`.
pub fn gbm_price(spec: &PolynomialSpec<f64>, claim: &ClaimSpec, params: &McParams) -> Result<PriceEstimate> {
    claim.validate()?;
    let g = GbmDualSpec::new(spec)?;
    let scale = (g.y0 - g.r1) / (g.r2 - g.r1);
    let h = claim.dollar.as_ref();
    let values = run_paths(params, claim.horizon, GBM_STREAM_OFFSET, |i, grid| {
        let zp = z_path(&g, grid);
        if zp.hit_step.is_some() {
            return Ok(0.0);
        }
        let zt = zp.z[zp.z.len() - 1];
        let weight = scale * (1.0 - zt);
        let payoff = if h.terminal_only() {
            h.eval(&[g.mobius(zt)])
        } else {
            let path: Vec<f64> = zp.z.iter().map(|&z| g.mobius(z)).collect();
            h.eval(&path)
        };
        weighted_value(payoff, weight, i)
    })?;
    Ok(PriceEstimate::from_samples(&values, params.seed, Estimator::GbmDual))
}
