//! Euler–Maruyama discretisation of `dY = P(Y) dB`, kept independent of the
//! Brownian-representation engine so that it can serve as a reference.
//!
//! The step is `min(dt, next observation time, (0.1·max(|Y|,1)/|P(Y)|)²)`,
//! which bounds the relative move per step where `P` is steep. Paths that
//! cross zero are absorbed when `absorb_at_zero` is set. Paths that exceed
//! `cap` in absolute value are counted as exploded and contribute zero.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::engine::{ClaimSpec, Estimator, PriceEstimate, DEFAULT_BUDGET, STEPS_PER_YEAR};
use crate::error::{QnvError, Result};
use crate::poly::PolynomialSpec;

const SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerParams {
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub absorb_at_zero: bool,
    /// Explosion threshold; `None` means `1e6·max(1, |y0|)`.
    pub cap: Option<f64>,
    /// Observation grid seen by path functionals; `None` means 512 per unit time.
    pub n_obs: Option<usize>,
    pub budget: u128,
}

impl EulerParams {
    pub fn new(dt: f64, n_paths: usize, seed: u64, absorb_at_zero: bool) -> Self {
        Self { dt, n_paths, seed, absorb_at_zero, cap: None, n_obs: None, budget: DEFAULT_BUDGET }
    }

    pub fn n_obs(mut self, n: usize) -> Self {
        self.n_obs = Some(n);
        self
    }

    pub fn budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    fn cap_for(&self, y0: f64) -> f64 {
        self.cap.unwrap_or(1e6 * y0.abs().max(1.0))
    }

    fn obs_for(&self, horizon: f64) -> usize {
        self.n_obs.unwrap_or(((horizon * STEPS_PER_YEAR as f64).ceil() as usize).max(1))
    }

    fn validate(&self, horizon: f64, y0: f64) -> Result<()> {
        if !(self.dt > 0.0) || self.dt > horizon {
            return Err(QnvError::InvalidParams(format!("dt must lie in (0, T], got {}", self.dt)));
        }
        if self.n_paths < 2 {
            return Err(QnvError::InvalidParams("n_paths must be at least 2".into()));
        }
        if self.cap_for(y0) < 10.0 * y0.abs() {
            return Err(QnvError::InvalidParams("cap must be at least 10·y0".into()));
        }
        let steps = (horizon / self.dt).ceil() as u128;
        let requested = self.n_paths as u128 * steps;
        if requested > self.budget {
            return Err(QnvError::Resource { requested, budget: self.budget });
        }
        Ok(())
    }
}

/// One simulated path on the observation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EulerPath {
    pub values: Vec<f64>,
    /// Linearly interpolated time of the zero crossing, for absorbed paths.
    pub absorbed_at: Option<f64>,
    pub exploded: bool,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerEstimate {
    pub estimate: PriceEstimate,
    pub exploded: usize,
    pub absorbed: usize,
}

fn poly(spec: &PolynomialSpec<f64>, y: f64) -> f64 {
    (spec.e1 * y + spec.e2) * y + spec.e3
}

/// Simulates path `stream` up to `horizon`.
pub fn euler_path(spec: &PolynomialSpec<f64>, params: &EulerParams, horizon: f64, stream: u64) -> EulerPath {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ SEED_MIX);
    rng.set_stream(stream);
    let n_obs = params.obs_for(horizon);
    let cap = params.cap_for(spec.y0);
    let mut values = Vec::with_capacity(n_obs + 1);
    let mut y = spec.y0;
    let mut t = 0.0;
    let mut steps = 0;
    let dt = params.dt;
    let sqrt_dt = dt.sqrt();
    values.push(y);
    for j in 1..=n_obs {
        let t_next = horizon * j as f64 / n_obs as f64;
        while t_next - t > 1e-13 * horizon {
            let p = poly(spec, y);
            let m = 0.1 * y.abs().max(1.0);
            let room = t_next - t;
            // full step unless the observation time or the local bound is closer
            let (h, sh) = if room >= dt && p * p * dt <= m * m {
                (dt, sqrt_dt)
            } else {
                let mut h = dt.min(room);
                if p != 0.0 {
                    let r = m / p;
                    h = h.min(r * r);
                }
                (h, h.sqrt())
            };
            let z: f64 = rng.sample(StandardNormal);
            let y_new = y + p * sh * z;
            steps += 1;
            if params.absorb_at_zero && y_new <= 0.0 {
                let cross = t + h * y / (y - y_new);
                values.resize(n_obs + 1, 0.0);
                return EulerPath { values, absorbed_at: Some(cross), exploded: false, steps };
            }
            if y_new.abs() > cap {
                values.resize(n_obs + 1, f64::NAN);
                return EulerPath { values, absorbed_at: None, exploded: true, steps };
            }
            y = y_new;
            t += h;
        }
        t = t_next;
        values.push(y);
    }
    EulerPath { values, absorbed_at: None, exploded: false, steps }
}

/// Estimates `E[h(Y)]` (or `E[h(X)]` with absorption) by Euler–Maruyama.
pub fn euler_price(spec: &PolynomialSpec<f64>, claim: &ClaimSpec, params: &EulerParams) -> Result<EulerEstimate> {
    claim.validate()?;
    spec.validate()?;
    params.validate(claim.horizon, spec.y0)?;
    let h = claim.dollar.as_ref();
    let out: Vec<Result<(f64, bool, bool)>> = (0..params.n_paths)
        .into_par_iter()
        .map(|i| {
            let path = euler_path(spec, params, claim.horizon, i as u64);
            if path.exploded {
                return Ok((0.0, true, false));
            }
            let v = if h.terminal_only() {
                h.eval(&path.values[path.values.len() - 1..])
            } else {
                h.eval(&path.values)
            };
            if !v.is_finite() {
                return Err(if v.is_nan() { QnvError::NonFinitePayoff(v, i) } else { QnvError::NonIntegrable(i) });
            }
            Ok((v, false, path.absorbed_at.is_some()))
        })
        .collect();
    let out: Vec<(f64, bool, bool)> = out.into_iter().collect::<Result<_>>()?;
    let values: Vec<f64> = out.iter().map(|o| o.0).collect();
    let exploded = out.iter().filter(|o| o.1).count();
    let absorbed = out.iter().filter(|o| o.2).count();
    Ok(EulerEstimate {
        estimate: PriceEstimate::from_samples(&values, params.seed, Estimator::Euler),
        exploded,
        absorbed,
    })
}

/// Fixed-step scheme driven by given Brownian increments; returns `Y` at the
/// step endpoints (no absorption, no cap).
pub fn euler_path_from_increments(spec: &PolynomialSpec<f64>, increments: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(increments.len() + 1);
    let mut y = spec.y0;
    out.push(y);
    for &dw in increments {
        y += poly(spec, y) * dw;
        out.push(y);
    }
    out
}
