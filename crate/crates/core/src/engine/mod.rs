//! Exact pricing through the Brownian representation `Y = f(W)`.
//!
//! Paths of `W` are sampled on a uniform grid. Crossings of the explosion
//! boundaries `a, b` and of the zero level `x_S` between grid points are
//! detected with Brownian-bridge sampling. A path contributes
//! `h(f(W))·exp(C·(T∧S)/2)·g(W_{T∧S})` if it survives and zero otherwise.

mod estimate;
mod path;
pub mod quadrature;
mod transform;

pub use estimate::{pairwise_sum, Estimator, PriceEstimate};
pub use path::{event_e1, event_e2, simulate_path, simulate_paths, Hit, PathGrid, Side};
pub use transform::{path_fate, path_values, price_stopped, price_unstopped, Fate};

pub(crate) use transform::{eval_functional, fate_for, fate_weight, price_with_map, run_paths, weighted_value, Levels};

use crate::error::{QnvError, Result};
use crate::payoff::PathFunctional;

/// Default cap on `n_paths · n_steps`.
pub const DEFAULT_BUDGET: u128 = 50_000_000_000;

/// Default number of time steps per unit of horizon.
pub const STEPS_PER_YEAR: usize = 512;

/// Monte Carlo controls shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McParams {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Upper bound on `n_paths · n_steps`.
    pub budget: u128,
}

impl McParams {
    pub fn new(n_paths: usize, n_steps: usize, seed: u64) -> Self {
        Self { n_paths, n_steps, seed, budget: DEFAULT_BUDGET }
    }

    /// `n_paths` paths with the default grid density for horizon `t`.
    pub fn with_default_steps(n_paths: usize, horizon: f64, seed: u64) -> Self {
        Self::new(n_paths, default_steps(horizon), seed)
    }

    pub fn budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(QnvError::InvalidParams("n_paths must be at least 2".into()));
        }
        if self.n_steps == 0 {
            return Err(QnvError::InvalidParams("n_steps must be at least 1".into()));
        }
        check_budget(self.n_paths, self.n_steps, self.budget)
    }
}

pub fn default_steps(horizon: f64) -> usize {
    ((horizon * STEPS_PER_YEAR as f64).ceil() as usize).max(1)
}

pub(crate) fn check_budget(n_paths: usize, n_steps: usize, budget: u128) -> Result<()> {
    let requested = n_paths as u128 * n_steps as u128;
    if requested > budget {
        return Err(QnvError::Resource { requested, budget });
    }
    Ok(())
}

/// A claim with horizon `T`, a Dollar leg and an optional Euro leg.
pub struct ClaimSpec {
    pub horizon: f64,
    pub dollar: Box<dyn PathFunctional>,
    pub euro: Option<Box<dyn PathFunctional>>,
}

impl ClaimSpec {
    pub fn new(horizon: f64, dollar: impl PathFunctional + 'static) -> Self {
        Self { horizon, dollar: Box::new(dollar), euro: None }
    }

    pub fn with_euro(mut self, euro: impl PathFunctional + 'static) -> Self {
        self.euro = Some(Box::new(euro));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(QnvError::InvalidParams(format!("horizon must be positive, got {}", self.horizon)));
        }
        Ok(())
    }
}

impl std::fmt::Debug for ClaimSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClaimSpec")
            .field("horizon", &self.horizon)
            .field("dollar", &self.dollar.describe())
            .field("euro", &self.euro.as_ref().map(|e| e.describe()))
            .finish()
    }
}
