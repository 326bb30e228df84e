use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::poly::{classify, PolynomialSpec, RootPosition, RootProfile};
use crate::scalar::Scalar;

use super::check_budget;

/// Largest `2(ℓ - w_i)(ℓ - w_{i+1})/Δt` for which a bridge crossing is still
/// possible: the uniforms are at least `2^-53`, so `-ln u ≤ 36.8`.
const BRIDGE_CUTOFF: f64 = 40.0;

/// One Brownian path on a uniform grid with the uniforms that drive the
/// bridge extrema of every step.
///
/// `step_min(i)`/`step_max(i)` are exact samples of the minimum/maximum of
/// the Brownian bridge between `w[i]` and `w[i+1]`; minimum and maximum of the
/// same step are sampled independently of each other.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    horizon: f64,
    dt: f64,
    pub w: Vec<f64>,
    u_lo: Vec<f64>,
    u_hi: Vec<f64>,
}

/// Side of the starting point on which a level lies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

impl Side {
    pub fn of(level: f64) -> Side {
        if level < 0.0 {
            Side::Below
        } else {
            Side::Above
        }
    }
}

/// First crossing of a level: the step `(t_i, t_{i+1}]` it falls in and the
/// estimated crossing time (linear interpolation when `w[i+1]` is beyond the
/// level, the step midpoint when only the bridge crossed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub step: usize,
    pub time: f64,
}

impl Hit {
    /// First grid index at or after the crossing.
    pub fn grid_index(&self) -> usize {
        self.step + 1
    }
}

impl PathGrid {
    pub fn n_steps(&self) -> usize {
        self.u_lo.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.n_steps() {
            self.horizon
        } else {
            i as f64 * self.dt
        }
    }

    /// Uniform driving the bridge minimum of step `i`.
    pub fn u_lo(&self, i: usize) -> f64 {
        self.u_lo[i]
    }

    /// Uniform driving the bridge maximum of step `i`.
    pub fn u_hi(&self, i: usize) -> f64 {
        self.u_hi[i]
    }

    pub fn terminal(&self) -> f64 {
        self.w[self.n_steps()]
    }

    pub fn step_min(&self, i: usize) -> f64 {
        let (a, b) = (self.w[i], self.w[i + 1]);
        let d = b - a;
        0.5 * (a + b - (d * d - 2.0 * self.dt * self.u_lo[i].ln()).sqrt())
    }

    pub fn step_max(&self, i: usize) -> f64 {
        let (a, b) = (self.w[i], self.w[i + 1]);
        let d = b - a;
        0.5 * (a + b + (d * d - 2.0 * self.dt * self.u_hi[i].ln()).sqrt())
    }

    /// Bridge-adjusted running minimum at every grid time.
    pub fn running_min(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.w.len());
        let mut m = self.w[0];
        out.push(m);
        for i in 0..self.n_steps() {
            m = m.min(self.step_min(i));
            out.push(m);
        }
        out
    }

    /// Bridge-adjusted running maximum at every grid time.
    pub fn running_max(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.w.len());
        let mut m = self.w[0];
        out.push(m);
        for i in 0..self.n_steps() {
            m = m.max(self.step_max(i));
            out.push(m);
        }
        out
    }

    /// Bridge-adjusted extrema over `[0, T]`.
    pub fn extrema(&self) -> (f64, f64) {
        let mut lo = self.w[0];
        let mut hi = self.w[0];
        for i in 0..self.n_steps() {
            lo = lo.min(self.step_min(i));
            hi = hi.max(self.step_max(i));
        }
        (lo, hi)
    }

    /// Extrema of the path stopped at `level` when `hit` is its first crossing.
    pub fn stopped_extrema(&self, stop: Option<(f64, Hit)>) -> (f64, f64) {
        let Some((level, hit)) = stop else {
            return self.extrema();
        };
        let mut lo = self.w[0];
        let mut hi = self.w[0];
        for i in 0..hit.step {
            lo = lo.min(self.step_min(i));
            hi = hi.max(self.step_max(i));
        }
        (lo.min(level), hi.max(level))
    }

    /// Whether step `i` crosses `level` (reaching it counts), and when.
    pub fn crossing_in_step(&self, i: usize, level: f64, side: Side) -> Option<f64> {
        let (a, b) = (self.w[i], self.w[i + 1]);
        let t0 = self.time(i);
        let (da, db) = match side {
            Side::Below => (a - level, b - level),
            Side::Above => (level - a, level - b),
        };
        if da <= 0.0 {
            return Some(t0);
        }
        if db <= 0.0 {
            return Some(t0 + (self.time(i + 1) - t0) * da / (da - db));
        }
        if 2.0 * da * db / self.dt > BRIDGE_CUTOFF {
            return None;
        }
        let crossed = match side {
            Side::Below => self.step_min(i) <= level,
            Side::Above => self.step_max(i) >= level,
        };
        crossed.then(|| 0.5 * (t0 + self.time(i + 1)))
    }

    /// First crossing of `level`, which must differ from the start value 0.
    pub fn first_hit(&self, level: f64) -> Option<Hit> {
        if !level.is_finite() {
            return None;
        }
        let side = Side::of(level);
        (0..self.n_steps()).find_map(|i| self.crossing_in_step(i, level, side).map(|time| Hit { step: i, time }))
    }
}

/// Path `stream` of the family seeded by `seed`; reproducible in isolation.
pub fn simulate_path(seed: u64, stream: u64, horizon: f64, n_steps: usize) -> PathGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let dt = horizon / n_steps as f64;
    let sd = dt.sqrt();
    let mut w = Vec::with_capacity(n_steps + 1);
    let mut u_lo = Vec::with_capacity(n_steps);
    let mut u_hi = Vec::with_capacity(n_steps);
    let mut x = 0.0;
    w.push(x);
    for _ in 0..n_steps {
        let z: f64 = rng.sample(StandardNormal);
        x += sd * z;
        w.push(x);
        u_lo.push(1.0 - rng.random::<f64>());
        u_hi.push(1.0 - rng.random::<f64>());
    }
    PathGrid { horizon, dt, w, u_lo, u_hi }
}

/// Lazily generated paths `0..n_paths`; path `i` uses stream `i`.
pub fn simulate_paths(
    seed: u64,
    n_paths: usize,
    horizon: f64,
    n_steps: usize,
    budget: u128,
) -> Result<impl Iterator<Item = PathGrid>> {
    check_budget(n_paths, n_steps, budget)?;
    Ok((0..n_paths as u64).map(move |i| simulate_path(seed, i, horizon, n_steps)))
}

/// Survival event `{a < min W, max W < b}` written through the explicit table
/// of boundaries; for `μ0 < 0` the table is applied to `-W` and the mirrored
/// polynomial.
pub fn event_e1<T: Scalar>(spec: &PolynomialSpec<T>, run_min: T, run_max: T) -> bool {
    if spec.mu0() < T::zero() {
        let mirrored = PolynomialSpec { e1: -spec.e1, e2: -spec.e2, e3: -spec.e3, y0: spec.y0 };
        return event_e1(&mirrored, -run_max, -run_min);
    }
    let Ok(cls) = classify(spec) else {
        return false;
    };
    if cls.at_root {
        return true;
    }
    let mu0 = cls.constants.mu0;
    let c_const = cls.constants.c_const;
    match cls.profile {
        RootProfile::Linear(_) => true,
        RootProfile::DoubleRoot { .. } => run_max < T::one() / mu0,
        RootProfile::TwoRealRoots { position: RootPosition::Inside, .. } => true,
        RootProfile::TwoRealRoots { .. } => {
            let k = (-c_const).sqrt();
            let c = cls.constants.shift.expect("shift off the roots");
            run_max < -c / k
        }
        RootProfile::ComplexRoots => {
            let k = c_const.sqrt();
            let c = cls.constants.shift.expect("shift for complex roots");
            let half_pi = T::FRAC_PI_2();
            (c - half_pi) / k < run_min && run_max < (c + half_pi) / k
        }
    }
}

/// The same table evaluated on the extrema of the path stopped at `S`;
/// always true when some root `r ≥ x0`.
pub fn event_e2<T: Scalar>(spec: &PolynomialSpec<T>, stopped_min: T, stopped_max: T) -> bool {
    if spec.real_roots().into_iter().any(|r| r >= spec.y0) {
        return true;
    }
    event_e1(spec, stopped_min, stopped_max)
}
