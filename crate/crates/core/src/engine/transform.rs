use rayon::prelude::*;

use crate::closed_form::{build, ClosedFormMap};
use crate::error::{QnvError, Result};
use crate::payoff::PathFunctional;
use crate::poly::PolynomialSpec;

use super::path::{simulate_path, Hit, PathGrid, Side};
use super::{ClaimSpec, Estimator, McParams, PriceEstimate};

/// Levels of `W` that end a path: the explosion boundaries and, for the
/// stopped process, the zero level `x_S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Levels {
    pub lower: f64,
    pub upper: f64,
    pub stop: Option<f64>,
}

impl Levels {
    pub fn of(map: &ClosedFormMap<f64>, stopped: bool) -> Self {
        Self {
            lower: map.lower(),
            upper: map.upper(),
            stop: if stopped { map.zero_level() } else { None },
        }
    }
}

/// How a simulated path ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fate {
    /// Still inside the domain (and away from `x_S`) at `T`.
    Survived,
    /// Left `(a, b)` first, through the lower or upper boundary: weight zero.
    Killed(Hit, Side),
    /// Reached `x_S` first: the process is absorbed at zero.
    Stopped(Hit),
}

/// Resolves which of the levels the path reaches first. The stop level always
/// wins against a kill boundary on its own side, since a continuous path
/// reaches `x_S` before the boundary behind it.
pub fn path_fate(map: &ClosedFormMap<f64>, grid: &PathGrid, stopped: bool) -> Fate {
    fate_for(grid, &Levels::of(map, stopped))
}

pub(crate) fn fate_for(grid: &PathGrid, levels: &Levels) -> Fate {
    let lower = levels.lower.is_finite().then_some(levels.lower);
    let upper = levels.upper.is_finite().then_some(levels.upper);
    for i in 0..grid.n_steps() {
        let lo = lower.and_then(|l| grid.crossing_in_step(i, l, Side::Below));
        let hi = upper.and_then(|u| grid.crossing_in_step(i, u, Side::Above));
        let stop = levels.stop.and_then(|s| {
            grid.crossing_in_step(i, s, Side::of(s)).map(|t| (t, Side::of(s)))
        });
        let kill = match (lo, hi) {
            (Some(a), Some(b)) => Some(if a <= b { (a, Side::Below) } else { (b, Side::Above) }),
            (Some(a), None) => Some((a, Side::Below)),
            (None, Some(b)) => Some((b, Side::Above)),
            (None, None) => None,
        };
        match (stop, kill) {
            (None, None) => continue,
            (Some((t, _)), None) => return Fate::Stopped(Hit { step: i, time: t }),
            (None, Some((t, side))) => return Fate::Killed(Hit { step: i, time: t }, side),
            (Some((ts, side_s)), Some((tk, side_k))) => {
                // distinct sides: earlier crossing wins, exact ties go to the lower level
                if side_s != side_k && (tk < ts || (tk == ts && side_k == Side::Below)) {
                    return Fate::Killed(Hit { step: i, time: tk }, side_k);
                }
                return Fate::Stopped(Hit { step: i, time: ts });
            }
        }
    }
    Fate::Survived
}

/// Weight `exp(C·(T∧S)/2)·g(W_{T∧S})` on surviving paths, zero when killed.
pub(crate) fn fate_weight(map: &ClosedFormMap<f64>, grid: &PathGrid, fate: Fate, stop: Option<f64>) -> Result<f64> {
    let c = map.c_const();
    Ok(match fate {
        Fate::Killed(..) => 0.0,
        Fate::Survived => (0.5 * c * grid.horizon()).exp() * map.eval_g(grid.terminal())?,
        Fate::Stopped(hit) => {
            let xs = stop.expect("stopped paths have a stop level");
            (0.5 * c * hit.time).exp() * map.eval_g(xs)?
        }
    })
}

/// Values of the process `f(W)` at the grid times, frozen at `0` after `S`
/// and at `f(boundary) = ±∞` after `τ`.
pub fn path_values(map: &ClosedFormMap<f64>, grid: &PathGrid, fate: Fate) -> Result<Vec<f64>> {
    let (end, frozen) = match fate {
        Fate::Survived => (None, 0.0),
        Fate::Stopped(hit) => (Some(hit.time), 0.0),
        Fate::Killed(hit, side) => {
            let boundary = match side {
                Side::Below => map.lower(),
                Side::Above => map.upper(),
            };
            (Some(hit.time), map.eval_f(boundary)?)
        }
    };
    (0..grid.w.len())
        .map(|j| match end {
            Some(t) if grid.time(j) >= t => Ok(frozen),
            _ => map.eval_f(grid.w[j]),
        })
        .collect()
}

fn terminal_value(map: &ClosedFormMap<f64>, grid: &PathGrid, fate: Fate) -> Result<f64> {
    match fate {
        Fate::Survived => map.eval_f(grid.terminal()),
        Fate::Stopped(_) => Ok(0.0),
        Fate::Killed(_, Side::Below) => map.eval_f(map.lower()),
        Fate::Killed(_, Side::Above) => map.eval_f(map.upper()),
    }
}

/// `payoff · weight` with `∞·0 = 0`; NaN payoffs and infinite payoffs carrying
/// positive weight are errors.
pub(crate) fn weighted_value(payoff: f64, weight: f64, path: usize) -> Result<f64> {
    if weight == 0.0 {
        return Ok(0.0);
    }
    if payoff.is_nan() {
        return Err(QnvError::NonFinitePayoff(payoff, path));
    }
    if payoff.is_infinite() {
        return Err(QnvError::NonIntegrable(path));
    }
    Ok(payoff * weight)
}

pub(crate) fn eval_functional(
    h: &dyn PathFunctional,
    map: &ClosedFormMap<f64>,
    grid: &PathGrid,
    fate: Fate,
) -> Result<f64> {
    if h.terminal_only() {
        Ok(h.eval(&[terminal_value(map, grid, fate)?]))
    } else {
        Ok(h.eval(&path_values(map, grid, fate)?))
    }
}

/// Runs `f` on paths `0..n_paths` in parallel and returns the results in path
/// order; the first error in path order is reported.
pub(crate) fn run_paths<R, F>(params: &McParams, horizon: f64, stream_offset: u64, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize, &PathGrid) -> Result<R> + Sync,
{
    params.validate()?;
    let out: Vec<Result<R>> = (0..params.n_paths)
        .into_par_iter()
        .map(|i| {
            let grid = simulate_path(params.seed, stream_offset + i as u64, horizon, params.n_steps);
            f(i, &grid)
        })
        .collect();
    out.into_iter().collect()
}

pub(crate) fn price_with_map(
    map: &ClosedFormMap<f64>,
    h: &dyn PathFunctional,
    horizon: f64,
    params: &McParams,
    stopped: bool,
    stream_offset: u64,
) -> Result<PriceEstimate> {
    let levels = Levels::of(map, stopped);
    let values = run_paths(params, horizon, stream_offset, |i, grid| {
        let fate = fate_for(grid, &levels);
        let weight = fate_weight(map, grid, fate, levels.stop)?;
        if weight == 0.0 {
            return Ok(0.0);
        }
        weighted_value(eval_functional(h, map, grid, fate)?, weight, i)
    })?;
    Ok(PriceEstimate::from_samples(&values, params.seed, Estimator::TransformedBm))
}

/// Estimates `E[h(Y)]` for the unstopped process.
pub fn price_unstopped(spec: &PolynomialSpec<f64>, claim: &ClaimSpec, params: &McParams) -> Result<PriceEstimate> {
    claim.validate()?;
    price_with_map(&build(spec)?, claim.dollar.as_ref(), claim.horizon, params, false, 0)
}

/// Estimates `E[h(X)]` for the process absorbed at zero.
pub fn price_stopped(spec: &PolynomialSpec<f64>, claim: &ClaimSpec, params: &McParams) -> Result<PriceEstimate> {
    claim.validate()?;
    price_with_map(&build(spec)?, claim.dollar.as_ref(), claim.horizon, params, true, 0)
}
