//! Deterministic evaluation of `E[h(Y_T)]` and `E[h(X_T)]` for terminal
//! payoffs, by integrating against the law of Brownian motion killed at the
//! explosion boundaries (and stopped at `x_S`).
//!
//! The killed transition density is the image series
//! `Σ_k φ_T(y - u + 2kL) - φ_T(y + u + 2kL)` on an interval of length `L`; the
//! first-passage density to one end before the other is
//! `Σ_k d_k/√(2πs³)·exp(-d_k²/(2s))` with `d_k = d + 2kL`.

use std::f64::consts::PI;

use crate::closed_form::{build, ClosedFormMap};
use crate::error::{QnvError, Result};
use crate::payoff::PathFunctional;
use crate::poly::PolynomialSpec;

const TARGET: f64 = 1e-16;

fn phi(x: f64, t: f64) -> f64 {
    (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// Transition density of Brownian motion started at 0 and killed on leaving
/// `(lo, hi)`; either end may be infinite.
pub fn killed_density(v: f64, lo: f64, hi: f64, t: f64) -> f64 {
    if v <= lo || v >= hi {
        return 0.0;
    }
    match (lo.is_finite(), hi.is_finite()) {
        (false, false) => phi(v, t),
        (false, true) => phi(v, t) - phi(2.0 * hi - v, t),
        (true, false) => phi(v, t) - phi(2.0 * lo - v, t),
        (true, true) => {
            let l = hi - lo;
            let u = -lo;
            let y = v - lo;
            let kmax = (6.0 * t.sqrt() / l).ceil() as i64 + 2;
            (-kmax..=kmax)
                .map(|k| {
                    let s = 2.0 * k as f64 * l;
                    phi(y - u + s, t) - phi(y + u + s, t)
                })
                .sum()
        }
    }
}

/// Density at time `s` of the first passage to the level at distance `d`
/// from the start, before the opposite level at distance `far` (possibly ∞).
pub fn first_passage_density(s: f64, d: f64, far: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let term = |dk: f64| dk / (2.0 * PI * s * s * s).sqrt() * (-dk * dk / (2.0 * s)).exp();
    if !far.is_finite() {
        return term(d);
    }
    let l = d + far;
    let kmax = (6.0 * s.sqrt() / l).ceil() as i64 + 2;
    (-kmax..=kmax).map(|k| term(d + 2.0 * k as f64 * l)).sum()
}

fn integrate_pieces(f: impl Fn(f64) -> f64, points: &[f64]) -> f64 {
    points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| quadrature::double_exponential::integrate(&f, w[0], w[1], TARGET).integral)
        .sum()
}

/// `E[h(f(W_T))·1{τ>T∧S}·exp(C(T∧S)/2)·g(W_{T∧S})]` by quadrature.
/// `breakpoints` are levels of the process at which `h` is not smooth.
pub fn expect_terminal<H>(
    map: &ClosedFormMap<f64>,
    h: H,
    breakpoints: &[f64],
    horizon: f64,
    stopped: bool,
) -> Result<f64>
where
    H: Fn(f64) -> f64,
{
    if !(horizon > 0.0) {
        return Err(QnvError::InvalidParams(format!("horizon must be positive, got {horizon}")));
    }
    let stop = if stopped { map.zero_level() } else { None };
    let (lo, hi) = match stop {
        Some(xs) if xs < 0.0 => (xs, map.upper()),
        Some(xs) => (map.lower(), xs),
        None => (map.lower(), map.upper()),
    };

    let sd = horizon.sqrt();
    let spec = map.spec();
    let tilt = map.mu0().abs() + map.c_const().abs().sqrt() + spec.e2.abs() + 1.0;
    let reach = tilt * horizon + 40.0 * sd;
    let left = lo.max(-reach);
    let right = hi.min(reach);

    let mut points = vec![left, right, 0.0];
    let step = 0.5 * sd;
    let mut x = (left / step).ceil() * step;
    while x < right {
        points.push(x);
        x += step;
    }
    for &y in breakpoints {
        if let Ok(v) = map.invert_f(y) {
            points.push(v);
        }
    }
    points.retain(|p| *p >= left && *p <= right);
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    points.dedup();

    let growth = (0.5 * map.c_const() * horizon).exp();
    let body = integrate_pieces(
        |v| {
            let p = killed_density(v, lo, hi, horizon);
            if p == 0.0 {
                return 0.0;
            }
            let (Ok(g), Ok(f)) = (map.eval_g(v), map.eval_f(v)) else {
                return 0.0;
            };
            p * growth * g * h(f)
        },
        &points,
    );

    let Some(xs) = stop else {
        return Ok(body);
    };
    let h0 = h(0.0);
    if h0 == 0.0 {
        return Ok(body);
    }
    let d = xs.abs();
    let far = if xs < 0.0 { hi } else { -lo };
    let mut tpts: Vec<f64> = (0..=30).rev().map(|j| horizon * 0.5f64.powi(j)).collect();
    tpts.insert(0, 0.0);
    let c = map.c_const();
    let mass = integrate_pieces(|s| (0.5 * c * s).exp() * first_passage_density(s, d, far), &tpts);
    Ok(body + h0 * map.eval_g(xs)? * mass)
}

/// Quadrature price of a terminal payoff.
pub fn price_terminal(
    spec: &PolynomialSpec<f64>,
    payoff: &dyn PathFunctional,
    horizon: f64,
    stopped: bool,
) -> Result<f64> {
    if !payoff.terminal_only() {
        return Err(QnvError::InvalidParams(format!(
            "quadrature needs a terminal payoff, got {}",
            payoff.describe()
        )));
    }
    let map = build(spec)?;
    expect_terminal(&map, |x| payoff.eval(&[x]), &payoff.breakpoints(), horizon, stopped)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn killed_density_integrates_to_survival() {
        // one-sided: Q(max W_1 < 1) = 2Φ(1) - 1
        let f = |v| killed_density(v, f64::NEG_INFINITY, 1.0, 1.0);
        let pts: Vec<f64> = (-80..=2).map(|i| i as f64 * 0.5).map(|x: f64| x.min(1.0)).collect();
        let s = integrate_pieces(f, &pts);
        assert!((s - 0.682_689_492_137_085_9).abs() < 1e-13, "{s}");
    }

    #[test]
    fn passage_density_matches_sine_series() {
        // exit through the lower end of (0, L) started at u: sine-series form
        let (u, l, s) = (0.3f64, 1.0f64, 0.2f64);
        let series: f64 = (1..400)
            .map(|n| {
                let n = n as f64;
                PI * n / (l * l)
                    * (n * PI * u / l).sin()
                    * (-(n * PI / l).powi(2) * s / 2.0).exp()
            })
            .sum();
        let image = first_passage_density(s, u, l - u);
        assert!((image - series).abs() < 1e-12 * series.abs().max(1.0), "{image} {series}");
    }
}
