//! Path functionals and the built-in payoff registry.
//!
//! A functional sees the process at the grid times `t_0 < … < t_N`. Values are
//! extended reals: after absorption the stopped process reads `0`, after an
//! explosion it reads `±∞`. Functionals reporting [`PathFunctional::terminal_only`]
//! receive a one-element slice holding the terminal value.

use std::fmt;

pub trait PathFunctional: Send + Sync {
    fn eval(&self, path: &[f64]) -> f64;

    fn terminal_only(&self) -> bool {
        false
    }

    /// Terminal levels at which the payoff has a kink or a jump.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn describe(&self) -> String {
        "custom".to_string()
    }
}

impl<F> PathFunctional for F
where
    F: Fn(&[f64]) -> f64 + Send + Sync,
{
    fn eval(&self, path: &[f64]) -> f64 {
        self(path)
    }
}

/// A payoff of the terminal value only.
pub struct Terminal<F>(pub F);

impl<F> PathFunctional for Terminal<F>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn eval(&self, path: &[f64]) -> f64 {
        (self.0)(path[path.len() - 1])
    }

    fn terminal_only(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payoff {
    Forward,
    Call(f64),
    Put(f64),
    /// `1{x > K}`
    Digital(f64),
    /// `min((x - K)⁺, M)`
    CappedCall(f64, f64),
    Constant(f64),
    /// `1/x`, with `1/0 = ∞` and `1/∞ = 0`.
    InverseForward,
    /// `inner(X_T)` if the path is at or below `level` at some grid time.
    BarrierDownIn { level: f64, inner: Box<Payoff> },
    /// Piecewise-linear in the terminal value through sorted `(x, v)` points,
    /// constant beyond the range; `at_infinity` overrides the value at `+∞`.
    Table { points: Vec<(f64, f64)>, at_infinity: Option<f64> },
}

impl Payoff {
    pub fn terminal(&self, x: f64) -> f64 {
        match self {
            Payoff::Forward => x,
            Payoff::Call(k) => (x - k).max(0.0),
            Payoff::Put(k) => {
                if x == f64::INFINITY {
                    0.0
                } else {
                    (k - x).max(0.0)
                }
            }
            Payoff::Digital(k) => f64::from(x > *k),
            Payoff::CappedCall(k, m) => (x - k).max(0.0).min(*m),
            Payoff::Constant(c) => *c,
            Payoff::InverseForward => 1.0 / x,
            Payoff::BarrierDownIn { inner, .. } => inner.terminal(x),
            Payoff::Table { points, at_infinity } => table_value(points, *at_infinity, x),
        }
    }
}

fn table_value(points: &[(f64, f64)], at_infinity: Option<f64>, x: f64) -> f64 {
    if x == f64::INFINITY {
        if let Some(v) = at_infinity {
            return v;
        }
    }
    let (first, last) = (points[0], points[points.len() - 1]);
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let j = points.partition_point(|p| p.0 <= x);
    let (x0, v0) = points[j - 1];
    let (x1, v1) = points[j];
    v0 + (v1 - v0) * (x - x0) / (x1 - x0)
}

impl PathFunctional for Payoff {
    fn eval(&self, path: &[f64]) -> f64 {
        let x = path[path.len() - 1];
        match self {
            Payoff::BarrierDownIn { level, inner } => {
                if path.iter().any(|&v| v <= *level) {
                    inner.terminal(x)
                } else {
                    0.0
                }
            }
            _ => self.terminal(x),
        }
    }

    fn terminal_only(&self) -> bool {
        !matches!(self, Payoff::BarrierDownIn { .. })
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Payoff::Call(k) | Payoff::Put(k) | Payoff::Digital(k) => vec![*k],
            Payoff::CappedCall(k, m) => vec![*k, k + m],
            Payoff::Table { points, .. } => points.iter().map(|p| p.0).collect(),
            Payoff::BarrierDownIn { inner, .. } => inner.breakpoints(),
            _ => Vec::new(),
        }
    }

    fn describe(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payoff::Forward => write!(f, "forward"),
            Payoff::Call(k) => write!(f, "call({k})"),
            Payoff::Put(k) => write!(f, "put({k})"),
            Payoff::Digital(k) => write!(f, "digital({k})"),
            Payoff::CappedCall(k, m) => write!(f, "capped_call({k},{m})"),
            Payoff::Constant(c) => write!(f, "constant({c})"),
            Payoff::InverseForward => write!(f, "inverse_forward"),
            Payoff::BarrierDownIn { level, inner } => write!(f, "barrier_down_in({level},{inner})"),
            Payoff::Table { points, at_infinity } => {
                write!(f, "table(")?;
                for (i, (x, v)) in points.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}:{v}")?;
                }
                if let Some(v) = at_infinity {
                    write!(f, ";inf={v}")?;
                }
                write!(f, ")")
            }
        }
    }
}
