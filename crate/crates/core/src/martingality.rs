//! True-martingale versus strict-local-martingale classification of `Y` and of
//! the process `X` absorbed at zero, and the martingale defect for two real roots.

use std::fmt;

use crate::error::{QnvError, Result};
use crate::gbm::GbmDualSpec;
use crate::poly::{classify, PolynomialSpec, RootProfile};
use crate::scalar::Scalar;

/// Which branch of the classification decided the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MartingalityReason {
    /// `e1 = 0`: both processes are true martingales.
    LinearPolynomial,
    /// `y0` lies in `[r1, r2]`.
    StartBetweenRoots,
    /// `Y` is strict, but some real root `r ≥ x0` keeps `X` a true martingale.
    RootAboveStart,
    /// Real roots exist, all below `x0`.
    RootsBelowStart,
    /// `e1 ≠ 0` and no real roots.
    NoRealRoots,
}

impl fmt::Display for MartingalityReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::LinearPolynomial => "e1=0",
            Self::StartBetweenRoots => "y0 in [r1,r2]",
            Self::RootAboveStart => "root r >= x0",
            Self::RootsBelowStart => "all roots below x0",
            Self::NoRealRoots => "no real roots",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartingalityReport<T> {
    pub y_is_true_martingale: bool,
    pub x_is_true_martingale: bool,
    pub reason: MartingalityReason,
    gbm: Option<GbmDualSpec<T>>,
}

impl<T: Scalar> MartingalityReport<T> {
    /// `y0 - E[Y_T]`, available when `P` has two real roots.
    pub fn defect_at(&self, horizon: T) -> Option<T> {
        self.gbm.as_ref().map(|g| g.defect(horizon))
    }

    /// Short human-readable verdict, e.g. `strict local (Y and X)`.
    pub fn verdict(&self) -> String {
        match (self.y_is_true_martingale, self.x_is_true_martingale) {
            (true, true) => "true martingale (Y and X)".to_string(),
            (false, true) => "strict local (Y), true martingale (X)".to_string(),
            (false, false) => "strict local (Y and X)".to_string(),
            (true, false) => unreachable!("stopping preserves martingality"),
        }
    }
}

pub fn classify_martingality<T: Scalar>(spec: &PolynomialSpec<T>) -> Result<MartingalityReport<T>> {
    let cls = classify(spec)?;
    let y0 = spec.y0;
    let (y_true, x_true, reason) = match cls.profile {
        RootProfile::Linear(_) => (true, true, MartingalityReason::LinearPolynomial),
        RootProfile::ComplexRoots => (false, false, MartingalityReason::NoRealRoots),
        RootProfile::DoubleRoot { r } => classify_roots(y0, r, r, cls.at_root),
        RootProfile::TwoRealRoots { r1, r2, .. } => classify_roots(y0, r1, r2, cls.at_root),
    };
    let gbm = match cls.profile {
        RootProfile::TwoRealRoots { .. } => GbmDualSpec::new(spec).ok(),
        _ => None,
    };
    Ok(MartingalityReport { y_is_true_martingale: y_true, x_is_true_martingale: x_true, reason, gbm })
}

fn classify_roots<T: Scalar>(y0: T, r1: T, r2: T, at_root: bool) -> (bool, bool, MartingalityReason) {
    if at_root || (r1 <= y0 && y0 <= r2) {
        (true, true, MartingalityReason::StartBetweenRoots)
    } else if r2 >= y0 {
        (false, true, MartingalityReason::RootAboveStart)
    } else {
        (false, false, MartingalityReason::RootsBelowStart)
    }
}

/// `X` is a true martingale iff the dual polynomial has a real root in
/// `[0, 1/x0]` (or vanishes identically).
pub fn x_true_martingale_via_dual<T: Scalar>(spec: &PolynomialSpec<T>) -> Result<bool> {
    spec.validate()?;
    let d = spec.dual();
    if d.e1 == T::zero() && d.e2 == T::zero() && d.e3 == T::zero() {
        return Ok(true);
    }
    let bound = d.y0;
    Ok(d.real_roots().into_iter().any(|r| r >= T::zero() && r <= bound))
}

/// `y0 - E[Y_T] = (y0 - r1)·Q(τ ≤ T)` for two real roots.
pub fn martingale_defect<T: Scalar>(spec: &PolynomialSpec<T>, horizon: T) -> Result<T> {
    let cls = classify(spec)?;
    match cls.profile {
        RootProfile::TwoRealRoots { .. } => {
            if cls.at_root {
                return Ok(T::zero());
            }
            Ok(GbmDualSpec::new(spec)?.defect(horizon))
        }
        other => Err(QnvError::Case(format!(
            "closed-form defect needs two real roots, got {other}"
        ))),
    }
}

/// `E[X_T]` for `P(z) = z²` started at `y0`: `y0·(2Φ(1/(y0·√T)) - 1)`.
pub fn inverse_bessel_mean(y0: f64, horizon: f64) -> f64 {
    use crate::scalar::Scalar as _;
    y0 * (2.0 * (1.0 / (y0 * horizon.sqrt())).norm_cdf() - 1.0)
}

/// Defect `x0 - E[X_T]` of the inverse Bessel process `P(z) = z²`.
pub fn defect_inverse_bessel(y0: f64, horizon: f64) -> f64 {
    y0 - inverse_bessel_mean(y0, horizon)
}
