//! Quadratic normal volatility (QNV) models.
//!
//! A QNV process solves `dY = P(Y) dB` with `P(z) = e1·z² + e2·z + e3`. This
//! crate provides the explicit solution maps `f(W)`, the martingality
//! classification, exact Monte Carlo pricing through the Brownian
//! representation, an Euler reference simulator and the numeraire-change
//! machinery built on the reciprocal (dual) process.
//!
//! The analytic modules are generic over [`Scalar`] (`f32` or `f64`); the
//! simulation engines work in `f64`. Aliases for the `f64` instantiations live
//! at the crate root.

pub mod closed_form;
pub mod engine;
pub mod error;
pub mod euler;
pub mod gbm;
pub mod martingality;
pub mod measures;
pub mod payoff;
pub mod poly;
pub mod scalar;

pub use closed_form::{build, ClosedFormMap, SolutionCase};
pub use engine::{price_stopped, price_unstopped, ClaimSpec, Estimator, McParams, PriceEstimate};
pub use error::{QnvError, Result};
pub use euler::{euler_price, EulerParams};
pub use gbm::{gbm_price, GbmDualSpec};
pub use martingality::{classify_martingality, martingale_defect, MartingalityReport};
pub use payoff::{PathFunctional, Payoff, Terminal};
pub use poly::{
    classify, dual_polynomial, roots_of, Classification, DerivedConstants, LinearKind,
    PolynomialSpec, RootPosition, RootProfile,
};
pub use scalar::Scalar;

pub type Spec = PolynomialSpec<f64>;
pub type Map = ClosedFormMap<f64>;
