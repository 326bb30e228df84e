//! The volatility polynomial `P(z) = e1·z² + e2·z + e3` and its classification.

use crate::error::{QnvError, Result};
use crate::scalar::Scalar;

/// Coefficients of `P` together with the (positive) initial value of the process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolynomialSpec<T> {
    pub e1: T,
    pub e2: T,
    pub e3: T,
    pub y0: T,
}

/// Constants derived from a spec.
///
/// `c_const` is `C = e1·e3 − e2²/4`, `mu0` is `e1·y0 + e2/2`. `shift` is the
/// phase constant of the hyperbolic/trigonometric solution branches and is
/// `None` for the branches that have no such constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants<T> {
    pub c_const: T,
    pub mu0: T,
    pub shift: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearKind {
    /// `P ≡ const`; the process is a (scaled) Brownian motion, or constant when `P ≡ 0`.
    Constant,
    /// `e1 = e2 = 0`, `e3 ≠ 0`.
    ArithmeticBm,
    /// `e1 = 0`, `e2 ≠ 0`: geometric Brownian motion shifted by `e3/e2`.
    ShiftedGbm,
}

/// Where `y0` sits relative to two real roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootPosition {
    Inside,
    Below,
    Above,
    AtRoot,
}

impl RootPosition {
    pub fn is_outside(self) -> bool {
        matches!(self, RootPosition::Below | RootPosition::Above)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootProfile<T> {
    Linear(LinearKind),
    DoubleRoot { r: T },
    TwoRealRoots { r1: T, r2: T, position: RootPosition },
    ComplexRoots,
}

/// Output of [`classify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification<T> {
    pub constants: DerivedConstants<T>,
    pub profile: RootProfile<T>,
    /// `P(y0) = 0`: the process is constant.
    pub at_root: bool,
}

impl<T: Scalar> PolynomialSpec<T> {
    pub fn new(e1: T, e2: T, e3: T, y0: T) -> Result<Self> {
        let spec = Self { e1, e2, e3, y0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("e1", self.e1), ("e2", self.e2), ("e3", self.e3), ("y0", self.y0)] {
            if !v.is_finite() {
                return Err(QnvError::InvalidSpec(format!("{name} must be finite, got {v}")));
            }
        }
        if self.y0 <= T::zero() {
            return Err(QnvError::InvalidSpec(format!("y0 must be positive, got {}", self.y0)));
        }
        Ok(())
    }

    /// Horner evaluation of `P(z)`.
    #[inline]
    pub fn eval(&self, z: T) -> T {
        (self.e1 * z + self.e2) * z + self.e3
    }

    /// `C = e1·e3 − e2²/4`.
    #[inline]
    pub fn c_const(&self) -> T {
        self.e1 * self.e3 - self.e2 * self.e2 / T::lit(4.0)
    }

    /// `μ0 = e1·y0 + e2/2`.
    #[inline]
    pub fn mu0(&self) -> T {
        self.e1 * self.y0 + self.e2 / T::lit(2.0)
    }

    /// Threshold under which `e1` and `C` are treated as zero.
    pub fn zero_tolerance(&self) -> T {
        T::lit(1e-12) * T::one().max(self.e2.abs()).max(self.e3.abs())
    }

    pub fn e1_is_zero(&self) -> bool {
        self.e1.abs() <= self.zero_tolerance()
    }

    /// Sign of `C` under the zero-tolerance policy: -1, 0 or 1.
    pub fn c_sign(&self) -> i8 {
        let c = self.c_const();
        if c.abs() <= self.zero_tolerance() {
            0
        } else if c > T::zero() {
            1
        } else {
            -1
        }
    }

    /// `P(y0) = 0` up to rounding of the individual terms.
    pub fn is_at_root(&self) -> bool {
        let y = self.y0;
        let scale = T::one()
            .max((self.e1 * y * y).abs())
            .max((self.e2 * y).abs())
            .max(self.e3.abs());
        self.eval(y).abs() <= T::lit(1e-12) * scale
    }

    /// Polynomial of the reciprocal process, `-z²·P(1/z)`, started at `1/y0`.
    pub fn dual(&self) -> Self {
        Self { e1: -self.e3, e2: -self.e2, e3: -self.e1, y0: T::one() / self.y0 }
    }

    /// Real roots in increasing order (empty for complex roots and for
    /// constant polynomials; a double root is reported once).
    pub fn real_roots(&self) -> Vec<T> {
        if self.e1_is_zero() {
            if self.e2 != T::zero() {
                return vec![-self.e3 / self.e2];
            }
            return Vec::new();
        }
        match self.c_sign() {
            1 => Vec::new(),
            0 => vec![-self.e2 / (T::lit(2.0) * self.e1)],
            _ => {
                let (r1, r2) = two_roots(self.e1, self.e2, self.e3);
                vec![r1, r2]
            }
        }
    }
}

/// Roots of a quadratic with positive discriminant, via the cancellation-free
/// form `q = -(e2 + sign(e2)·√disc)/2`, returned as `(r1, r2)` with `r1 < r2`.
fn two_roots<T: Scalar>(e1: T, e2: T, e3: T) -> (T, T) {
    let disc = (e2 * e2 - T::lit(4.0) * e1 * e3).max(T::zero());
    let sq = disc.sqrt();
    let sign = if e2 < T::zero() { -T::one() } else { T::one() };
    let q = -(e2 + sign * sq) / T::lit(2.0);
    let (x, y) = if q == T::zero() {
        // e2 = 0 and e1·e3 = 0 cannot reach here (disc > 0 ⇒ q ≠ 0 unless both vanish)
        (T::zero(), T::zero())
    } else {
        (q / e1, e3 / q)
    };
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// Derives the constants and the root configuration of `spec`.
pub fn classify<T: Scalar>(spec: &PolynomialSpec<T>) -> Result<Classification<T>> {
    spec.validate()?;
    let c_const = spec.c_const();
    let mu0 = spec.mu0();
    let at_root = spec.is_at_root();

    if spec.e1_is_zero() {
        let kind = if spec.e2 != T::zero() {
            LinearKind::ShiftedGbm
        } else if spec.e3 != T::zero() {
            LinearKind::ArithmeticBm
        } else {
            LinearKind::Constant
        };
        return Ok(Classification {
            constants: DerivedConstants { c_const, mu0, shift: None },
            profile: RootProfile::Linear(kind),
            at_root,
        });
    }

    let (profile, shift) = match spec.c_sign() {
        0 => (RootProfile::DoubleRoot { r: -spec.e2 / (T::lit(2.0) * spec.e1) }, None),
        1 => {
            let k = c_const.sqrt();
            (RootProfile::ComplexRoots, Some(crate::scalar::odd_atan(-mu0 / k)))
        }
        _ => {
            let (r1, r2) = two_roots(spec.e1, spec.e2, spec.e3);
            let k = (-c_const).sqrt();
            let position = if at_root {
                RootPosition::AtRoot
            } else if spec.y0 < r1 {
                RootPosition::Below
            } else if spec.y0 > r2 {
                RootPosition::Above
            } else {
                RootPosition::Inside
            };
            let shift = match position {
                RootPosition::Inside => Some(crate::scalar::odd_atanh(-mu0 / k)),
                RootPosition::Below | RootPosition::Above => {
                    Some(crate::scalar::odd_acoth(-mu0 / k))
                }
                RootPosition::AtRoot => None,
            };
            (RootProfile::TwoRealRoots { r1, r2, position }, shift)
        }
    };
    Ok(Classification { constants: DerivedConstants { c_const, mu0, shift }, profile, at_root })
}

/// `P̂(z) = -z²·P(1/z) = -e3·z² - e2·z - e1` with initial value `1/y0`.
pub fn dual_polynomial<T: Scalar>(spec: &PolynomialSpec<T>) -> Result<PolynomialSpec<T>> {
    spec.validate()?;
    Ok(spec.dual())
}

/// Real roots of a classified polynomial; empty for complex roots.
pub fn roots_of<T: Scalar>(spec: &PolynomialSpec<T>, profile: &RootProfile<T>) -> Vec<T> {
    match *profile {
        RootProfile::Linear(LinearKind::ShiftedGbm) => vec![-spec.e3 / spec.e2],
        RootProfile::Linear(_) => Vec::new(),
        RootProfile::DoubleRoot { r } => vec![r],
        RootProfile::TwoRealRoots { r1, r2, .. } => vec![r1, r2],
        RootProfile::ComplexRoots => Vec::new(),
    }
}

impl<T: Scalar> std::fmt::Display for RootProfile<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RootProfile::Linear(LinearKind::Constant) => write!(f, "Linear/constant"),
            RootProfile::Linear(LinearKind::ArithmeticBm) => write!(f, "Linear/arithmetic-BM"),
            RootProfile::Linear(LinearKind::ShiftedGbm) => write!(f, "Linear/shifted-GBM"),
            RootProfile::DoubleRoot { r } => write!(f, "DoubleRoot r={}", *r + T::zero()),
            RootProfile::TwoRealRoots { r1, r2, position } => {
                let pos = match position {
                    RootPosition::Inside => "inside",
                    RootPosition::Below => "below",
                    RootPosition::Above => "above",
                    RootPosition::AtRoot => "at-root",
                };
                write!(f, "TwoRealRoots r1={} r2={} y0 {pos}", *r1 + T::zero(), *r2 + T::zero())
            }
            RootProfile::ComplexRoots => write!(f, "ComplexRoots"),
        }
    }
}
