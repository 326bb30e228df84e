//! Explicit solutions of the Riccati equation `f' = P(f)`, `f(0) = y0`, together
//! with the weight function `g = exp(-∫μ)` and `μ = e1·f + e2/2`.
//!
//! A [`ClosedFormMap`] is the transformation that turns Brownian motion `W`
//! into the QNV process `f(W)`; `g` is the spatial part of the density
//! `Z_t = exp(C·t/2)·g(W_t)` of the measure change. `(lower, upper)` is the
//! maximal interval around zero on which `f` is finite.

use crate::error::{QnvError, Result};
use crate::poly::{classify, Classification, LinearKind, PolynomialSpec, RootPosition, RootProfile};
use crate::scalar::Scalar;

/// Which explicit formula represents the map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionCase {
    /// `f ≡ y0`, `g(x) = exp(-μ0·x)`.
    Constant,
    /// `f(x) = e3·x + y0`, `g ≡ 1`.
    Linear,
    /// `f(x) = (y0 + e3/e2)·exp(e2·x) - e3/e2`, `g(x) = exp(-e2·x/2)`.
    Exponential,
    /// Double root `r`: `f(x) = (y0 - r)/(1 - μ0·x) + r`, `g(x) = 1 - μ0·x`.
    Rational,
    /// Two real roots, `y0` between them: `tanh`/`cosh` forms.
    Tanh,
    /// Two real roots, `y0` outside: `coth`/`sinh` forms.
    Coth,
    /// Complex roots: `tan`/`cos` forms.
    Tan,
    /// `1/f` of another map.
    Reciprocal,
}

#[derive(Debug, Clone, PartialEq)]
enum Branch<T> {
    Constant,
    Linear { slope: T },
    Exponential { rate: T, offset: T, amp: T },
    Rational { r: T, amp: T },
    // For the three trigonometric/hyperbolic branches, `scale = k/e1` and
    // `centre = e2/(2·e1)` with `k = √|C|`.
    Tanh { k: T, scale: T, centre: T },
    Coth { k: T, scale: T, centre: T, pole: T },
    Tan { k: T, scale: T, centre: T },
}

#[derive(Debug, Clone, PartialEq)]
enum Repr<T> {
    Direct(Branch<T>),
    Reciprocal(Box<ClosedFormMap<T>>),
}

/// The solution triple `(f, g, μ)` on its explosion interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormMap<T> {
    spec: PolynomialSpec<T>,
    case: SolutionCase,
    c_const: T,
    mu0: T,
    shift: Option<T>,
    lower: T,
    upper: T,
    lower_explodes: bool,
    upper_explodes: bool,
    increasing: bool,
    repr: Repr<T>,
}

/// Distance to a finite boundary below which `f` and `g` are evaluated in
/// terms of that distance (relative to `max(1, |boundary|)`).
const NEAR_BOUNDARY: f64 = 1e-8;

/// Builds the solution map for `spec`.
pub fn build<T: Scalar>(spec: &PolynomialSpec<T>) -> Result<ClosedFormMap<T>> {
    let cls = classify(spec)?;
    ClosedFormMap::from_classification(spec, &cls)
}

impl<T: Scalar> ClosedFormMap<T> {
    pub fn from_classification(spec: &PolynomialSpec<T>, cls: &Classification<T>) -> Result<Self> {
        let f0 = spec.y0;
        let mu0 = cls.constants.mu0;
        let c_const = cls.constants.c_const;
        let two = T::lit(2.0);
        let inf = T::infinity();
        let (mut lower, mut upper) = (-inf, inf);

        let branch = if cls.at_root {
            Branch::Constant
        } else {
            match cls.profile {
                RootProfile::Linear(LinearKind::Constant) => Branch::Constant,
                RootProfile::Linear(LinearKind::ArithmeticBm) => Branch::Linear { slope: spec.e3 },
                RootProfile::Linear(LinearKind::ShiftedGbm) => {
                    let offset = spec.e3 / spec.e2;
                    Branch::Exponential { rate: spec.e2, offset, amp: f0 + offset }
                }
                RootProfile::DoubleRoot { r } => {
                    // μ0 = e1·(y0 - r) ≠ 0 here since y0 is not the root.
                    debug_assert!(mu0 != T::zero(), "double root with μ0 = 0 away from the root");
                    if mu0 > T::zero() {
                        upper = T::one() / mu0;
                    } else {
                        lower = T::one() / mu0;
                    }
                    Branch::Rational { r, amp: f0 - r }
                }
                RootProfile::TwoRealRoots { position, .. } => {
                    let k = (-c_const).sqrt();
                    let scale = k / spec.e1;
                    let centre = spec.e2 / (two * spec.e1);
                    let c = cls.constants.shift.expect("shift defined off the roots");
                    match position {
                        RootPosition::Inside => Branch::Tanh { k, scale, centre },
                        RootPosition::Below | RootPosition::Above => {
                            let pole = -c / k;
                            if pole > T::zero() {
                                upper = pole;
                            } else {
                                lower = pole;
                            }
                            Branch::Coth { k, scale, centre, pole }
                        }
                        RootPosition::AtRoot => Branch::Constant,
                    }
                }
                RootProfile::ComplexRoots => {
                    let k = c_const.sqrt();
                    let c = cls.constants.shift.expect("shift defined for complex roots");
                    let half_pi = T::FRAC_PI_2();
                    lower = (c - half_pi) / k;
                    upper = (c + half_pi) / k;
                    Branch::Tan { k, scale: k / spec.e1, centre: spec.e2 / (two * spec.e1) }
                }
            }
        };

        let case = match branch {
            Branch::Constant => SolutionCase::Constant,
            Branch::Linear { .. } => SolutionCase::Linear,
            Branch::Exponential { .. } => SolutionCase::Exponential,
            Branch::Rational { .. } => SolutionCase::Rational,
            Branch::Tanh { .. } => SolutionCase::Tanh,
            Branch::Coth { .. } => SolutionCase::Coth,
            Branch::Tan { .. } => SolutionCase::Tan,
        };

        Ok(Self {
            spec: *spec,
            case,
            c_const,
            mu0,
            shift: cls.constants.shift,
            lower,
            upper,
            lower_explodes: lower.is_finite(),
            upper_explodes: upper.is_finite(),
            increasing: spec.eval(f0) > T::zero(),
            repr: Repr::Direct(branch),
        })
    }

    pub fn spec(&self) -> &PolynomialSpec<T> {
        &self.spec
    }

    pub fn case(&self) -> SolutionCase {
        self.case
    }

    /// `C = e1·e3 - e2²/4`.
    pub fn c_const(&self) -> T {
        self.c_const
    }

    pub fn mu0(&self) -> T {
        self.mu0
    }

    /// Phase constant `c` of the tanh/coth/tan branches.
    pub fn shift(&self) -> Option<T> {
        self.shift
    }

    pub fn f0(&self) -> T {
        self.spec.y0
    }

    /// `f'(0) = P(f0)`, the scale `d` of the integral representation of `f`.
    pub fn slope_at_origin(&self) -> T {
        self.spec.eval(self.spec.y0)
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    pub fn is_constant(&self) -> bool {
        self.case == SolutionCase::Constant
    }

    /// Whether `f` is increasing on its domain (meaningless for constant maps).
    pub fn is_increasing(&self) -> bool {
        self.increasing
    }

    fn check_closed(&self, x: T) -> Result<()> {
        if x.is_nan() || x < self.lower || x > self.upper {
            return Err(QnvError::Domain {
                x: x.to_f64_lossy(),
                lower: self.lower.to_f64_lossy(),
                upper: self.upper.to_f64_lossy(),
            });
        }
        Ok(())
    }

    fn boundary_value(&self, at_upper: bool) -> T {
        let explodes = if at_upper { self.upper_explodes } else { self.lower_explodes };
        if !explodes {
            return T::zero();
        }
        if at_upper == self.increasing {
            T::infinity()
        } else {
            T::neg_infinity()
        }
    }

    fn near(&self, x: T, boundary: T) -> bool {
        boundary.is_finite()
            && (boundary - x).abs() <= T::lit(NEAR_BOUNDARY) * T::one().max(boundary.abs())
    }

    /// `f(x)` on `[lower, upper]`; signed infinity at an exploding boundary.
    pub fn eval_f(&self, x: T) -> Result<T> {
        self.check_closed(x)?;
        if x == self.upper && self.upper.is_finite() {
            return Ok(self.boundary_value(true));
        }
        if x == self.lower && self.lower.is_finite() {
            return Ok(self.boundary_value(false));
        }
        Ok(match &self.repr {
            Repr::Direct(b) => self.direct_f(b, x),
            Repr::Reciprocal(base) => T::one() / base.eval_f(x)?,
        })
    }

    fn direct_f(&self, b: &Branch<T>, x: T) -> T {
        let f0 = self.spec.y0;
        match *b {
            Branch::Constant => f0,
            Branch::Linear { slope } => slope * x + f0,
            Branch::Exponential { rate, offset, amp } => amp * (rate * x).exp() - offset,
            Branch::Rational { r, amp } => amp / self.rational_g(x) + r,
            Branch::Tanh { k, scale, centre } => {
                let c = self.shift.unwrap();
                -scale * (k * x + c).tanh() - centre
            }
            Branch::Coth { k, scale, centre, pole } => {
                let s = if self.near(x, pole) { k * (x - pole) } else { k * x + self.shift.unwrap() };
                -scale / s.tanh() - centre
            }
            Branch::Tan { k, scale, centre } => {
                let c = self.shift.unwrap();
                let t = if self.near(x, self.upper) {
                    T::one() / (k * (self.upper - x)).tan()
                } else if self.near(x, self.lower) {
                    -T::one() / (k * (x - self.lower)).tan()
                } else {
                    (k * x - c).tan()
                };
                scale * t - centre
            }
        }
    }

    fn rational_g(&self, x: T) -> T {
        let pole = if self.upper.is_finite() { self.upper } else { self.lower };
        if self.near(x, pole) {
            self.mu0 * (pole - x)
        } else {
            T::one() - self.mu0 * x
        }
    }

    /// `g(x)` on `[lower, upper]`.
    pub fn eval_g(&self, x: T) -> Result<T> {
        self.check_closed(x)?;
        match &self.repr {
            Repr::Direct(b) => {
                if (x == self.upper && self.upper_explodes) || (x == self.lower && self.lower_explodes) {
                    return Ok(T::zero());
                }
                Ok(self.direct_g(b, x))
            }
            Repr::Reciprocal(base) => {
                let at_zero_of_base = (x == self.upper && self.upper_explodes)
                    || (x == self.lower && self.lower_explodes);
                if at_zero_of_base {
                    return Ok(T::zero());
                }
                Ok(base.eval_gf(x)? / base.f0())
            }
        }
    }

    fn direct_g(&self, b: &Branch<T>, x: T) -> T {
        match *b {
            Branch::Constant => (-self.mu0 * x).exp(),
            Branch::Linear { .. } => T::one(),
            Branch::Exponential { rate, .. } => (-rate * x / T::lit(2.0)).exp(),
            Branch::Rational { .. } => self.rational_g(x),
            Branch::Tanh { k, .. } => {
                let c = self.shift.unwrap();
                (k * x + c).cosh() / c.cosh()
            }
            Branch::Coth { k, pole, .. } => {
                let c = self.shift.unwrap();
                let s = if self.near(x, pole) { k * (x - pole) } else { k * x + c };
                s.sinh() / c.sinh()
            }
            Branch::Tan { k, .. } => {
                let c = self.shift.unwrap();
                let cosine = if self.near(x, self.upper) {
                    (k * (self.upper - x)).sin()
                } else if self.near(x, self.lower) {
                    (k * (x - self.lower)).sin()
                } else {
                    (k * x - c).cos()
                };
                cosine / c.cos()
            }
        }
    }

    /// The product `g(x)·f(x)`, which stays finite at exploding boundaries.
    pub fn eval_gf(&self, x: T) -> Result<T> {
        self.check_closed(x)?;
        let b = match &self.repr {
            Repr::Direct(b) => b,
            Repr::Reciprocal(base) => {
                // ĝ·f̂ = g·f/f0 · 1/f = g/f0
                return Ok(base.eval_g(x)? / base.f0());
            }
        };
        Ok(match *b {
            Branch::Rational { r, amp } => amp + r * self.rational_g(x),
            Branch::Coth { k, scale, centre, pole } => {
                let c = self.shift.unwrap();
                let s = if self.near(x, pole) { k * (x - pole) } else { k * x + c };
                (-scale * s.cosh() - centre * s.sinh()) / c.sinh()
            }
            Branch::Tan { k, scale, centre } => {
                let c = self.shift.unwrap();
                let theta = k * x - c;
                (scale * theta.sin() - centre * theta.cos()) / c.cos()
            }
            _ => self.direct_f(b, x) * self.direct_g(b, x),
        })
    }

    /// `μ(x) = e1·f(x) + e2/2` on the open domain.
    pub fn eval_mu(&self, x: T) -> Result<T> {
        self.check_open(x)?;
        match &self.repr {
            Repr::Direct(_) => Ok(self.spec.e1 * self.eval_f(x)? + self.spec.e2 / T::lit(2.0)),
            Repr::Reciprocal(base) => {
                let f = base.eval_f(x)?;
                if f.is_infinite() {
                    // μ - P(f)/f → -e2/2 as |f| → ∞
                    return Ok(-base.spec.e2 / T::lit(2.0));
                }
                Ok(base.eval_mu(x)? - base.spec.eval(f) / f)
            }
        }
    }

    fn check_open(&self, x: T) -> Result<()> {
        self.check_closed(x)?;
        if (x == self.lower && self.lower.is_finite()) || (x == self.upper && self.upper.is_finite()) {
            return Err(QnvError::Domain {
                x: x.to_f64_lossy(),
                lower: self.lower.to_f64_lossy(),
                upper: self.upper.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// `f'(x) = P(f(x))`.
    pub fn eval_f_prime(&self, x: T) -> Result<T> {
        let f = self.eval_f(x)?;
        Ok(self.spec.eval(f))
    }

    /// The unique `x` in `[lower, upper]` with `f(x) = y`.
    pub fn invert_f(&self, y: T) -> Result<T> {
        let range_err = || QnvError::Range { y: y.to_f64_lossy() };
        if y.is_nan() {
            return Err(range_err());
        }
        if y.is_infinite() {
            for (bound, at_upper) in [(self.upper, true), (self.lower, false)] {
                if bound.is_finite() && self.boundary_value(at_upper) == y {
                    return Ok(bound);
                }
            }
            return Err(range_err());
        }
        let x = match &self.repr {
            Repr::Reciprocal(base) => {
                if y == T::zero() {
                    for (bound, explodes) in
                        [(self.upper, self.upper_explodes), (self.lower, self.lower_explodes)]
                    {
                        if bound.is_finite() && !explodes {
                            return Ok(bound);
                        }
                    }
                    return Err(range_err());
                }
                base.invert_f(T::one() / y)?
            }
            Repr::Direct(b) => self.direct_inverse(b, y).ok_or_else(range_err)?,
        };
        if x.is_nan() || x <= self.lower || x >= self.upper {
            return Err(range_err());
        }
        Ok(x)
    }

    fn direct_inverse(&self, b: &Branch<T>, y: T) -> Option<T> {
        let f0 = self.spec.y0;
        let one = T::one();
        match *b {
            Branch::Constant => (y == f0).then(T::zero),
            Branch::Linear { slope } => Some((y - f0) / slope),
            Branch::Exponential { rate, offset, amp } => {
                let ratio = (y + offset) / amp;
                (ratio > T::zero()).then(|| ratio.ln() / rate)
            }
            Branch::Rational { r, amp } => {
                let ratio = amp / (y - r);
                (ratio > T::zero()).then(|| (one - ratio) / self.mu0)
            }
            Branch::Tanh { k, scale, centre } => {
                let u = -(y + centre) / scale;
                (u.abs() < one).then(|| (u.atanh() - self.shift.unwrap()) / k)
            }
            Branch::Coth { k, scale, centre, .. } => {
                let u = -(y + centre) / scale;
                let c = self.shift.unwrap();
                if u.abs() <= one {
                    return None;
                }
                let s = crate::scalar::odd_acoth(u);
                ((s > T::zero()) == (c > T::zero())).then(|| (s - c) / k)
            }
            Branch::Tan { k, scale, centre } => {
                let u = (y + centre) / scale;
                Some((u.atan() + self.shift.unwrap()) / k)
            }
        }
    }

    /// Level of `W` at which `f(W)` hits zero, if zero is in the range of `f`.
    pub fn zero_level(&self) -> Option<T> {
        if self.is_constant() {
            return None;
        }
        self.invert_f(T::zero()).ok()
    }

    /// The map `(1/f, g·f/f0, μ - f'/f)` on the largest interval around zero
    /// that excludes the zeros of `f`.
    pub fn reciprocal_map(&self) -> Result<ClosedFormMap<T>> {
        let f0 = self.f0();
        if f0 == T::zero() {
            return Err(QnvError::InvalidSpec("reciprocal map requires f0 ≠ 0".into()));
        }
        let (mut lower, mut upper) = (self.lower, self.upper);
        let (mut lower_explodes, mut upper_explodes) = (false, false);
        if let Some(z) = self.zero_level() {
            if z > T::zero() {
                upper = z;
                upper_explodes = true;
            } else {
                lower = z;
                lower_explodes = true;
            }
        }
        let dual = self.spec.dual();
        Ok(ClosedFormMap {
            spec: dual,
            case: SolutionCase::Reciprocal,
            c_const: dual.c_const(),
            mu0: dual.mu0(),
            shift: None,
            lower,
            upper,
            lower_explodes,
            upper_explodes,
            increasing: !self.increasing,
            repr: Repr::Reciprocal(Box::new(self.clone())),
        })
    }
}
