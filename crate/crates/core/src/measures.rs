//! Change of numéraire. The reciprocal `1/X` of a stopped QNV process is a
//! stopped QNV process for `P̂(z) = -e3·z² - e2·z - e1` under the measure with
//! density `X_T/x0`; on a common Brownian path the zero level of one model is
//! the explosion boundary of the other.

use std::sync::Arc;

use crate::closed_form::{build, ClosedFormMap};
use crate::engine::{
    eval_functional, fate_for, fate_weight, price_with_map, run_paths, weighted_value, ClaimSpec, Estimator,
    Fate, Levels, McParams, PriceEstimate, Side,
};
use crate::error::{QnvError, Result};
use crate::payoff::PathFunctional;
use crate::poly::PolynomialSpec;

const DUAL_STREAM_OFFSET: u64 = 1 << 61;
const MIRROR_STREAM_OFFSET: u64 = 1 << 60;
const DIRECT_STREAM_OFFSET: u64 = 1 << 59;

/// A spec together with its dual and both solution maps.
#[derive(Debug, Clone)]
pub struct DualModel {
    pub spec: PolynomialSpec<f64>,
    pub dual_spec: PolynomialSpec<f64>,
    pub primal: ClosedFormMap<f64>,
    pub dual: ClosedFormMap<f64>,
}

impl DualModel {
    pub fn new(spec: &PolynomialSpec<f64>) -> Result<Self> {
        spec.validate()?;
        let dual_spec = spec.dual();
        Ok(Self { spec: *spec, dual_spec, primal: build(spec)?, dual: build(&dual_spec)? })
    }

    /// `|ĝ(w)·x0 - g(w)·f(w)|` relative to `max(|g(w)·f(w)|, 1e-300)`.
    pub fn weight_duality_error(&self, w: f64) -> Result<f64> {
        let lhs = self.dual.eval_g(w)? * self.spec.y0;
        let rhs = self.primal.eval_gf(w)?;
        Ok((lhs - rhs).abs() / rhs.abs().max(1e-300))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoellmerResult {
    /// Dual-model estimate of `E^P̃[(1/X_T)·H·1{X_T<∞}]`.
    pub lhs: PriceEstimate,
    /// Primal estimate of `E[H·1{X_T>0}]/x0`.
    pub rhs: PriceEstimate,
}

impl FoellmerResult {
    pub fn difference(&self) -> f64 {
        self.lhs.mean - self.rhs.mean
    }

    pub fn z_score(&self) -> f64 {
        self.lhs.z_score(&self.rhs)
    }
}

/// `H` read on the reciprocal of a dual path, times `X̂_T·1{X̂_T>0}`.
struct OnReciprocal<'a>(&'a dyn PathFunctional);

impl PathFunctional for OnReciprocal<'_> {
    fn eval(&self, path: &[f64]) -> f64 {
        let xt = path[path.len() - 1];
        if !(xt > 0.0) || xt.is_infinite() {
            return 0.0;
        }
        let inv: Vec<f64> = path.iter().map(|&x| 1.0 / x).collect();
        xt * self.0.eval(&inv)
    }

    fn terminal_only(&self) -> bool {
        self.0.terminal_only()
    }
}

/// `H·1{X_T>0}/x0`.
struct PositivePart<'a>(&'a dyn PathFunctional, f64);

impl PathFunctional for PositivePart<'_> {
    fn eval(&self, path: &[f64]) -> f64 {
        if !(path[path.len() - 1] > 0.0) {
            return 0.0;
        }
        self.0.eval(path) / self.1
    }

    fn terminal_only(&self) -> bool {
        self.0.terminal_only()
    }
}

/// Both sides of the Föllmer identity, each estimated by its own simulation.
pub fn foellmer_expectation(
    spec: &PolynomialSpec<f64>,
    h: &dyn PathFunctional,
    horizon: f64,
    params: &McParams,
) -> Result<FoellmerResult> {
    let model = DualModel::new(spec)?;
    let lhs = price_with_map(&model.dual, &OnReciprocal(h), horizon, params, true, DUAL_STREAM_OFFSET)?;
    let rhs = price_with_map(&model.primal, &PositivePart(h, spec.y0), horizon, params, true, 0)?;
    Ok(FoellmerResult { lhs, rhs })
}

/// Outcome of comparing the stopped/killed classification of primal and dual
/// models on the same Brownian paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapReport {
    pub paths: usize,
    pub stopped: usize,
    pub killed: usize,
    pub mismatches: usize,
}

/// Checks on every path that the primal stops (`S`) exactly where the dual is
/// killed (`τ̂`), and the other way round.
pub fn tau_s_swap_check(spec: &PolynomialSpec<f64>, horizon: f64, params: &McParams) -> Result<SwapReport> {
    let model = DualModel::new(spec)?;
    let primal = Levels::of(&model.primal, true);
    let dual = Levels::of(&model.dual, true);
    let per_path = run_paths(params, horizon, 0, |_, grid| {
        let p = fate_for(grid, &primal);
        let d = fate_for(grid, &dual);
        let matched = match (p, d) {
            (Fate::Survived, Fate::Survived) => true,
            (Fate::Stopped(a), Fate::Killed(b, _)) | (Fate::Killed(a, _), Fate::Stopped(b)) => {
                a.grid_index() == b.grid_index()
            }
            _ => false,
        };
        Ok((p, matched))
    })?;
    Ok(SwapReport {
        paths: per_path.len(),
        stopped: per_path.iter().filter(|(f, _)| matches!(f, Fate::Stopped(_))).count(),
        killed: per_path.iter().filter(|(f, _)| matches!(f, Fate::Killed(..))).count(),
        mismatches: per_path.iter().filter(|(_, m)| !m).count(),
    })
}

/// Checks `e3 = e1·L²` and `x0 = L`, both to `1e-10` relative.
pub fn check_symmetric_shape(spec: &PolynomialSpec<f64>, level: f64) -> Result<()> {
    check_coefficients(spec, level)?;
    if (spec.y0 - level).abs() > 1e-10 * level.abs() {
        return Err(QnvError::SpecShape(format!("x0 = {} must equal L = {level}", spec.y0)));
    }
    Ok(())
}

fn check_coefficients(spec: &PolynomialSpec<f64>, level: f64) -> Result<()> {
    spec.validate()?;
    if !(level > 0.0) || !level.is_finite() {
        return Err(QnvError::SpecShape(format!("L must be positive, got {level}")));
    }
    let target = spec.e1 * level * level;
    if (spec.e3 - target).abs() > 1e-10 * spec.e3.abs().max(target.abs()) {
        return Err(QnvError::SpecShape(format!("e3 = {} must equal e1·L² = {target}", spec.e3)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryResult {
    /// `E[h(X_T/L)]`
    pub lhs: PriceEstimate,
    /// `E[h(L/X_T)·X_T/L]`
    pub rhs: PriceEstimate,
}

impl SymmetryResult {
    pub fn z_score(&self) -> f64 {
        self.lhs.z_score(&self.rhs)
    }
}

type Terminal = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

struct Scaled(Terminal, f64);

impl PathFunctional for Scaled {
    fn eval(&self, path: &[f64]) -> f64 {
        (self.0)(path[path.len() - 1] / self.1)
    }

    fn terminal_only(&self) -> bool {
        true
    }
}

/// `h(L/x)·x/L`, zero at `x = 0`.
struct Reflected(Terminal, f64);

impl PathFunctional for Reflected {
    fn eval(&self, path: &[f64]) -> f64 {
        let x = path[path.len() - 1];
        if x == 0.0 {
            return 0.0;
        }
        (self.0)(self.1 / x) * x / self.1
    }

    fn terminal_only(&self) -> bool {
        true
    }
}

/// Both sides of `E[h(X_T/L)] = E[h(L/X_T)·X_T/L]`, from independent runs.
pub fn symmetry_check(
    spec: &PolynomialSpec<f64>,
    h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    level: f64,
    horizon: f64,
    params: &McParams,
) -> Result<SymmetryResult> {
    check_symmetric_shape(spec, level)?;
    symmetry_sides(spec, Arc::new(h), level, horizon, params)
}

fn symmetry_sides(
    spec: &PolynomialSpec<f64>,
    h: Terminal,
    level: f64,
    horizon: f64,
    params: &McParams,
) -> Result<SymmetryResult> {
    let map = build(spec)?;
    let lhs = price_with_map(&map, &Scaled(h.clone(), level), horizon, params, true, 0)?;
    let rhs = price_with_map(&map, &Reflected(h, level), horizon, params, true, MIRROR_STREAM_OFFSET)?;
    Ok(SymmetryResult { lhs, rhs })
}

/// One of the three European legs of the barrier hedge.
#[derive(Clone)]
pub struct HedgePosition {
    pub name: &'static str,
    payoff: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl HedgePosition {
    pub fn value(&self, x: f64) -> f64 {
        (self.payoff)(x)
    }
}

impl std::fmt::Debug for HedgePosition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name)
    }
}

/// Semi-static replication of the down-and-in claim `h(X_T/L)·1{min X ≤ L}`:
/// hold positions 1 and 2 from inception; at the first touch of `L` sell
/// position 2 and buy position 3, which has the same price there.
#[derive(Clone)]
pub struct HedgePlan {
    pub spec: PolynomialSpec<f64>,
    pub level: f64,
    pub horizon: f64,
    pub positions: [HedgePosition; 3],
    h: Terminal,
}

impl std::fmt::Debug for HedgePlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HedgePlan")
            .field("spec", &self.spec)
            .field("level", &self.level)
            .field("horizon", &self.horizon)
            .field("positions", &self.positions)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationReport {
    pub paths: usize,
    pub hits: usize,
    pub max_abs_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeCost {
    /// Price of positions 1 and 2 at inception.
    pub initial: PriceEstimate,
    /// Direct price of the down-and-in claim.
    pub direct: PriceEstimate,
}

pub fn semistatic_hedge_plan(
    spec: &PolynomialSpec<f64>,
    h: impl Fn(f64) -> f64 + Send + Sync + 'static,
    level: f64,
    horizon: f64,
) -> Result<HedgePlan> {
    check_coefficients(spec, level)?;
    if !(spec.y0 > level) {
        return Err(QnvError::SpecShape(format!("x0 = {} must exceed L = {level}", spec.y0)));
    }
    if !(horizon > 0.0) {
        return Err(QnvError::InvalidParams(format!("horizon must be positive, got {horizon}")));
    }
    let h: Terminal = Arc::new(h);
    let (h1, h2, h3) = (h.clone(), h.clone(), h.clone());
    let l = level;
    let positions = [
        HedgePosition {
            name: "h(X_T/L)·1{X_T≤L}",
            payoff: Arc::new(move |x| if x <= l { h1(x / l) } else { 0.0 }),
        },
        HedgePosition {
            name: "h(L/X_T)·(X_T/L)·1{X_T<L}",
            payoff: Arc::new(move |x| if x < l && x > 0.0 { h2(l / x) * x / l } else { 0.0 }),
        },
        HedgePosition {
            name: "h(X_T/L)·1{X_T>L}",
            payoff: Arc::new(move |x| if x > l { h3(x / l) } else { 0.0 }),
        },
    ];
    Ok(HedgePlan { spec: *spec, level, horizon, positions, h })
}

impl HedgePlan {
    fn barrier_level(&self, map: &ClosedFormMap<f64>) -> Result<f64> {
        map.invert_f(self.level)
    }

    /// Terminal value of the hedge portfolio given whether `L` was touched.
    pub fn portfolio_value(&self, touched: bool, x: f64) -> f64 {
        let [p1, p2, p3] = &self.positions;
        if touched {
            p1.value(x) + p3.value(x)
        } else {
            p1.value(x) + p2.value(x)
        }
    }

    pub fn target_value(&self, touched: bool, x: f64) -> f64 {
        if touched {
            (self.h)(x / self.level)
        } else {
            0.0
        }
    }

    /// Pathwise comparison of portfolio and target on simulated paths.
    pub fn replication_check(&self, params: &McParams) -> Result<ReplicationReport> {
        let map = build(&self.spec)?;
        let ell = self.barrier_level(&map)?;
        let levels = Levels::of(&map, true);
        let per_path = run_paths(params, self.horizon, 0, |_, grid| {
            let fate = fate_for(grid, &levels);
            let touched = touched_before(grid, ell, fate);
            let x = terminal_of(&map, grid, fate)?;
            let err = (self.portfolio_value(touched, x) - self.target_value(touched, x)).abs();
            Ok((touched, err))
        })?;
        Ok(ReplicationReport {
            paths: per_path.len(),
            hits: per_path.iter().filter(|p| p.0).count(),
            max_abs_error: per_path.iter().map(|p| p.1).fold(0.0, f64::max),
        })
    }

    /// Inception price of positions 1 and 2 against the direct down-and-in price.
    pub fn initial_cost(&self, params: &McParams) -> Result<HedgeCost> {
        let map = build(&self.spec)?;
        let ell = self.barrier_level(&map)?;
        let levels = Levels::of(&map, true);
        let [p1, p2, _] = self.positions.clone();
        let legs = move |path: &[f64]| {
            let x = path[path.len() - 1];
            p1.value(x) + p2.value(x)
        };
        let initial = price_with_map(&map, &TerminalFn(legs), self.horizon, params, true, 0)?;
        let direct_values = run_paths(params, self.horizon, DIRECT_STREAM_OFFSET, |i, grid| {
            let fate = fate_for(grid, &levels);
            let weight = fate_weight(&map, grid, fate, levels.stop)?;
            if weight == 0.0 || !touched_before(grid, ell, fate) {
                return Ok(0.0);
            }
            let x = terminal_of(&map, grid, fate)?;
            weighted_value((self.h)(x / self.level), weight, i)
        })?;
        let direct = PriceEstimate::from_samples(&direct_values, params.seed, Estimator::TransformedBm);
        Ok(HedgeCost { initial, direct })
    }

    /// Prices of positions 2 and 3 when the process sits at the barrier,
    /// by restarting the model at `x0 = L`.
    pub fn barrier_restart(&self, params: &McParams) -> Result<SymmetryResult> {
        let restarted = PolynomialSpec { y0: self.level, ..self.spec };
        let h = self.h.clone();
        let above: Terminal = Arc::new(move |u| if u > 1.0 { h(u) } else { 0.0 });
        let r = symmetry_sides(&restarted, above, self.level, self.horizon, params)?;
        // lhs prices position 3, rhs prices position 2
        Ok(r)
    }
}

struct TerminalFn<F>(F);

impl<F: Fn(&[f64]) -> f64 + Send + Sync> PathFunctional for TerminalFn<F> {
    fn eval(&self, path: &[f64]) -> f64 {
        (self.0)(path)
    }

    fn terminal_only(&self) -> bool {
        true
    }
}

fn terminal_of(map: &ClosedFormMap<f64>, grid: &crate::engine::PathGrid, fate: Fate) -> Result<f64> {
    match fate {
        Fate::Survived => map.eval_f(grid.terminal()),
        Fate::Stopped(_) => Ok(0.0),
        Fate::Killed(_, Side::Below) => map.eval_f(map.lower()),
        Fate::Killed(_, Side::Above) => map.eval_f(map.upper()),
    }
}

/// Whether `W` reaches `ell` no later than the path ends.
fn touched_before(grid: &crate::engine::PathGrid, ell: f64, fate: Fate) -> bool {
    let Some(hit) = grid.first_hit(ell) else {
        return false;
    };
    match fate {
        Fate::Survived => true,
        Fate::Stopped(end) | Fate::Killed(end, _) => hit.step < end.step || (hit.step == end.step && hit.time <= end.time),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointPrice {
    /// `term1.mean + x0·term2.mean`; the standard error is that of the per-path sum.
    pub total: PriceEstimate,
    /// Dollar leg on `{τ > S∧T}`.
    pub term1: PriceEstimate,
    /// Euro leg on `{τ ≤ S∧T}` weighted by `exp(Cτ/2)·ĝ(W_τ)`.
    pub term2: PriceEstimate,
    pub hyperinflation_paths: usize,
}

/// Minimal joint replicating price of `(D$, D€)`, both terms on the same paths.
pub fn joint_price(spec: &PolynomialSpec<f64>, claim: &ClaimSpec, params: &McParams) -> Result<JointPrice> {
    claim.validate()?;
    let euro = claim
        .euro
        .as_deref()
        .ok_or_else(|| QnvError::InvalidParams("joint price needs a Euro leg".into()))?;
    let dollar = claim.dollar.as_ref();
    let model = DualModel::new(spec)?;
    let map = &model.primal;
    let levels = Levels::of(map, true);
    let x0 = spec.y0;
    let c = map.c_const();

    let per_path = run_paths(params, claim.horizon, 0, |i, grid| {
        let fate = fate_for(grid, &levels);
        match fate {
            Fate::Killed(hit, side) => {
                let boundary = match side {
                    Side::Below => map.lower(),
                    Side::Above => map.upper(),
                };
                let weight = (0.5 * c * hit.time).exp() * model.dual.eval_g(boundary)?;
                let v2 = weighted_value(eval_functional(euro, map, grid, fate)?, weight, i)?;
                Ok((0.0, v2, true))
            }
            _ => {
                let weight = fate_weight(map, grid, fate, levels.stop)?;
                let hd = eval_functional(dollar, map, grid, fate)?;
                if let Fate::Survived = fate {
                    let xt = map.eval_f(grid.terminal())?;
                    if xt > 0.0 && xt.is_finite() {
                        let he = eval_functional(euro, map, grid, fate)?;
                        let implied = hd / xt;
                        if (he - implied).abs() > 1e-9 * he.abs().max(implied.abs()).max(1.0) {
                            return Err(QnvError::LegInconsistency { path: i, euro: he, implied });
                        }
                    }
                }
                Ok((weighted_value(hd, weight, i)?, 0.0, false))
            }
        }
    })?;

    let v1: Vec<f64> = per_path.iter().map(|p| p.0).collect();
    let v2: Vec<f64> = per_path.iter().map(|p| p.1).collect();
    let both: Vec<f64> = per_path.iter().map(|p| p.0 + x0 * p.1).collect();
    let term1 = PriceEstimate::from_samples(&v1, params.seed, Estimator::TransformedBm);
    let term2 = PriceEstimate::from_samples(&v2, params.seed, Estimator::TransformedBm);
    let pooled = PriceEstimate::from_samples(&both, params.seed, Estimator::TransformedBm);
    let total = PriceEstimate::from_moments(
        term1.mean + x0 * term2.mean,
        pooled.stderr,
        per_path.len(),
        params.seed,
        Estimator::TransformedBm,
    );
    Ok(JointPrice { total, term1, term2, hyperinflation_paths: per_path.iter().filter(|p| p.2).count() })
}
