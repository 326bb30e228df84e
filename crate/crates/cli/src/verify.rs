//! Invariant suites run by `qnv verify` on a fixed fixture pack, plus the
//! model block of the config when one is given.

use serde::Serialize;

use qnv_core::engine::quadrature::price_terminal;
use qnv_core::measures::{joint_price, symmetry_check, tau_s_swap_check, DualModel};
use qnv_core::{
    build, classify_martingality, martingality::x_true_martingale_via_dual, price_stopped, price_unstopped,
    ClaimSpec, Map, McParams, Payoff, QnvError, Spec,
};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::Real;

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    /// Largest error relative to its tolerance; at most 1 when passing.
    pub worst: Real,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub seed: u64,
    pub n_paths: usize,
    pub suites: Vec<SuiteResult>,
}

/// One representative per solution branch.
pub fn fixture_pack() -> Vec<Spec> {
    [
        (0.0, 0.0, 1.0, 1.0),
        (0.0, 1.0, 0.0, 1.0),
        (0.0, 1.0, -0.5, 1.0),
        (1.0, 0.0, 0.0, 1.0),
        (-1.0, 2.0, -1.0, 0.5),
        (1.0, -3.0, 2.0, 1.5),
        (1.0, -3.0, 2.0, 3.0),
        (1.0, -3.0, 2.0, 0.5),
        (1.0, 0.0, 1.0, 1.0),
        (-1.0, 1.0, -1.0, 2.0),
        (1.0, -3.0, 2.0, 2.0),
    ]
    .into_iter()
    .map(|(a, b, c, d)| Spec::new(a, b, c, d).expect("fixture specs are valid"))
    .collect()
}

struct Tally {
    name: &'static str,
    checks: usize,
    worst: f64,
    worst_at: String,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self { name, checks: 0, worst: 0.0, worst_at: String::new() }
    }

    /// Records `ratio = error / tolerance`.
    fn record(&mut self, ratio: f64, at: impl FnOnce() -> String) {
        self.checks += 1;
        let r = if ratio.is_nan() { f64::INFINITY } else { ratio };
        if r > self.worst || self.worst_at.is_empty() {
            self.worst = self.worst.max(r);
            self.worst_at = at();
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            passed: self.worst <= 1.0,
            checks: self.checks,
            worst: Real(self.worst),
            detail: self.worst_at,
        }
    }
}

fn window(map: &Map, n: usize) -> Vec<f64> {
    let lo = map.lower().max(-3.0);
    let hi = map.upper().min(3.0);
    let margin = 0.05 * (hi - lo);
    let a = if lo == map.lower() { lo + margin } else { lo };
    let b = if hi == map.upper() { hi - margin } else { hi };
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn ode_residuals(specs: &[Spec]) -> Result<SuiteResult, QnvError> {
    let mut t = Tally::new("ode_residuals");
    for s in specs {
        let map = build(s)?;
        let c = map.c_const();
        let (h1, h2) = (1e-5, 1e-4);
        for x in window(&map, 1000) {
            let f = |v: f64| map.eval_f(v);
            let g = |v: f64| map.eval_g(v);
            let fp = (f(x + h1)? - f(x - h1)?) / (2.0 * h1);
            let ric = (fp - s.eval(f(x)?)).abs() / (1e-6 * (1.0 + fp.abs()));
            t.record(ric, || format!("f' at {x} for {s:?}"));
            let gx = g(x)?;
            let gpp = (g(x + h2)? - 2.0 * gx + g(x - h2)?) / (h2 * h2);
            t.record((gpp + c * gx).abs() / (1e-6 * (1.0 + gx.abs())), || format!("g'' at {x} for {s:?}"));
        }
    }
    Ok(t.finish())
}

fn normalization(specs: &[Spec], params: &McParams) -> Result<SuiteResult, QnvError> {
    let mut t = Tally::new("weight_normalization");
    let one = Payoff::Constant(1.0);
    for s in specs {
        for stopped in [false, true] {
            let q = price_terminal(s, &one, 1.0, stopped)?;
            t.record((q - 1.0).abs() / 1e-12, || format!("quadrature {s:?} stopped={stopped}: {q}"));
            let claim = ClaimSpec::new(1.0, one.clone());
            let e = if stopped { price_stopped(s, &claim, params)? } else { price_unstopped(s, &claim, params)? };
            let ratio = if e.stderr > 0.0 { (e.mean - 1.0).abs() / (3.0 * e.stderr) } else { (e.mean - 1.0).abs() / 1e-12 };
            t.record(ratio, || format!("simulation {s:?} stopped={stopped}: {} ± {}", e.mean, e.stderr));
        }
    }
    Ok(t.finish())
}

fn duality(specs: &[Spec], params: &McParams) -> Result<SuiteResult, QnvError> {
    let mut t = Tally::new("duality");
    let swap_params = McParams { n_paths: params.n_paths.min(10_000), ..*params };
    for s in specs {
        let model = DualModel::new(s)?;
        let rec = model.primal.reciprocal_map()?;
        for w in window(&rec, 1000) {
            let (a, b) = (rec.eval_f(w)?, model.dual.eval_f(w)?);
            t.record((a - b).abs() / (1e-10 * a.abs().max(b.abs()).max(1e-300)), || format!("f̂ at {w} for {s:?}"));
            t.record(model.weight_duality_error(w)? / 1e-10, || format!("ĝ·x0 = g·f at {w} for {s:?}"));
        }
        let r = tau_s_swap_check(s, 1.0, &swap_params)?;
        t.record(if r.mismatches == 0 { 0.0 } else { f64::INFINITY }, || format!("τ/S swap for {s:?}: {} mismatches", r.mismatches));
    }
    Ok(t.finish())
}

fn symmetry(params: &McParams) -> Result<SuiteResult, QnvError> {
    let mut t = Tally::new("symmetry");
    for (e, e2, l) in [(1.0, 0.0, 1.0), (1.0, -1.0, 1.0), (0.0, 1.0, 1.0)] {
        let s = Spec::new(e, e2, e * l * l, l)?;
        let zero_mass = symmetry_check(&s, |u| f64::from(u > 0.0 && u < f64::INFINITY), l, 1.0, params)?;
        t.record(zero_mass.z_score().abs() / 3.0, || format!("E[X_T] = L·Q(X_T>0) for {s:?}: z = {}", zero_mass.z_score()));
        let barrier = symmetry_check(&s, |u| if u > 1.0 { u.min(10.0) } else { 0.0 }, l, 1.0, params)?;
        t.record(barrier.z_score().abs() / 3.0, || format!("barrier identity for {s:?}: z = {}", barrier.z_score()));
    }
    Ok(t.finish())
}

fn joint(params: &McParams) -> Result<SuiteResult, QnvError> {
    let mut t = Tally::new("joint_price");
    let claim = || ClaimSpec::new(1.0, Payoff::Forward).with_euro(Payoff::Constant(1.0));
    let strict = Spec::new(1.0, 0.0, 1.0, 1.0)?;
    let j = joint_price(&strict, &claim(), params)?;
    t.record((j.total.mean - strict.y0).abs() / (3.0 * j.total.stderr), || {
        format!("one Euro costs x0 for {strict:?}: {} ± {}", j.total.mean, j.total.stderr)
    });
    let tame = Spec::new(1.0, -3.0, 2.0, 1.5)?;
    let j = joint_price(&tame, &claim(), params)?;
    let alone = price_stopped(&tame, &ClaimSpec::new(1.0, Payoff::Forward), params)?;
    let gap = (j.total.mean - alone.mean).abs() + j.hyperinflation_paths as f64;
    t.record(gap / 1e-12, || format!("no hyperinflation term for {tame:?}: gap {gap}"));
    Ok(t.finish())
}

fn martingality() -> Result<SuiteResult, QnvError> {
    let mut t = Tally::new("martingality");
    let fixtures = [
        ((0.0, 1.0, 0.0, 1.0), true, true),
        ((1.0, -3.0, 2.0, 1.5), true, true),
        ((1.0, 0.0, 0.0, 1.0), false, false),
        ((1.0, 0.0, 1.0, 1.0), false, false),
        ((1.0, -3.0, 2.0, 3.0), false, false),
        ((1.0, -3.0, 2.0, 0.5), false, true),
    ];
    for ((a, b, c, d), y, x) in fixtures {
        let s = Spec::new(a, b, c, d)?;
        let r = classify_martingality(&s)?;
        let ok = r.y_is_true_martingale == y && r.x_is_true_martingale == x && x_true_martingale_via_dual(&s)? == x;
        t.record(if ok { 0.0 } else { f64::INFINITY }, || format!("{s:?}: {}", r.verdict()));
    }
    Ok(t.finish())
}

pub fn verify_report(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    let mut specs = fixture_pack();
    if cfg.model.is_some() {
        specs.push(cfg.spec()?);
    }
    let params = McParams::new(cfg.n_paths, qnv_core::engine::default_steps(1.0), cfg.seed);
    let params = match cfg.budget {
        Some(b) => params.budget(b),
        None => params,
    };
    let with_f0: Vec<Spec> = specs.iter().copied().filter(|s| !s.is_at_root()).collect();
    let suites = vec![
        ode_residuals(&specs)?,
        normalization(&specs, &params)?,
        duality(&with_f0, &params)?,
        symmetry(&params)?,
        joint(&params)?,
        martingality()?,
    ];
    Ok(VerifyReport { passed: suites.iter().all(|s| s.passed), seed: cfg.seed, n_paths: cfg.n_paths, suites })
}
