use std::time::Instant;

use serde::Serialize;

use qnv_core::engine::quadrature::price_terminal;
use qnv_core::martingality::defect_inverse_bessel;
use qnv_core::measures::joint_price;
use qnv_core::{
    build, classify, classify_martingality, euler_price, gbm_price, martingale_defect, price_stopped,
    price_unstopped, ClaimSpec, Estimator, EulerParams, McParams, PathFunctional, Payoff, PriceEstimate, RootProfile,
    Spec,
};

use crate::config::{EstimatorChoice, Format, Process, RunConfig};
use crate::error::CliError;
use crate::output::{self, EstimateOut, JointOut, PriceReport, Real, SpecOut, ZScore};

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyOut {
    pub summary: String,
    pub spec: SpecOut,
    pub profile: String,
    pub c_const: Real,
    pub mu0: Real,
    pub shift: Option<Real>,
    pub branch: String,
    pub lower: Real,
    pub upper: Real,
    pub zero_level: Option<Real>,
    pub y_true_martingale: bool,
    pub x_true_martingale: bool,
    pub reason: String,
}

impl ClassifyOut {
    fn pairs(&self) -> Vec<(String, String)> {
        let opt = |v: Option<Real>| v.map_or("none".to_string(), |r| r.0.to_string());
        vec![
            ("summary".into(), self.summary.clone()),
            ("profile".into(), self.profile.clone()),
            ("c_const".into(), self.c_const.0.to_string()),
            ("mu0".into(), self.mu0.0.to_string()),
            ("shift".into(), opt(self.shift)),
            ("branch".into(), self.branch.clone()),
            ("lower".into(), self.lower.0.to_string()),
            ("upper".into(), self.upper.0.to_string()),
            ("zero_level".into(), opt(self.zero_level)),
            ("y_true_martingale".into(), self.y_true_martingale.to_string()),
            ("x_true_martingale".into(), self.x_true_martingale.to_string()),
            ("reason".into(), self.reason.clone()),
        ]
    }
}

pub fn classify_report(spec: &Spec) -> Result<ClassifyOut, CliError> {
    let cls = classify(spec)?;
    let report = classify_martingality(spec)?;
    let map = build(spec)?;
    Ok(ClassifyOut {
        summary: format!("{}; {}", cls.profile, report.verdict()),
        spec: spec.into(),
        profile: cls.profile.to_string(),
        c_const: Real(map.c_const()),
        mu0: Real(map.mu0()),
        shift: map.shift().map(Real),
        branch: format!("{:?}", map.case()),
        lower: Real(map.lower()),
        upper: Real(map.upper()),
        zero_level: map.zero_level().map(Real),
        y_true_martingale: report.y_is_true_martingale,
        x_true_martingale: report.x_is_true_martingale,
        reason: report.reason.to_string(),
    })
}

/// `classify`: text unless a format was asked for.
pub fn cmd_classify(cfg: &RunConfig, format: Option<Format>) -> Result<String, CliError> {
    let out = classify_report(&cfg.spec()?)?;
    match format {
        Some(Format::Json) => output::to_json(&out),
        Some(Format::Csv) => output::pairs_csv(&out.pairs()),
        None => {
            let mut s = format!("{}\n", out.summary);
            for (k, v) in out.pairs().into_iter().skip(1) {
                s.push_str(&format!("{k}: {v}\n"));
            }
            Ok(s)
        }
    }
}

fn mc_params(cfg: &RunConfig) -> McParams {
    let p = McParams::new(cfg.n_paths, cfg.n_steps(), cfg.seed);
    match cfg.budget {
        Some(b) => p.budget(b),
        None => p,
    }
}

fn claim(cfg: &RunConfig) -> ClaimSpec {
    let c = ClaimSpec::new(cfg.horizon, cfg.payoff.clone());
    match &cfg.euro {
        Some(e) => c.with_euro(e.clone()),
        None => c,
    }
}

/// Whether the GBM representation covers the requested process: always for
/// `Y`, and for `X` when a root in `[0, y0]` keeps `Y` away from zero.
fn gbm_applies(spec: &Spec, process: Process) -> bool {
    let Ok(cls) = classify(spec) else {
        return false;
    };
    if cls.at_root || !matches!(cls.profile, RootProfile::TwoRealRoots { .. }) {
        return false;
    }
    process == Process::Unstopped || spec.real_roots().into_iter().any(|r| r >= 0.0 && r <= spec.y0)
}

fn run_one(
    which: EstimatorChoice,
    spec: &Spec,
    cfg: &RunConfig,
) -> Result<(PriceEstimate, Option<JointOut>), CliError> {
    let stopped = cfg.process == Process::Stopped;
    if cfg.euro.is_some() && which != EstimatorChoice::Transform {
        return Err(CliError::Parse(format!("claim.euro is priced by the transform estimator only, not {}", which.name())));
    }
    let params = mc_params(cfg);
    Ok(match which {
        EstimatorChoice::Transform => {
            if cfg.euro.is_some() {
                if !stopped {
                    return Err(CliError::Parse("a two-leg claim is written on the stopped process".into()));
                }
                let j = joint_price(spec, &claim(cfg), &params)?;
                let extra = JointOut {
                    term1: Real(j.term1.mean),
                    term2: Real(j.term2.mean),
                    hyperinflation_paths: j.hyperinflation_paths,
                };
                (j.total, Some(extra))
            } else if stopped {
                (price_stopped(spec, &claim(cfg), &params)?, None)
            } else {
                (price_unstopped(spec, &claim(cfg), &params)?, None)
            }
        }
        EstimatorChoice::Euler => {
            let mut p = EulerParams::new(cfg.dt, cfg.n_paths, cfg.seed, stopped).n_obs(cfg.n_steps());
            if let Some(b) = cfg.budget {
                p = p.budget(b);
            }
            (euler_price(spec, &claim(cfg), &p)?.estimate, None)
        }
        EstimatorChoice::GbmDual => {
            if !gbm_applies(spec, cfg.process) {
                return Err(CliError::Spec(
                    "gbm-dual needs two real roots (and, for the stopped process, a root in [0, y0])".into(),
                ));
            }
            (gbm_price(spec, &claim(cfg), &params)?, None)
        }
        EstimatorChoice::Quadrature => {
            let v = price_terminal(spec, &cfg.payoff, cfg.horizon, stopped)?;
            (PriceEstimate::from_moments(v, 0.0, 0, cfg.seed, Estimator::Quadrature), None)
        }
        EstimatorChoice::All => unreachable!("expanded by the caller"),
    })
}

pub fn price_report(cfg: &RunConfig, timing: bool) -> Result<PriceReport, CliError> {
    let spec = cfg.spec()?;
    let chosen: Vec<EstimatorChoice> = match cfg.estimator {
        EstimatorChoice::All => {
            let mut v = vec![EstimatorChoice::Transform];
            if cfg.euro.is_none() {
                v.push(EstimatorChoice::Euler);
                if gbm_applies(&spec, cfg.process) {
                    v.push(EstimatorChoice::GbmDual);
                }
                if cfg.payoff.terminal_only() {
                    v.push(EstimatorChoice::Quadrature);
                }
            }
            v
        }
        one => vec![one],
    };
    let mut results = Vec::with_capacity(chosen.len());
    let mut estimates = Vec::with_capacity(chosen.len());
    for which in chosen {
        let start = Instant::now();
        let (est, joint) = run_one(which, &spec, cfg)?;
        let ms = timing.then(|| start.elapsed().as_secs_f64() * 1e3);
        let mut out = EstimateOut::new(&est, &spec, cfg, ms);
        out.joint = joint;
        results.push(out);
        estimates.push(est);
    }
    let mut z_scores = Vec::new();
    for i in 0..estimates.len() {
        for j in i + 1..estimates.len() {
            z_scores.push(ZScore {
                a: estimates[i].estimator.tag(),
                b: estimates[j].estimator.tag(),
                z: Real(estimates[i].z_score(&estimates[j])),
            });
        }
    }
    Ok(PriceReport { results, z_scores })
}

pub fn cmd_price(cfg: &RunConfig, format: Format, timing: bool) -> Result<String, CliError> {
    let report = price_report(cfg, timing)?;
    match format {
        Format::Csv => output::estimates_csv(&report.results),
        Format::Json if cfg.estimator == EstimatorChoice::All => output::to_json(&report),
        Format::Json => output::to_json(&report.results[0]),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectRow {
    pub horizon: Real,
    /// `y0 - E[Y_T]`
    pub defect_y: Real,
    /// `x0 - E[X_T]`
    pub defect_x: Real,
    pub method_y: &'static str,
    pub method_x: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefectReport {
    pub spec: SpecOut,
    pub verdict: String,
    pub rows: Vec<DefectRow>,
}

pub fn defect_report(cfg: &RunConfig) -> Result<DefectReport, CliError> {
    let spec = cfg.spec()?;
    let report = classify_martingality(&spec)?;
    let y0 = spec.y0;
    let mut rows = Vec::with_capacity(cfg.horizons.len());
    for &t in &cfg.horizons {
        let (defect_y, method_y) = if report.y_is_true_martingale {
            (0.0, "classification")
        } else {
            match martingale_defect(&spec, t) {
                Ok(d) => (d, "closed-form"),
                Err(_) => (y0 - price_terminal(&spec, &Payoff::Forward, t, false)?, "quadrature"),
            }
        };
        let bessel = spec.e1 > 0.0 && spec.e2 == 0.0 && spec.e3 == 0.0;
        let (defect_x, method_x) = if bessel {
            // e1·X is the reciprocal of a Bessel(3) process
            (defect_inverse_bessel(spec.e1 * y0, t) / spec.e1, "closed-form")
        } else if report.x_is_true_martingale {
            (0.0, "classification")
        } else {
            (y0 - price_terminal(&spec, &Payoff::Forward, t, true)?, "quadrature")
        };
        rows.push(DefectRow { horizon: Real(t), defect_y: Real(defect_y), defect_x: Real(defect_x), method_y, method_x });
    }
    Ok(DefectReport { spec: (&spec).into(), verdict: report.verdict(), rows })
}

pub fn cmd_defect(cfg: &RunConfig, format: Format) -> Result<String, CliError> {
    let r = defect_report(cfg)?;
    match format {
        Format::Json => output::to_json(&r),
        Format::Csv => {
            let mut pairs = vec![("verdict".to_string(), r.verdict.clone())];
            for row in &r.rows {
                let t = row.horizon.0;
                pairs.push((format!("defect_y@{t}"), row.defect_y.text()));
                pairs.push((format!("defect_x@{t}"), row.defect_x.text()));
            }
            output::pairs_csv(&pairs)
        }
    }
}
