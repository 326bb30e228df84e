//! JSON and CSV rendering. Reals are written with 17 significant digits
//! (`{:.16e}`); non-finite reals become `null`.

use serde::{Serialize, Serializer};

use qnv_core::{PriceEstimate, Spec};

use crate::config::RunConfig;
use crate::error::CliError;

/// A real serialized as `{:.16e}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let n: serde_json::Number = format!("{:.16e}", self.0).parse().map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

impl Real {
    pub fn text(self) -> String {
        if self.0.is_finite() {
            format!("{:.16e}", self.0)
        } else {
            self.0.to_string()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecOut {
    pub e1: Real,
    pub e2: Real,
    pub e3: Real,
    pub y0: Real,
}

impl From<&Spec> for SpecOut {
    fn from(s: &Spec) -> Self {
        Self { e1: Real(s.e1), e2: Real(s.e2), e3: Real(s.e3), y0: Real(s.y0) }
    }
}

impl SpecOut {
    fn text(&self) -> String {
        format!("({},{},{},{})", self.e1.0, self.e2.0, self.e3.0, self.y0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimOut {
    pub payoff: String,
    pub euro: Option<String>,
    pub horizon: Real,
    pub process: &'static str,
}

impl From<&RunConfig> for ClaimOut {
    fn from(c: &RunConfig) -> Self {
        Self {
            payoff: c.payoff.to_string(),
            euro: c.euro.as_ref().map(|e| e.to_string()),
            horizon: Real(c.horizon),
            process: c.process.name(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JointOut {
    pub term1: Real,
    pub term2: Real,
    pub hyperinflation_paths: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateOut {
    pub estimate: Real,
    pub stderr: Real,
    pub ci95: [Real; 2],
    pub n_paths: usize,
    pub seed: u64,
    pub estimator: &'static str,
    pub spec: SpecOut,
    pub claim: ClaimOut,
    pub runtime_ms: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint: Option<JointOut>,
}

impl EstimateOut {
    pub fn new(e: &PriceEstimate, spec: &Spec, cfg: &RunConfig, runtime_ms: Option<f64>) -> Self {
        Self {
            estimate: Real(e.mean),
            stderr: Real(e.stderr),
            ci95: [Real(e.ci95.0), Real(e.ci95.1)],
            n_paths: e.n_paths,
            seed: e.seed,
            estimator: e.estimator.tag(),
            spec: spec.into(),
            claim: cfg.into(),
            runtime_ms: runtime_ms.map(Real),
            joint: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZScore {
    pub a: &'static str,
    pub b: &'static str,
    pub z: Real,
}

#[derive(Debug, Clone, Serialize)]
pub struct PriceReport {
    pub results: Vec<EstimateOut>,
    pub z_scores: Vec<ZScore>,
}

pub fn to_json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Parse(e.to_string()))
}

/// One CSV row per estimate.
pub fn estimates_csv(rows: &[EstimateOut]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    w.write_record([
        "estimator", "estimate", "stderr", "ci95_lo", "ci95_hi", "n_paths", "seed", "spec", "claim", "runtime_ms",
    ])
    .map_err(io)?;
    for r in rows {
        w.write_record([
            r.estimator.to_string(),
            r.estimate.text(),
            r.stderr.text(),
            r.ci95[0].text(),
            r.ci95[1].text(),
            r.n_paths.to_string(),
            r.seed.to_string(),
            r.spec.text(),
            r.claim.payoff.clone(),
            r.runtime_ms.map(|t| t.text()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Two-column `key,value` CSV.
pub fn pairs_csv(rows: &[(String, String)]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    w.write_record(["key", "value"]).map_err(io)?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
