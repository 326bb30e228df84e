//! Run configuration: flat `block.key = value` lines, `#` comments.
//!
//! ```text
//! model.e1 = 1
//! model.e2 = 0
//! model.e3 = 0
//! model.y0 = 1
//! claim.payoff = call(1)
//! claim.horizon = 1
//! engine.estimator = all
//! engine.seed = 7
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use qnv_core::{Payoff, Spec};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorChoice {
    Transform,
    Euler,
    GbmDual,
    Quadrature,
    All,
}

impl EstimatorChoice {
    pub fn name(self) -> &'static str {
        match self {
            Self::Transform => "transform",
            Self::Euler => "euler",
            Self::GbmDual => "gbm-dual",
            Self::Quadrature => "quadrature",
            Self::All => "all",
        }
    }
}

impl FromStr for EstimatorChoice {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "transform" => Self::Transform,
            "euler" => Self::Euler,
            "gbm-dual" => Self::GbmDual,
            "quadrature" => Self::Quadrature,
            "all" => Self::All,
            other => return Err(CliError::Parse(format!("unknown estimator '{other}'"))),
        })
    }
}

/// Which process the claim is written on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    /// `X`, absorbed at zero.
    Stopped,
    /// `Y`.
    Unstopped,
}

impl Process {
    pub fn name(self) -> &'static str {
        match self {
            Self::Stopped => "stopped",
            Self::Unstopped => "unstopped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(CliError::Parse(format!("unknown format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Option<[f64; 4]>,
    pub payoff: Payoff,
    pub euro: Option<Payoff>,
    pub horizon: f64,
    pub estimator: EstimatorChoice,
    pub process: Process,
    pub n_paths: usize,
    /// `None`: 512 per unit of horizon.
    pub n_steps: Option<usize>,
    pub dt: f64,
    pub seed: u64,
    pub budget: Option<u128>,
    pub format: Option<Format>,
    pub path: Option<String>,
    pub horizons: Vec<f64>,
}

const KEYS: [&str; 17] = [
    "model.e1",
    "model.e2",
    "model.e3",
    "model.y0",
    "claim.payoff",
    "claim.euro",
    "claim.horizon",
    "engine.estimator",
    "engine.process",
    "engine.n_paths",
    "engine.n_steps",
    "engine.dt",
    "engine.seed",
    "engine.budget",
    "output.format",
    "output.path",
    "defect.horizons",
];

fn number<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Parse(format!("{key}: cannot parse '{v}'")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut kv: BTreeMap<&str, &str> = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Parse(format!("line {}: expected key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(CliError::Parse(format!("line {}: unknown key '{k}'", n + 1)));
            }
            if kv.insert(k, v).is_some() {
                return Err(CliError::Parse(format!("line {}: duplicate key '{k}'", n + 1)));
            }
        }

        let model_keys = ["model.e1", "model.e2", "model.e3", "model.y0"];
        let present = model_keys.iter().filter(|k| kv.contains_key(*k)).count();
        let model = match present {
            0 => None,
            4 => {
                let mut m = [0.0; 4];
                for (slot, k) in m.iter_mut().zip(model_keys) {
                    *slot = number(k, kv[k])?;
                }
                Some(m)
            }
            _ => return Err(CliError::Parse("model block needs all of e1, e2, e3, y0".into())),
        };

        let seed = kv
            .get("engine.seed")
            .ok_or_else(|| CliError::Parse("engine.seed is required".into()))
            .and_then(|v| number("engine.seed", v))?;

        let cfg = RunConfig {
            model,
            payoff: kv.get("claim.payoff").map_or(Ok(Payoff::Forward), |v| parse_payoff(v))?,
            euro: kv.get("claim.euro").map(|v| parse_payoff(v)).transpose()?,
            horizon: kv.get("claim.horizon").map_or(Ok(1.0), |v| number("claim.horizon", v))?,
            estimator: kv.get("engine.estimator").map_or(Ok(EstimatorChoice::Transform), |v| v.parse())?,
            process: match kv.get("engine.process").copied() {
                None | Some("stopped") => Process::Stopped,
                Some("unstopped") => Process::Unstopped,
                Some(other) => return Err(CliError::Parse(format!("engine.process: unknown '{other}'"))),
            },
            n_paths: kv.get("engine.n_paths").map_or(Ok(100_000), |v| number("engine.n_paths", v))?,
            n_steps: kv.get("engine.n_steps").map(|v| number("engine.n_steps", v)).transpose()?,
            dt: kv.get("engine.dt").map_or(Ok(1e-3), |v| number("engine.dt", v))?,
            seed,
            budget: kv.get("engine.budget").map(|v| number("engine.budget", v)).transpose()?,
            format: kv.get("output.format").map(|v| v.parse()).transpose()?,
            path: kv.get("output.path").map(|v| v.to_string()),
            horizons: match kv.get("defect.horizons") {
                None => vec![0.25, 0.5, 1.0, 2.0],
                Some(v) => v.split(',').map(|t| number("defect.horizons", t.trim())).collect::<Result<_, _>>()?,
            },
        };
        if !(cfg.horizon > 0.0 && cfg.horizon.is_finite()) {
            return Err(CliError::Parse(format!("claim.horizon must be positive, got {}", cfg.horizon)));
        }
        if cfg.horizons.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(CliError::Parse("defect.horizons must be positive".into()));
        }
        Ok(cfg)
    }

    /// The model block as a validated spec.
    pub fn spec(&self) -> Result<Spec, CliError> {
        let [e1, e2, e3, y0] = self.model.ok_or_else(|| CliError::Parse("model block is required".into()))?;
        Ok(Spec::new(e1, e2, e3, y0)?)
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps.unwrap_or_else(|| qnv_core::engine::default_steps(self.horizon))
    }

    /// Text that parses back to `self`.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        if let Some([e1, e2, e3, y0]) = self.model {
            let _ = writeln!(s, "model.e1 = {e1}\nmodel.e2 = {e2}\nmodel.e3 = {e3}\nmodel.y0 = {y0}");
        }
        let _ = writeln!(s, "claim.payoff = {}", self.payoff);
        if let Some(e) = &self.euro {
            let _ = writeln!(s, "claim.euro = {e}");
        }
        let _ = writeln!(s, "claim.horizon = {}", self.horizon);
        let _ = writeln!(s, "engine.estimator = {}", self.estimator.name());
        let _ = writeln!(s, "engine.process = {}", self.process.name());
        let _ = writeln!(s, "engine.n_paths = {}", self.n_paths);
        if let Some(n) = self.n_steps {
            let _ = writeln!(s, "engine.n_steps = {n}");
        }
        let _ = writeln!(s, "engine.dt = {}", self.dt);
        let _ = writeln!(s, "engine.seed = {}", self.seed);
        if let Some(b) = self.budget {
            let _ = writeln!(s, "engine.budget = {b}");
        }
        if let Some(f) = self.format {
            let _ = writeln!(s, "output.format = {}", if f == Format::Json { "json" } else { "csv" });
        }
        if let Some(p) = &self.path {
            let _ = writeln!(s, "output.path = {p}");
        }
        let hs: Vec<String> = self.horizons.iter().map(|t| t.to_string()).collect();
        let _ = writeln!(s, "defect.horizons = {}", hs.join(","));
        s
    }
}

/// Parses the payoff grammar, e.g. `call(1.5)`, `capped_call(1,2)`,
/// `barrier_down_in(0.8,forward)`, `table(0:0,2:1;inf=1)`.
pub fn parse_payoff(text: &str) -> Result<Payoff, CliError> {
    let mut p = PayoffParser { s: text.as_bytes(), i: 0, text };
    let out = p.payoff()?;
    p.skip_ws();
    if p.i != p.s.len() {
        return Err(p.err("trailing input"));
    }
    Ok(out)
}

struct PayoffParser<'a> {
    s: &'a [u8],
    i: usize,
    text: &'a str,
}

impl PayoffParser<'_> {
    fn err(&self, what: &str) -> CliError {
        CliError::Parse(format!("payoff '{}': {what} at column {}", self.text, self.i + 1))
    }

    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.i) == Some(&c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), CliError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn ident(&mut self) -> &str {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
            self.i += 1;
        }
        &self.text[start..self.i]
    }

    fn number(&mut self) -> Result<f64, CliError> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len() && !matches!(self.s[self.i], b',' | b')' | b':' | b';') {
            self.i += 1;
        }
        let tok = self.text[start..self.i].trim();
        tok.parse().map_err(|_| self.err(&format!("bad number '{tok}'")))
    }

    fn args(&mut self, n: usize) -> Result<Vec<f64>, CliError> {
        self.expect(b'(')?;
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            if j > 0 {
                self.expect(b',')?;
            }
            out.push(self.number()?);
        }
        self.expect(b')')?;
        Ok(out)
    }

    fn payoff(&mut self) -> Result<Payoff, CliError> {
        let name = self.ident().to_string();
        Ok(match name.as_str() {
            "forward" => Payoff::Forward,
            "inverse_forward" => Payoff::InverseForward,
            "call" => Payoff::Call(self.args(1)?[0]),
            "put" => Payoff::Put(self.args(1)?[0]),
            "digital" => Payoff::Digital(self.args(1)?[0]),
            "constant" => Payoff::Constant(self.args(1)?[0]),
            "capped_call" => {
                let a = self.args(2)?;
                Payoff::CappedCall(a[0], a[1])
            }
            "barrier_down_in" => {
                self.expect(b'(')?;
                let level = self.number()?;
                self.expect(b',')?;
                let inner = self.payoff()?;
                self.expect(b')')?;
                Payoff::BarrierDownIn { level, inner: Box::new(inner) }
            }
            "table" => self.table()?,
            "" => return Err(self.err("expected a payoff name")),
            other => return Err(self.err(&format!("unknown payoff '{other}'"))),
        })
    }

    fn table(&mut self) -> Result<Payoff, CliError> {
        self.expect(b'(')?;
        let mut points = Vec::new();
        loop {
            let x = self.number()?;
            self.expect(b':')?;
            let v = self.number()?;
            points.push((x, v));
            if !self.eat(b',') {
                break;
            }
        }
        let at_infinity = if self.eat(b';') {
            if self.ident() != "inf" {
                return Err(self.err("expected 'inf='"));
            }
            self.expect(b'=')?;
            Some(self.number()?)
        } else {
            None
        };
        self.expect(b')')?;
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) || points.iter().any(|p| !p.0.is_finite()) {
            return Err(self.err("table points must be finite and strictly increasing"));
        }
        Ok(Payoff::Table { points, at_infinity })
    }
}
