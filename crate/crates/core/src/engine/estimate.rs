use std::fmt;

/// Which estimator produced a [`PriceEstimate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Estimator {
    TransformedBm,
    Euler,
    GbmDual,
    Quadrature,
}

impl Estimator {
    pub fn tag(self) -> &'static str {
        match self {
            Self::TransformedBm => "transformed-BM",
            Self::Euler => "euler",
            Self::GbmDual => "gbm-dual",
            Self::Quadrature => "quadrature",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub n_paths: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl PriceEstimate {
    /// Sample mean and standard error of per-path values, summed pairwise in
    /// path order so the result does not depend on how paths were scheduled.
    pub fn from_samples(values: &[f64], seed: u64, estimator: Estimator) -> Self {
        let n = values.len();
        let mean = pairwise_sum(values) / n as f64;
        let var = if n > 1 {
            let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            pairwise_sum(&dev) / (n - 1) as f64
        } else {
            0.0
        };
        Self::from_moments(mean, (var / n as f64).sqrt(), n, seed, estimator)
    }

    pub fn from_moments(mean: f64, stderr: f64, n_paths: usize, seed: u64, estimator: Estimator) -> Self {
        Self {
            mean,
            stderr,
            ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr),
            n_paths,
            seed,
            estimator,
        }
    }

    /// `(self - other)/√(se₁² + se₂²)`; assumes independent estimates.
    pub fn z_score(&self, other: &PriceEstimate) -> f64 {
        let se = self.stderr.hypot(other.stderr);
        if se == 0.0 {
            if self.mean == other.mean {
                0.0
            } else {
                f64::INFINITY.copysign(self.mean - other.mean)
            }
        } else {
            (self.mean - other.mean) / se
        }
    }

    /// `|mean - value| ≤ k·stderr`, with exact equality accepted at zero error.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

/// Pairwise (cascade) summation with a fixed split pattern.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
