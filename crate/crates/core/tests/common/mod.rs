#![allow(dead_code)]

use qnv_core::Spec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BRANCHES: [&str; 7] = ["linear", "exponential", "rational", "tanh", "coth", "tan", "constant"];

fn dyadic(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.random_range(lo * 8..=hi * 8) as f64 / 8.0
}

fn nonzero(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    loop {
        let v = dyadic(rng, lo, hi);
        if v != 0.0 {
            return v;
        }
    }
}

fn gap(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(1..=16) as f64 / 8.0
}

/// A random spec of the named solution branch, with `y0 > 0`. Coefficients
/// are dyadic so double roots are exact.
pub fn branch_spec(rng: &mut ChaCha8Rng, branch: &str) -> Spec {
    let y0 = rng.random_range(1..=24) as f64 / 8.0;
    let e1 = nonzero(rng, -2, 2);
    let two_roots = |r1: f64, r2: f64| (e1, -e1 * (r1 + r2), e1 * r1 * r2, y0);
    let (e1, e2, e3, y0) = match branch {
        "linear" => (0.0, 0.0, nonzero(rng, -2, 2), y0),
        "exponential" => (0.0, nonzero(rng, -2, 2), dyadic(rng, -2, 2), y0),
        "rational" => {
            let r = loop {
                let r = dyadic(rng, -2, 3);
                if r != y0 {
                    break r;
                }
            };
            (e1, -2.0 * e1 * r, e1 * r * r, y0)
        }
        "tanh" => two_roots(y0 - gap(rng), y0 + gap(rng)),
        "coth" if rng.random_bool(0.5) => {
            let r2 = y0 - gap(rng);
            two_roots(r2 - gap(rng), r2)
        }
        "coth" => {
            let r1 = y0 + gap(rng);
            two_roots(r1, r1 + gap(rng))
        }
        "constant" if rng.random_bool(0.5) => two_roots(y0, y0 + gap(rng)),
        "constant" => two_roots(y0 - gap(rng), y0),
        "tan" => {
            let m = dyadic(rng, -2, 2);
            let q = gap(rng);
            // e1·((z - m)² + q²)
            (e1, -2.0 * e1 * m, e1 * (m * m + q * q), y0)
        }
        other => panic!("unknown branch {other}"),
    };
    Spec::new(e1, e2, e3, y0).unwrap()
}

/// `n` specs cycling through every branch.
pub fn random_specs(seed: u64, n: usize) -> Vec<(&'static str, Spec)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let b = BRANCHES[i % BRANCHES.len()];
            (b, branch_spec(&mut rng, b))
        })
        .collect()
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `E[1/R_T]` for a three-dimensional Bessel process started at `r0`,
/// integrated against its transition density.
pub fn inverse_bessel_mean(r0: f64, t: f64) -> f64 {
    let phi = |x: f64| (-x * x / (2.0 * t)).exp() / (2.0 * std::f64::consts::PI * t).sqrt();
    let density = |r: f64| r / r0 * (phi(r - r0) - phi(r + r0));
    simpson(|r| if r == 0.0 { 0.0 } else { density(r) / r }, 0.0, r0 + 40.0 * t.sqrt(), 200_000)
}
