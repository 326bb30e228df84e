mod common;

use common::{random_specs, BRANCHES};
use proptest::prelude::*;
use qnv_core::{build, dual_polynomial, Map, SolutionCase, Spec};

/// Grid of `n` points inside the domain, kept 5% of the window away from
/// finite boundaries and clipped to `[-3, 3]`.
fn interior_grid(map: &Map, n: usize) -> Vec<f64> {
    let lo = map.lower().max(-3.0);
    let hi = map.upper().min(3.0);
    let margin = 0.05 * (hi - lo);
    let a = if lo == map.lower() { lo + margin } else { lo };
    let b = if hi == map.upper() { hi - margin } else { hi };
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn poly(s: &Spec, z: f64) -> f64 {
    s.e1 * z * z + s.e2 * z + s.e3
}

#[test]
fn riccati_and_g_laws_by_finite_differences() {
    let specs = random_specs(11, 210);
    let mut seen = std::collections::HashSet::new();
    for (branch, spec) in specs {
        let map = build(&spec).unwrap();
        seen.insert(map.case());
        let c = spec.e1 * spec.e3 - spec.e2 * spec.e2 / 4.0;
        let f = |x: f64| map.eval_f(x).unwrap();
        let g = |x: f64| map.eval_g(x).unwrap();
        let (h1, h2) = (1e-5, 1e-4);
        let mut sign = 0.0;
        for x in interior_grid(&map, 1000) {
            let fp = (f(x + h1) - f(x - h1)) / (2.0 * h1);
            let resid = (fp - poly(&spec, f(x))).abs();
            assert!(resid <= 1e-6 * (1.0 + fp.abs()), "{branch} {spec:?} x={x}: f' {fp} vs P(f) {}", poly(&spec, f(x)));

            let gpp = (g(x + h2) - 2.0 * g(x) + g(x - h2)) / (h2 * h2);
            let gv = g(x);
            assert!((gpp + c * gv).abs() <= 1e-6 * (1.0 + gv.abs()), "{branch} {spec:?} x={x}: g'' {gpp} vs -Cg {}", -c * gv);

            let mu = map.eval_mu(x).unwrap();
            assert_eq!(mu, spec.e1 * f(x) + spec.e2 / 2.0);

            if fp != 0.0 {
                if sign == 0.0 {
                    sign = fp.signum();
                }
                assert_eq!(fp.signum(), sign, "{branch} {spec:?}: f not monotone at {x}");
            }
        }
    }
    for case in [
        SolutionCase::Constant,
        SolutionCase::Linear,
        SolutionCase::Exponential,
        SolutionCase::Rational,
        SolutionCase::Tanh,
        SolutionCase::Coth,
        SolutionCase::Tan,
    ] {
        assert!(seen.contains(&case), "branch {case:?} not covered");
    }
    assert_eq!(BRANCHES.len(), 7);
}

#[test]
fn reciprocal_map_equals_dual_build() {
    for (branch, spec) in random_specs(12, 210) {
        if spec.y0 == 0.0 || branch == "constant" {
            continue;
        }
        let map = build(&spec).unwrap();
        let rec = map.reciprocal_map().unwrap();
        let dual = build(&dual_polynomial(&spec).unwrap()).unwrap();
        // the reciprocal lives on the part of the dual domain where f̂ ≠ 0
        let slack = 1e-12 * (1.0 + rec.lower().abs().min(rec.upper().abs()));
        assert!(rec.lower() >= dual.lower() - slack && rec.upper() <= dual.upper() + slack, "{branch} {spec:?}");
        for b in [rec.lower(), rec.upper()] {
            if b.is_finite() && (b > dual.lower() + 1e-9 && b < dual.upper() - 1e-9) {
                assert!(dual.eval_f(b).unwrap().abs() < 1e-9, "{branch} {spec:?}: f̂({b}) should vanish");
            }
        }
        for x in interior_grid(&rec, 1000) {
            let (a, b) = (rec.eval_f(x).unwrap(), dual.eval_f(x).unwrap());
            assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300) || a == b, "{branch} {spec:?} f at {x}: {a} {b}");
            let (a, b) = (rec.eval_g(x).unwrap(), dual.eval_g(x).unwrap());
            assert!((a - b).abs() <= 1e-10 * a.abs().max(b.abs()), "{branch} {spec:?} g at {x}: {a} {b}");
            // ĝ·f0 = g·f
            let gf = map.eval_g(x).unwrap() * map.eval_f(x).unwrap();
            assert!((b * spec.y0 - gf).abs() <= 1e-10 * gf.abs(), "{branch} {spec:?} weight at {x}");
        }
    }
}

#[test]
fn boundary_values() {
    for (branch, spec) in random_specs(13, 140) {
        let map = build(&spec).unwrap();
        for b in [map.lower(), map.upper()] {
            if !b.is_finite() {
                continue;
            }
            let fb = map.eval_f(b).unwrap();
            let gb = map.eval_g(b).unwrap();
            assert!(fb.is_infinite(), "{branch} {spec:?}: f({b}) = {fb}");
            assert_eq!(gb, 0.0);
            assert!(map.eval_gf(b).unwrap().is_finite());
        }
    }
}

fn any_spec() -> impl Strategy<Value = Spec> {
    (0usize..7, any::<u64>()).prop_map(|(b, seed)| {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        common::branch_spec(&mut rng, BRANCHES[b])
    })
}

proptest! {
    #[test]
    fn start_values(spec in any_spec()) {
        let map = build(&spec).unwrap();
        prop_assert!((map.eval_f(0.0).unwrap() - spec.y0).abs() <= 1e-14 * (1.0 + spec.y0));
        prop_assert!((map.eval_g(0.0).unwrap() - 1.0).abs() < 1e-14);
        prop_assert!(map.lower() < 0.0 && 0.0 < map.upper());
    }

    #[test]
    fn inverse_round_trip(spec in any_spec(), u in 0.01f64..0.99) {
        let map = build(&spec).unwrap();
        prop_assume!(!map.is_constant());
        let lo = map.lower().max(-4.0);
        let hi = map.upper().min(4.0);
        let x = lo + (hi - lo) * u;
        let y = map.eval_f(x).unwrap();
        prop_assume!(y.is_finite() && y.abs() < 1e8);
        let back = map.invert_f(y).unwrap();
        prop_assert!((back - x).abs() <= 1e-7 * (1.0 + x.abs()), "{} vs {}", back, x);
    }

    #[test]
    fn g_positive_inside(spec in any_spec(), u in 0.0f64..1.0) {
        let map = build(&spec).unwrap();
        let lo = map.lower().max(-4.0);
        let hi = map.upper().min(4.0);
        let x = lo + (hi - lo) * u;
        prop_assume!(x > map.lower() && x < map.upper());
        prop_assert!(map.eval_g(x).unwrap() > 0.0);
    }
}
