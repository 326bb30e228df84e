mod common;

use proptest::prelude::*;
use qnv_core::martingality::{defect_inverse_bessel, x_true_martingale_via_dual, MartingalityReason};
use qnv_core::{classify_martingality, martingale_defect, price_stopped, price_unstopped, ClaimSpec, McParams, Payoff, Spec};

const FIXTURES: [((f64, f64, f64, f64), bool, bool); 6] = [
    ((0.0, 1.0, 0.0, 1.0), true, true),
    ((1.0, -3.0, 2.0, 1.5), true, true),
    ((1.0, 0.0, 0.0, 1.0), false, false),
    ((1.0, 0.0, 1.0, 1.0), false, false),
    ((1.0, -3.0, 2.0, 3.0), false, false),
    ((1.0, -3.0, 2.0, 0.5), false, true),
];

#[test]
fn fixture_suite() {
    for ((e1, e2, e3, y0), y, x) in FIXTURES {
        let s = Spec::new(e1, e2, e3, y0).unwrap();
        let r = classify_martingality(&s).unwrap();
        assert_eq!((r.y_is_true_martingale, r.x_is_true_martingale), (y, x), "{s:?}");
        assert_eq!(x_true_martingale_via_dual(&s).unwrap(), x, "{s:?}");
    }
    let r = classify_martingality(&Spec::new(1.0, 0.0, 0.0, 1.0).unwrap()).unwrap();
    assert_eq!(r.verdict(), "strict local (Y and X)");
    assert_eq!(r.reason, MartingalityReason::RootsBelowStart);
}

#[test]
fn stopped_mean_tracks_classification() {
    let params = McParams::new(20_000, 256, 1);
    for ((e1, e2, e3, y0), _, x) in FIXTURES {
        let s = Spec::new(e1, e2, e3, y0).unwrap();
        let e = price_stopped(&s, &ClaimSpec::new(1.0, Payoff::Forward), &params).unwrap();
        if x {
            assert!(e.within(y0, 3.0) || (e.mean - y0).abs() < 1e-12, "{s:?}: {e:?}");
        } else {
            assert!(e.mean < y0 - 3.0 * e.stderr, "{s:?}: {e:?}");
        }
    }
}

#[test]
fn defect_matches_simulation() {
    let s = Spec::new(1.0, -3.0, 2.0, 3.0).unwrap();
    let e = price_unstopped(&s, &ClaimSpec::new(1.0, Payoff::Forward), &McParams::new(50_000, 512, 2)).unwrap();
    let d = martingale_defect(&s, 1.0).unwrap();
    assert!(e.within(3.0 - d, 3.0), "{e:?} vs {}", 3.0 - d);
    assert_eq!(classify_martingality(&s).unwrap().defect_at(1.0), Some(d));
}

#[test]
fn inverse_bessel_defect_against_density() {
    let target = 1.0 - common::inverse_bessel_mean(1.0, 1.0);
    assert!((defect_inverse_bessel(1.0, 1.0) - target).abs() < 1e-9);
    // Y = 1/R with R a Bessel(3) process from 1/y0
    let target = 2.0 - common::inverse_bessel_mean(0.5, 0.5);
    assert!((defect_inverse_bessel(2.0, 0.5) - target).abs() < 1e-9);
}

fn coefficient() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), (-16i32..=16).prop_map(|k| k as f64 / 4.0)]
}

proptest! {
    #[test]
    fn dual_root_criterion_agrees(e1 in coefficient(), e2 in coefficient(), e3 in coefficient(), y0 in 1i32..=24) {
        let s = Spec::new(e1, e2, e3, y0 as f64 / 8.0).unwrap();
        let r = classify_martingality(&s).unwrap();
        prop_assert_eq!(r.x_is_true_martingale, x_true_martingale_via_dual(&s).unwrap());
        prop_assert!(r.x_is_true_martingale || !r.y_is_true_martingale);
    }
}
