mod common;

use common::random_specs;
use qnv_core::engine::quadrature::price_terminal;
use qnv_core::{martingale_defect, price_stopped, ClaimSpec, McParams, Payoff, Spec};

#[test]
fn unit_claim_prices_to_one() {
    for (branch, s) in random_specs(31, 70) {
        for stopped in [false, true] {
            let v = price_terminal(&s, &Payoff::Constant(1.0), 1.0, stopped).unwrap();
            assert!((v - 1.0).abs() <= 1e-12, "{branch} {s:?} stopped={stopped}: {v}");
        }
    }
}

#[test]
fn closed_form_anchors() {
    let bessel = Spec::new(1.0, 0.0, 0.0, 1.0).unwrap();
    let v = price_terminal(&bessel, &Payoff::Forward, 1.0, true).unwrap();
    assert!((v - common::inverse_bessel_mean(1.0, 1.0)).abs() < 1e-9, "{v}");

    let two_roots = Spec::new(1.0, -3.0, 2.0, 3.0).unwrap();
    let v = price_terminal(&two_roots, &Payoff::Forward, 1.0, false).unwrap();
    assert!((v - (3.0 - martingale_defect(&two_roots, 1.0).unwrap())).abs() < 1e-9, "{v}");
}

#[test]
fn agrees_with_simulation() {
    let params = McParams::new(50_000, 512, 2);
    for s in [Spec::new(1.0, 0.0, 1.0, 1.0).unwrap(), Spec::new(-1.0, 1.0, 2.0, 1.0).unwrap()] {
        for payoff in [Payoff::Call(1.0), Payoff::Digital(0.5), Payoff::CappedCall(0.5, 1.0)] {
            let q = price_terminal(&s, &payoff, 1.0, true).unwrap();
            let mc = price_stopped(&s, &ClaimSpec::new(1.0, payoff.clone()), &params).unwrap();
            assert!(mc.within(q, 3.0), "{s:?} {payoff}: {mc:?} vs {q}");
        }
    }
}

#[test]
fn path_dependent_payoffs_are_refused() {
    let s = Spec::new(1.0, 0.0, 0.0, 1.0).unwrap();
    let barrier = Payoff::BarrierDownIn { level: 0.5, inner: Box::new(Payoff::Forward) };
    assert!(price_terminal(&s, &barrier, 1.0, true).is_err());
}
