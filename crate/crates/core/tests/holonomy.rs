//! Realized loops for arbitrary (theta, phi, gamma) against a holonomy built
//! directly from the bright/dark pair, plus composition identities.

use std::f64::consts::PI;

use hqctd::gates::{realize, GateName, RealizeOptions};
use hqctd::pulse::{DriveBudget, GateSpec};
use hqctd::quantum::{operator_fidelity, CMatrix, Operator, C64};
use proptest::prelude::*;

const BUDGET: DriveBudget = DriveBudget::PeakRabi(2.0 * PI * 1e4);

fn oracle(theta: f64, phi: f64, gamma: f64) -> Operator {
    let (s, c) = (theta / 2.0).sin_cos();
    let b = [C64::new(s, 0.0), -C64::from_polar(c, phi)];
    let d = [-C64::from_polar(c, -phi), C64::new(-s, 0.0)];
    let g = C64::from_polar(1.0, gamma);
    Operator::new(CMatrix::from_fn(2, 2, |i, j| {
        d[i] * d[j].conj() + g * b[i] * b[j].conj()
    }))
    .unwrap()
}

fn block(spec: &GateSpec) -> (CMatrix, f64) {
    let r = realize(spec, &RealizeOptions::default()).unwrap();
    (r.qubit_block, r.leakage)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn arbitrary_loops_match_holonomy(
        theta in 0.0..PI,
        phi in 0.0..2.0 * PI,
        gamma in -PI..PI,
        eta in prop::sample::select(vec![0.0, 1.5, 4.0]),
    ) {
        let (u, leak) = block(&GateSpec::new(theta, phi, gamma, eta, BUDGET).unwrap());
        let f = operator_fidelity(&oracle(theta, phi, gamma), &Operator::new(u).unwrap()).unwrap();
        prop_assert!(f >= 1.0 - 1e-6, "F = {f}");
        prop_assert!(leak <= 1e-6);
    }
}

fn fid(a: &CMatrix, b: &CMatrix) -> f64 {
    operator_fidelity(
        &Operator::new(a.clone()).unwrap(),
        &Operator::new(b.clone()).unwrap(),
    )
    .unwrap()
}

#[test]
fn composed_loops_obey_gate_algebra() {
    let g = |n: GateName| block(&n.spec(4.0, BUDGET).unwrap()).0;
    let (x, h, t, s) = (
        g(GateName::X),
        g(GateName::H),
        g(GateName::T),
        g(GateName::S),
    );
    let id = CMatrix::identity(2, 2);
    let z = CMatrix::from_diagonal(&hqctd::quantum::CVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
    ]));
    assert!(fid(&(&x * &x), &id) >= 1.0 - 1e-6);
    assert!(fid(&(&h * &h), &id) >= 1.0 - 1e-6);
    assert!(fid(&(&t * &t), &s) >= 1.0 - 1e-6);
    assert!(fid(&(&s * &s), &z) >= 1.0 - 1e-6);
    // H X H = Z
    assert!(fid(&(&h * &x * &h), &z) >= 1.0 - 1e-6);
}

#[test]
fn eta_does_not_change_the_ideal_gate() {
    for n in GateName::ALL {
        let (u0, _) = block(&n.spec(0.0, BUDGET).unwrap());
        let (u4, _) = block(&n.spec(4.0, BUDGET).unwrap());
        assert!(fid(&u0, &u4) >= 1.0 - 1e-6, "{n}");
    }
}
