mod common;

use common::{c64, hermitian2, hermitian3, state};
use ctqd_core::linalg::{bloch_rotation, compose, fidelity, mat_exp, wrap_phase, BlochAxis, Mat2, State2, State3};
use proptest::prelude::*;

proptest! {
    #[test]
    fn exponential_of_hermitian_is_unitary(h in hermitian3(), t in -10.0..10.0f64) {
        let u = mat_exp(&h, t).unwrap();
        prop_assert!(u.unitarity_error() < 1e-12, "{}", u.unitarity_error());
    }

    #[test]
    fn exponential_of_hermitian_2x2_is_unitary(h in hermitian2(), t in -10.0..10.0f64) {
        prop_assert!(mat_exp(&h, t).unwrap().unitarity_error() < 1e-12);
    }

    #[test]
    fn group_property(h in hermitian3(), t1 in -3.0..3.0f64, t2 in -3.0..3.0f64) {
        let whole = mat_exp(&h, t1 + t2).unwrap();
        let split = compose(&mat_exp(&h, t2).unwrap(), &mat_exp(&h, t1).unwrap());
        prop_assert!(whole.max_diff(&split) < 1e-10);
    }

    #[test]
    fn composition_is_associative(a in hermitian3(), b in hermitian3(), c in hermitian3()) {
        let (ua, ub, uc) = (mat_exp(&a, 1.0).unwrap(), mat_exp(&b, 0.7).unwrap(), mat_exp(&c, -0.4).unwrap());
        let left = compose(&compose(&ua, &ub), &uc);
        let right = compose(&ua, &compose(&ub, &uc));
        prop_assert!(left.max_diff(&right) < 1e-12);
        prop_assert!(left.unitarity_error() < 1e-10);
    }

    #[test]
    fn unitaries_preserve_norm(h in hermitian3(), psi in state::<3>(), t in -20.0..20.0f64) {
        let mut out = psi;
        let u = mat_exp(&h, t / 50.0).unwrap();
        for _ in 0..50 {
            out = u.apply(&out);
        }
        prop_assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fidelity_symmetric_and_bounded(a in state::<3>(), b in state::<3>()) {
        let f = fidelity(&a, &b).unwrap();
        let g = fidelity(&b, &a).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!((f - g).abs() < 1e-15);
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_states_rejected(z in c64(), s in 1.01..3.0f64) {
        prop_assume!(z.norm() > 0.1);
        let a = State2::new([z, z]).normalized();
        let mut amps = *a.amps();
        amps[0] *= s;
        prop_assert!(fidelity(&State2::new(amps), &a).is_err());
    }

    #[test]
    fn bloch_axis_normalized(x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64) {
        prop_assume!(x * x + y * y + z * z > 1e-6);
        let n = BlochAxis::from_direction(x, y, z).unwrap();
        let [a, b, c] = n.components();
        prop_assert!((a * a + b * b + c * c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bloch_rotation_matches_exponential(x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64, angle in -7.0..7.0f64) {
        prop_assume!(x * x + y * y + z * z > 1e-6);
        let n = BlochAxis::from_direction(x, y, z).unwrap();
        let r = bloch_rotation(&n, angle);
        let e = mat_exp(&n.sigma(), angle).unwrap();
        prop_assert!(r.max_diff(&e) < 1e-12);
        prop_assert!((r.det() - ctqd_core::C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mixing_axis_reproduces_phase_gate(phi in 0.0..1.5f64, tsp in -3.0..3.0f64, big_phi in -3.0..3.0f64) {
        // |d><d| + e^{i Phi}|b><b| = e^{i Phi / 2} R_n(Phi / 2)
        let (c, s) = (phi.cos(), phi.sin());
        let d = [ctqd_core::C64::from_polar(c, tsp), ctqd_core::C64::new(-s, 0.0)];
        let b = [ctqd_core::C64::new(s, 0.0), ctqd_core::C64::from_polar(c, -tsp)];
        let e = ctqd_core::C64::from_polar(1.0, big_phi);
        let gate = Mat2::from_rows([
            [d[0] * d[0].conj() + e * b[0] * b[0].conj(), d[0] * d[1].conj() + e * b[0] * b[1].conj()],
            [d[1] * d[0].conj() + e * b[1] * b[0].conj(), d[1] * d[1].conj() + e * b[1] * b[1].conj()],
        ]);
        let rot = bloch_rotation(&BlochAxis::from_mixing(phi, tsp), big_phi / 2.0)
            .scale(ctqd_core::C64::from_polar(1.0, big_phi / 2.0));
        prop_assert!(gate.max_diff(&rot) < 1e-12);
    }

    #[test]
    fn wrap_phase_range_and_congruence(x in -100.0..100.0f64) {
        let w = wrap_phase(x);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        let k = (x - w) / (2.0 * std::f64::consts::PI);
        prop_assert!((k - k.round()).abs() < 1e-9);
    }
}

#[test]
fn basis_states_are_orthonormal() {
    for i in 0..3 {
        for j in 0..3 {
            let f = fidelity(&State3::basis(i), &State3::basis(j)).unwrap();
            assert_eq!(f, if i == j { 1.0 } else { 0.0 });
        }
    }
}
