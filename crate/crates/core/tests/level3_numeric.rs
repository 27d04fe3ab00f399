// Published phases are compared as printed.
#![allow(clippy::approx_constant)]

use std::f64::consts::PI;

use ctqd_core::design::level3::*;

fn width<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let mut w = 0.0;
    for i in 1..=1000 {
        let d = i as f64 * 1e-3;
        if f(d) > tol || f(-d) > tol {
            break;
        }
        w = d;
    }
    w
}

fn cumulative(first: f64, diffs: &[f64]) -> Vec<f64> {
    let mut out = vec![first];
    for d in diffs {
        out.push(out.last().unwrap() + d);
    }
    out
}

#[test]
fn pc_numeric_nulls_orders_and_widens() {
    let m = RotationModel::REFERENCE;
    let mut last = 0.0;
    for n3 in [3, 5, 7] {
        let s = level3_pc_numeric(0.5, n3, 42).unwrap();
        let d = m.population_derivatives(&s.thetas, pc_orders(n3));
        assert!((d[0] - 0.5).abs() < 1e-6, "n3 {n3}: {d:?}");
        assert!(d[1..].iter().all(|v| v.abs() < 1e-6), "n3 {n3}: {d:?}");
        let w = width(|x| (m.population(&s.thetas, x) - 0.5).abs(), 1e-3);
        println!("PC n3 {n3} diffs {:?} width {w}", s.differences);
        assert!(w > last, "n3 {n3}: width {w} <= {last}");
        last = w;
    }
}

#[test]
fn fc_numeric_meets_target() {
    let m = RotationModel::REFERENCE;
    let t = TargetState::default();
    for n3 in [3, 5, 7] {
        let s = level3_fc_numeric(&t, n3, 42).unwrap();
        let f = m.fidelity_coefficients(&s.thetas, &t, fc_orders(n3));
        println!("FC n3 {n3} thetas {:?} f {f:?}", s.thetas);
        assert!((f[0] - 1.0).abs() < 1e-6 && f[1].abs() < 1e-6);
    }
}

#[test]
fn published_rows_pass() {
    let m = RotationModel::REFERENCE;
    let t = TargetState::default();
    for diffs in [vec![2.3562, 0.0], vec![1.5708, 2.3562, -1.5708, -1.5708], vec![3.1416, -2.3886, 0.0097, 2.6366, -0.0096, -1.8235]] {
        let f = m.fidelity_coefficients(&cumulative(0.0, &diffs), &t, 2);
        println!("FC row {diffs:?}: {f:?}");
        assert!((f[0] - 1.0).abs() < 1e-4 && f[1].abs() < 1e-4);
    }
    for diffs in [vec![4.0 * PI / 5.0, 0.0, 2.0 * PI / 5.0, 0.0], vec![6.0 * PI / 7.0, 0.0, 4.0 * PI / 7.0, 0.0, 2.0 * PI / 7.0, 0.0]] {
        let n3 = diffs.len() + 1;
        let d = m.population_derivatives(&cumulative(0.0, &diffs), pc_orders(n3));
        assert!(d[1..].iter().all(|v| v.abs() < 1e-5), "{d:?}");
    }
}

#[test]
fn pc_flatter_in_population() {
    let m = RotationModel::REFERENCE;
    let t = TargetState::default();
    for n3 in [3, 5, 7] {
        let pc = level3_pc_numeric(0.5, n3, 42).unwrap();
        let s = phase_alignment(&m, &pc.thetas, t.chi);
        let pc_th: Vec<f64> = pc.thetas.iter().map(|x| x + s).collect();
        let fc = level3_fc_numeric(&t, n3, 42).unwrap();
        let wp = width(|x| 1.0 - m.fidelity(&pc_th, &t, x), 1e-3);
        let wf = width(|x| 1.0 - m.fidelity(&fc.thetas, &t, x), 1e-3);
        let pp = width(|x| (m.population(&pc_th, x) - 0.5).abs(), 1e-3);
        let pf = width(|x| (m.population(&fc.thetas, x) - 0.5).abs(), 1e-3);
        println!("n3 {n3}: F width pc {wp} fc {wf}; P width pc {pp} fc {pf}");
        assert!(pp > pf, "n3 {n3}: P width pc {pp} fc {pf}");
    }
}
