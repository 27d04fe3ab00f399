#![allow(dead_code)]

use ctqd_core::linalg::{Mat2, Mat3, Matrix, State, C64};
use ctqd_core::pulses::PulseShape;
use ctqd_core::{ErrorModel, SpPair};
use proptest::prelude::*;

pub fn c64() -> impl Strategy<Value = C64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| C64::new(re, im))
}

pub fn hermitian<const N: usize>() -> impl Strategy<Value = Matrix<N>> {
    proptest::collection::vec(c64(), N * N).prop_map(|v| {
        let mut m = Matrix::<N>::zeros();
        for i in 0..N {
            for j in 0..N {
                m[(i, j)] = v[i * N + j];
            }
        }
        (m + m.dagger()).scale_re(0.5)
    })
}

pub fn hermitian2() -> impl Strategy<Value = Mat2> {
    hermitian::<2>()
}

pub fn hermitian3() -> impl Strategy<Value = Mat3> {
    hermitian::<3>()
}

pub fn state<const N: usize>() -> impl Strategy<Value = State<N>> {
    proptest::collection::vec(c64(), N).prop_filter("nonzero", |v| v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3).prop_map(|v| {
        let mut a = [C64::new(0.0, 0.0); N];
        a.copy_from_slice(&v);
        State::new(a).normalized()
    })
}

/// One of the catalog shapes with parameters near the tuned ones.
pub fn shape() -> impl Strategy<Value = PulseShape> {
    prop_oneof![
        (0.5..3.0f64).prop_map(|a| PulseShape::gaussian(a, 1.0)),
        (1.0..4.0f64, -1.0..1.0f64, 0.5..1.5f64).prop_map(|(a, ph, t)| PulseShape::sinusoidal(a, ph, t)),
        (1.0..4.0f64).prop_map(|a| PulseShape::sawtooth(a, 1.0)),
        (1.0..4.0f64, 0.2..0.8f64).prop_map(|(a, p)| PulseShape::triangle(a, p, 1.0)),
        (1.0..4.0f64, 0.1..0.3f64, 0.0..0.3f64).prop_map(|(a, r, p)| PulseShape::trapezoidal(a, r, p, 1.0)),
    ]
}

pub fn pair() -> impl Strategy<Value = SpPair> {
    (shape(), 0.2..3.0f64, -1.0..1.0f64, -4.0..4.0f64, -4.0..4.0f64).prop_map(|(s, ratio, det, ts, tp)| SpPair::new(s, ratio, det, ts, tp))
}

pub fn error_model() -> impl Strategy<Value = ErrorModel> {
    (-0.5..0.5f64, -0.5..0.5f64, -0.5..0.5f64, -0.3..0.3f64, -0.5..0.5f64).prop_map(|(s, p, d, t, k)| ErrorModel {
        d_omega_s: s,
        d_omega_p: p,
        d_delta: d,
        d_duration: t,
        stark: k,
    })
}
