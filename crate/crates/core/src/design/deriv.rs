//! Central finite differences with Richardson extrapolation.

use alloc::vec::Vec;

use crate::error::PrecisionWarning;
use crate::linalg::C64;

/// Steps for orders one to six, in units of the inverse oscillation rate.
/// Truncation after extrapolation depends only on `scale * h`, while
/// roundoff relative to the `k`-th derivative grows like `(scale h)^-k`, so
/// a fixed `scale * h` per order keeps the relative error below `1e-7`.
const STEPS: [f64; 6] = [0.1, 0.1, 0.2, 0.25, 0.3, 0.35];

/// Highest order whose estimate we trust at double precision.
pub const MAX_RELIABLE_ORDER: usize = 6;

fn binomial(n: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Symmetric `k`-th difference, second-order accurate in `h`.
fn central<F: Fn(f64) -> C64>(f: &F, x0: f64, k: usize, h: f64) -> C64 {
    if k == 0 {
        return f(x0);
    }
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let x = x0 + (k as f64 / 2.0 - j as f64) * h;
        acc += f(x) * (sign * binomial(k, j));
    }
    acc / libm::pow(h, k as f64)
}

/// Step used for order `k` on a function varying like `exp(i scale x)`.
pub fn step_for_order(k: usize, scale: f64) -> f64 {
    let h = STEPS[k.clamp(1, STEPS.len()) - 1] * libm::pow(1.5, k.saturating_sub(STEPS.len()) as f64);
    h / scale.max(1.0)
}

/// `k`-th derivative at `x0` from steps `h`, `h/2`, `h/4` and two
/// Richardson sweeps (error `O(h^6)`).
pub fn derivative<F: Fn(f64) -> C64>(f: &F, x0: f64, k: usize, h: f64) -> C64 {
    if k == 0 {
        return f(x0);
    }
    let d0 = central(f, x0, k, h);
    let d1 = central(f, x0, k, h / 2.0);
    let d2 = central(f, x0, k, h / 4.0);
    let r0 = (d1 * 4.0 - d0) / 3.0;
    let r1 = (d2 * 4.0 - d1) / 3.0;
    (r1 * 16.0 - r0) / 15.0
}

/// Derivatives of orders `0..=max_order` at `x0`, with a warning once the
/// high orders become noise dominated. `scale` is the largest rate at which
/// `f` oscillates; steps shrink in proportion above one.
pub fn derivatives<F: Fn(f64) -> C64>(f: &F, x0: f64, max_order: usize, scale: f64) -> (Vec<C64>, Option<PrecisionWarning>) {
    let out = (0..=max_order).map(|k| derivative(f, x0, k, step_for_order(k, scale))).collect();
    let warn = (max_order > MAX_RELIABLE_ORDER).then_some(PrecisionWarning { max_reliable: MAX_RELIABLE_ORDER });
    (out, warn)
}

/// Real-valued convenience wrapper.
pub fn derivatives_real<F: Fn(f64) -> f64>(f: &F, x0: f64, max_order: usize, scale: f64) -> (Vec<f64>, Option<PrecisionWarning>) {
    let g = |x: f64| C64::new(f(x), 0.0);
    let (d, w) = derivatives(&g, x0, max_order, scale);
    (d.into_iter().map(|z| z.re).collect(), w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_derivatives() {
        // d^k/dx^k e^{i a x} = (i a)^k
        let a = 3.7;
        let f = |x: f64| C64::new(libm::cos(a * x), libm::sin(a * x));
        let (d, w) = derivatives(&f, 0.0, 6, a);
        assert!(w.is_none());
        let mut expect = C64::new(1.0, 0.0);
        for (k, dk) in d.iter().enumerate() {
            let tol = 1e-7 * libm::pow(a, k as f64).max(1.0);
            assert!((dk - expect).norm() < tol, "order {k}: {dk} vs {expect}");
            expect *= C64::new(0.0, a);
        }
    }

    #[test]
    fn polynomial_exact() {
        let f = |x: f64| C64::new(2.0 + 3.0 * x - x * x * x, 0.0);
        let (d, _) = derivatives(&f, 0.5, 3, 1.0);
        assert!((d[1].re - (3.0 - 0.75)).abs() < 1e-8);
        assert!((d[2].re + 3.0).abs() < 1e-7);
        assert!((d[3].re + 6.0).abs() < 1e-6);
    }

    #[test]
    fn accuracy_holds_across_rates() {
        for a in [0.3, 1.0, 4.0, 16.0, 40.0] {
            let f = |x: f64| C64::new(libm::cos(a * x), libm::sin(a * x));
            let (d, _) = derivatives(&f, 0.2, 6, a);
            for (k, dk) in d.iter().enumerate() {
                let expect = C64::new(0.0, a).powu(k as u32) * f(0.2);
                let tol = 1e-7 * libm::pow(a, k as f64).max(1.0);
                assert!((dk - expect).norm() < tol, "rate {a} order {k}: {dk} vs {expect}");
            }
        }
    }

    #[test]
    fn warns_above_order_six() {
        let f = |x: f64| C64::new(x, 0.0);
        assert!(derivatives(&f, 0.0, 7, 1.0).1.is_some());
        assert!(derivatives(&f, 0.0, 6, 1.0).1.is_none());
    }
}
