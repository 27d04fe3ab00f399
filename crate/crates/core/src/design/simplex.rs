//! Nelder-Mead simplex search with seeded random restarts.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Default seed for every randomized designer.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub max_evals: usize,
    /// Stop when the simplex spread in objective falls below this.
    pub f_tol: f64,
    /// Stop when the simplex diameter falls below this.
    pub x_tol: f64,
    /// Edge length of the starting simplex.
    pub initial_step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_evals: 20_000, f_tol: 1e-22, x_tol: 1e-11, initial_step: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

/// Minimizes `f` from `x0` with the adaptive Nelder-Mead coefficients.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult {
    let n = x0.len();
    if n == 0 {
        let value = f(x0);
        return SimplexResult { x: Vec::new(), value, evals: 1 };
    }
    let nf = n as f64;
    let (alpha, gamma) = (1.0, 1.0 + 2.0 / nf);
    let (rho, sigma) = (0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| sanitize(f(p))).collect();
    let mut evals = n + 1;

    let mut order: Vec<usize> = (0..=n).collect();
    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];
        let spread = vals[worst] - vals[best];
        let diam = pts.iter().map(|p| dist(p, &pts[best])).fold(0.0, f64::max);
        if evals >= opts.max_evals || (spread <= opts.f_tol && diam <= opts.x_tol) || diam <= opts.x_tol * 1e-3 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[i]) {
                *c += x / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&pts[worst]).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(alpha);
        let fr = sanitize(f(&xr));
        evals += 1;
        if fr < vals[best] {
            let xe = along(alpha * gamma);
            let fe = sanitize(f(&xe));
            evals += 1;
            if fe < fr {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[worst] {
            let x = along(alpha * rho);
            let v = sanitize(f(&x));
            (x, v)
        } else {
            let x = along(-rho);
            let v = sanitize(f(&x));
            (x, v)
        };
        evals += 1;
        if fc < vals[worst].min(fr) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        let xb = pts[best].clone();
        for &i in &order[1..] {
            let shrunk: Vec<f64> = xb.iter().zip(&pts[i]).map(|(b, x)| b + sigma * (x - b)).collect();
            vals[i] = sanitize(f(&shrunk));
            pts[i] = shrunk;
            evals += 1;
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b))).unwrap_or(0);
    SimplexResult { x: pts[best].clone(), value: vals[best], evals }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| libm::fabs(x - y)).fold(0.0, f64::max)
}

/// Outcome of a multi-start search.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiStartResult {
    pub best: SimplexResult,
    /// Index of the restart that produced `best`.
    pub restart: usize,
    /// Final objective of every restart, in restart order.
    pub values: Vec<f64>,
    /// Whether `best` reached the objective tolerance.
    pub converged: bool,
}

/// Uniform phases in `[-pi, pi)` from a seeded ChaCha stream.
pub fn random_phases(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| ((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64) * 2.0 * PI - PI).collect()
}

/// Runs `restarts` simplex searches from seeded random phase vectors, each
/// polished by a second search from its end point.
///
/// Restarts whose objective reaches `tol` count as solutions of equal
/// quality and are ranked by `rank` instead; without any, the lowest
/// objective wins. Remaining ties go to the lowest restart index, so the
/// result depends only on the inputs and `seed`.
pub fn multistart<F, R>(f: F, rank: R, dim: usize, restarts: usize, seed: u64, tol: f64, opts: &SimplexOptions) -> MultiStartResult
where
    F: Fn(&[f64]) -> f64,
    R: Fn(&[f64]) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut results = Vec::with_capacity(restarts.max(1));
    for _ in 0..restarts.max(1) {
        let x0 = random_phases(&mut rng, dim);
        let first = nelder_mead(&f, &x0, opts);
        let polish_opts = SimplexOptions { initial_step: opts.initial_step * 0.01, ..*opts };
        let second = nelder_mead(&f, &first.x, &polish_opts);
        let evals = first.evals + second.evals;
        let r = if second.value <= first.value { second } else { first };
        results.push(SimplexResult { evals, ..r });
    }
    let values: Vec<f64> = results.iter().map(|r| r.value).collect();
    let solved: Vec<usize> = (0..results.len()).filter(|&i| values[i] <= tol).collect();
    let (restart, converged) = if solved.is_empty() {
        let i = (0..values.len()).min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b))).unwrap_or(0);
        (i, false)
    } else {
        let ranks: Vec<(usize, f64)> = solved.iter().map(|&i| (i, sanitize(rank(&results[i].x)))).collect();
        let i = ranks.iter().min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))).map(|p| p.0).unwrap_or(solved[0]);
        (i, true)
    };
    MultiStartResult { best: results.swap_remove(restart), restart, values, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &SimplexOptions::default());
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r);
    }

    #[test]
    fn multistart_is_deterministic() {
        let f = |x: &[f64]| libm::cos(3.0 * x[0]) + libm::cos(2.0 * x[1]) + 0.1 * x[0] * x[0];
        let opts = SimplexOptions::default();
        let a = multistart(f, |_| 0.0, 2, 8, 7, -1e9, &opts);
        let b = multistart(f, |_| 0.0, 2, 8, 7, -1e9, &opts);
        assert_eq!(a, b);
        assert!(!a.converged);
        assert!(a.best.value < -1.8);
        let c = multistart(f, |_| 0.0, 2, 8, 8, -1e9, &opts);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn rank_breaks_ties_between_solutions() {
        // Two exact minima at x = +1 and x = -1; the rank prefers the negative one.
        let f = |x: &[f64]| (x[0] * x[0] - 1.0).powi(2);
        let r = multistart(f, |x| x[0], 1, 16, 3, 1e-20, &SimplexOptions::default());
        assert!(r.converged);
        assert!((r.best.x[0] + 1.0).abs() < 1e-8, "{:?}", r.best);
    }
}
