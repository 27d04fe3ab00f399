//! Level-2 phases: offsets between level-1 units that null the low-order
//! dependence of the bright-excited element on a dynamical phase error.
//!
//! Each level-1 unit is modelled by two closed-form blocks
//! `[[s e^{ia}, r e^{-it}], [-r e^{it}, s e^{-ia}]]` with `a = alpha (1 + delta)`
//! and Stokes phases `o` and `o + pi - 2 alpha`, where `o` is the unit's
//! cumulative offset.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::design::deriv;
use crate::design::series::{Series, SeriesMat2};
use crate::design::simplex::{multistart, SimplexOptions};
use crate::error::{BestFound, DesignError, PrecisionWarning};
use crate::linalg::{cis, wrap_phase, Mat2, C64};

/// Restarts of the numeric solver.
pub const RESTARTS: usize = 32;

/// Objective value below which a restart counts as a solution.
pub const SOLVED_TOL: f64 = 1e-16;

/// Error range used to rank equivalent solutions by flatness.
pub const FLATNESS_RANGE: f64 = 0.5;

/// Sample count of the flatness grid.
pub const FLATNESS_POINTS: usize = 41;

fn check_r(r: f64) -> Result<f64, DesignError> {
    if !r.is_finite() || libm::fabs(r) >= 1.0 {
        return Err(DesignError::DomainError(alloc::format!("|r| must be below 1, got {r}")));
    }
    Ok(libm::sqrt(1.0 - r * r))
}

/// One closed-form block at dynamical phase `a` and Stokes phase `theta`.
pub fn block(a: f64, r: f64, theta: f64) -> Mat2 {
    let s = libm::sqrt((1.0 - r * r).max(0.0));
    Mat2::from_rows([[cis(a) * s, cis(-theta) * r], [-cis(theta) * r, cis(-a) * s]])
}

/// Level-1 unit with cumulative offset `offset` at relative error `delta`.
pub fn unit_block(alpha: f64, r: f64, offset: f64, delta: f64) -> Mat2 {
    let a = alpha * (1.0 + delta);
    block(a, r, offset + PI - 2.0 * alpha) * block(a, r, offset)
}

/// Product of units, first offset applied first.
pub fn units_propagator(offsets: &[f64], alpha: f64, r: f64, delta: f64) -> Mat2 {
    offsets.iter().fold(Mat2::identity(), |u, &o| unit_block(alpha, r, o, delta) * u)
}

/// Bright-to-excited element of the composed units.
pub fn ueb(offsets: &[f64], alpha: f64, r: f64, delta: f64) -> C64 {
    units_propagator(offsets, alpha, r, delta)[(1, 0)]
}

fn block_series(alpha: f64, s: f64, r: f64, theta: f64, order: usize) -> SeriesMat2 {
    SeriesMat2 {
        m: [
            [Series::phase(cis(alpha) * s, alpha, order), Series::constant(cis(-theta) * r, order)],
            [Series::constant(-cis(theta) * r, order), Series::phase(cis(-alpha) * s, -alpha, order)],
        ],
    }
}

/// Exact Taylor series of the bright-excited element in `delta`.
pub fn ueb_series(offsets: &[f64], alpha: f64, r: f64, order: usize) -> Series {
    let s = libm::sqrt((1.0 - r * r).max(0.0));
    let mut u = SeriesMat2::identity(order);
    for &o in offsets {
        u = block_series(alpha, s, r, o, order).mul(&u);
        u = block_series(alpha, s, r, o + PI - 2.0 * alpha, order).mul(&u);
    }
    u.m[1][0].clone()
}

/// Cumulative offset of every unit for `2^depth` units.
///
/// Concatenation depth `m` adds `pi - 2^{m+1} alpha` to every unit whose
/// index has bit `m - 1` set, which nulls one further order per depth.
pub fn level2_phases_pow2(alpha: f64, depth: u32) -> Vec<f64> {
    let steps = level2_depth_offsets(alpha, depth);
    (0..1usize << depth).map(|u| steps.iter().enumerate().filter(|(m, _)| (u >> m) & 1 == 1).map(|(_, s)| s).sum()).collect()
}

/// Offset introduced at each depth `m = 1..=depth`, unreduced.
pub fn level2_depth_offsets(alpha: f64, depth: u32) -> Vec<f64> {
    (1..=depth).map(|m| PI - libm::pow(2.0, (m + 1) as f64) * alpha).collect()
}

/// Two offset differences for three units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeUnitPhases {
    pub theta_21: f64,
    pub theta_32: f64,
    /// Magnitude of the phasor sum that must vanish.
    pub residual: f64,
    /// True when the arctangent form was singular and the closed-form
    /// branch `2 pi / 3 - 4 alpha` was used instead.
    pub alternate: bool,
}

impl ThreeUnitPhases {
    /// Cumulative offsets `(0, theta_21, theta_21 + theta_32)`.
    pub fn offsets(&self) -> [f64; 3] {
        [0.0, self.theta_21, self.theta_21 + self.theta_32]
    }
}

/// Phasor closure residual `|e^{i(8a + o3)} + e^{i(4a + o2)} + e^{i o1}|`.
pub fn three_unit_residual(alpha: f64, offsets: [f64; 3]) -> f64 {
    (cis(8.0 * alpha + offsets[2]) + cis(4.0 * alpha + offsets[1]) + cis(offsets[0])).norm()
}

/// Offsets for three units that null the first-order term.
///
/// The three unit phasors close into an equilateral triangle, so both
/// differences equal `2 arctan[(sqrt3 - 2 sin 4a)/(2 cos 4a - 1)]`, taken
/// through `atan2` to stay on the branch that closes the triangle.
pub fn level2_phases_three(alpha: f64) -> ThreeUnitPhases {
    let num = libm::sqrt(3.0) - 2.0 * libm::sin(4.0 * alpha);
    let den = 2.0 * libm::cos(4.0 * alpha) - 1.0;
    let (theta, alternate) =
        if libm::hypot(num, den) < 1e-12 { (wrap_phase(2.0 * PI / 3.0 - 4.0 * alpha), true) } else { (wrap_phase(2.0 * libm::atan2(num, den)), false) };
    let mut out = ThreeUnitPhases { theta_21: theta, theta_32: theta, residual: 0.0, alternate };
    out.residual = three_unit_residual(alpha, out.offsets());
    out
}

/// Derivative magnitudes of the bright-excited element.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorCoefficients {
    /// `|d^k U_eb / d delta^k|` at zero for `k = 0..=max_order`.
    pub values: Vec<f64>,
    pub warning: Option<PrecisionWarning>,
}

/// Finite-difference derivative magnitudes of `U_eb` for the given offsets.
pub fn taylor_coeffs_ueb(offsets: &[f64], alpha: f64, r: f64, max_order: usize) -> Result<TaylorCoefficients, DesignError> {
    check_r(r)?;
    if !alpha.is_finite() || offsets.iter().any(|o| !o.is_finite()) {
        return Err(DesignError::DomainError("non-finite phase".into()));
    }
    let f = |d: f64| ueb(offsets, alpha, r, d);
    let scale = 2.0 * libm::fabs(alpha) * offsets.len() as f64;
    let (d, warning) = deriv::derivatives(&f, 0.0, max_order, scale);
    Ok(TaylorCoefficients { values: d.iter().map(|z| z.norm()).collect(), warning })
}

/// Number of leading orders the numeric solver nulls for `n2` units.
pub fn nulled_orders(n2: usize) -> usize {
    (usize::BITS - 1 - n2.max(1).leading_zeros()) as usize
}

/// Numeric level-2 solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Level2Solution {
    /// Cumulative offset of each unit, starting at zero.
    pub offsets: Vec<f64>,
    /// Reduced differences between consecutive offsets.
    pub differences: Vec<f64>,
    pub objective: f64,
    /// Restart that produced the solution.
    pub restart: usize,
}

fn cumulative(diffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(diffs.len() + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for d in diffs {
        acc += d;
        out.push(acc);
    }
    out
}

/// Sum of squared Taylor coefficients of orders `0..=k_max`.
pub fn level2_objective(offsets: &[f64], alpha: f64, r: f64, k_max: usize) -> f64 {
    ueb_series(offsets, alpha, r, k_max).coeffs().iter().map(|c| c.norm_sqr()).sum()
}

/// Mean of `|U_eb|^2` over the flatness grid.
pub fn level2_flatness(offsets: &[f64], alpha: f64, r: f64) -> f64 {
    let n = FLATNESS_POINTS;
    let sum: f64 = (0..n)
        .map(|i| {
            let d = -FLATNESS_RANGE + 2.0 * FLATNESS_RANGE * i as f64 / (n - 1) as f64;
            ueb(offsets, alpha, r, d).norm_sqr()
        })
        .sum();
    sum / n as f64
}

/// Searches offsets for `n2` units that null the first
/// `floor(log2 n2) + 1` Taylor coefficients of `U_eb`.
///
/// Solutions are not unique; among restarts that reach [`SOLVED_TOL`] the
/// one with the smallest mean `|U_eb|^2` over `|delta| <= 0.5` is kept.
pub fn level2_phases_numeric(alpha: f64, r: f64, n2: usize, seed: u64) -> Result<Level2Solution, DesignError> {
    check_r(r)?;
    if n2 == 0 || !alpha.is_finite() {
        return Err(DesignError::DomainError(alloc::format!("need n2 >= 1 and finite alpha, got n2 = {n2}")));
    }
    let k_max = nulled_orders(n2);
    let objective = |x: &[f64]| level2_objective(&cumulative(x), alpha, r, k_max);
    if n2 == 1 {
        return Ok(Level2Solution { offsets: alloc::vec![0.0], differences: Vec::new(), objective: objective(&[]), restart: 0 });
    }
    let rank = |x: &[f64]| level2_flatness(&cumulative(x), alpha, r);
    let res = multistart(objective, rank, n2 - 1, RESTARTS, seed, SOLVED_TOL, &SimplexOptions::default());
    let differences: Vec<f64> = res.best.x.iter().map(|&d| wrap_phase(d)).collect();
    if !res.converged {
        return Err(DesignError::NoSolution { best: BestFound { phases: differences, objective: res.best.value } });
    }
    let offsets = cumulative(&differences);
    let value = objective(&differences);
    Ok(Level2Solution { offsets, differences, objective: value, restart: res.restart })
}

/// Offsets for `n2` units by the cheapest exact rule: the doubling cascade
/// for powers of two, the triangle closure for three, the numeric search
/// otherwise.
pub fn level2_offsets(alpha: f64, r: f64, n2: usize, seed: u64) -> Result<Vec<f64>, DesignError> {
    match n2 {
        0 => Err(DesignError::DomainError("n2 must be positive".into())),
        3 => Ok(level2_phases_three(alpha).offsets().to_vec()),
        n if n.is_power_of_two() => Ok(level2_phases_pow2(alpha, n.trailing_zeros())),
        n => Ok(level2_phases_numeric(alpha, r, n, seed)?.offsets),
    }
}
