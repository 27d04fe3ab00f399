//! Level-3 phases: offsets between blocks that make the ground-space
//! rotation robust against a relative error in its angle.
//!
//! A block acts on the ground space as `|d><d| + e^{i Phi (1 + delta)}|b><b|`,
//! where the dark and bright states follow from the mixing angle and the
//! block's relative phase `x`. Population compensation (PC) flattens
//! `P_f(delta)`; fidelity compensation (FC) flattens the overlap with a
//! superposition target.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::design::series::{Series, SeriesMat2};
use crate::design::simplex::{multistart, SimplexOptions};
use crate::error::{BestFound, DesignError};
use crate::linalg::{cis, wrap_phase, Mat2, State3, C64};

/// Restarts of the numeric designers.
pub const RESTARTS: usize = 32;

/// PC objective value below which a restart counts as a solution.
pub const SOLVED_TOL: f64 = 1e-18;

/// FC objective value below which a restart counts as a solution. The FC
/// objective is linear in `1 - f_0`, so this bounds the nominal infidelity
/// directly.
pub const FC_SOLVED_TOL: f64 = 1e-12;

/// Tolerance of the closed-form residual checks.
pub const ANALYTIC_TOL: f64 = 1e-9;

/// Distance from an equal-weight quarter turn within which a block is
/// designed on the reference model. Pairs tuned to rounded published
/// parameters land within `2e-4`.
pub const QUARTER_TURN_TOL: f64 = 1e-3;

/// Error range used to rank equivalent solutions by flatness.
pub const FLATNESS_RANGE: f64 = 1.0;

/// Sample count of the flatness grid.
pub const FLATNESS_POINTS: usize = 41;

/// Error scale at which equivalent PC solutions are compared.
pub const PC_RANK_SCALE: f64 = 0.25;

/// Superposition target `cos(alpha)|g> + sin(alpha) e^{i chi}|f>`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct TargetState {
    pub alpha: f64,
    pub chi: f64,
}

impl TargetState {
    pub fn new(alpha: f64, chi: f64) -> Result<Self, DesignError> {
        if !alpha.is_finite() || !chi.is_finite() {
            return Err(DesignError::DomainError("target angles must be finite".into()));
        }
        Ok(Self { alpha, chi })
    }

    /// Target with population `p_f` in `|f>` and zero relative phase.
    pub fn population(p_f: f64) -> Result<Self, DesignError> {
        check_population(p_f)?;
        Ok(Self { alpha: libm::asin(libm::sqrt(p_f)), chi: 0.0 })
    }

    /// Builds a target from any subset of angle and population, checking
    /// that `p_f = sin^2(alpha)` when both are present.
    pub fn from_parts(alpha: Option<f64>, chi: Option<f64>, p_f: Option<f64>) -> Result<Self, DesignError> {
        let chi = chi.unwrap_or(0.0);
        match (alpha, p_f) {
            (Some(a), Some(p)) => {
                check_population(p)?;
                let implied = libm::sin(a) * libm::sin(a);
                if libm::fabs(implied - p) > 1e-9 {
                    return Err(DesignError::SpecError(alloc::format!("target population {p} disagrees with sin^2(alpha) = {implied}")));
                }
                Self::new(a, chi)
            }
            (Some(a), None) => Self::new(a, chi),
            (None, Some(p)) => Ok(Self { chi, ..Self::population(p)? }),
            (None, None) => Self::new(FRAC_PI_4, chi),
        }
    }

    pub fn p_f(&self) -> f64 {
        let s = libm::sin(self.alpha);
        s * s
    }

    /// Ground-space amplitudes `(g, f)`.
    pub fn amplitudes(&self) -> [C64; 2] {
        [C64::new(libm::cos(self.alpha), 0.0), cis(self.chi) * libm::sin(self.alpha)]
    }

    /// Three-level state with no excited-state amplitude.
    pub fn state3(&self) -> State3 {
        let [g, f] = self.amplitudes();
        State3::new([g, f, C64::new(0.0, 0.0)])
    }
}

impl Default for TargetState {
    fn default() -> Self {
        Self { alpha: FRAC_PI_4, chi: 0.0 }
    }
}

fn check_population(p_f: f64) -> Result<(), DesignError> {
    if !(0.0..=1.0).contains(&p_f) {
        return Err(DesignError::DomainError(alloc::format!("P_f must lie in [0, 1], got {p_f}")));
    }
    Ok(())
}

/// Ground-space model of a sequence of blocks.
///
/// Block `n` has relative phase `x_n = theta_sp + orientation * theta_n`
/// where `theta_n` is its level-3 offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationModel {
    /// Mixing angle of the pairs.
    pub mixing: f64,
    /// Bright-state phase of one error-free block.
    pub block_phase: f64,
    /// Relative phase of the first block before level-3 offsets.
    pub theta_sp: f64,
    /// `+1` when offsets add to the relative phase, `-1` when they
    /// subtract (offsets on the pump phase).
    pub orientation: f64,
}

impl RotationModel {
    /// Reference model: equal-weight mixing, quarter-turn blocks, offsets
    /// entering the relative phase directly.
    pub const REFERENCE: Self = Self { mixing: FRAC_PI_4, block_phase: FRAC_PI_2, theta_sp: 0.0, orientation: 1.0 };

    /// Model of physical blocks whose level-3 offsets shift the pump phase.
    pub fn for_blocks(mixing: f64, block_phase: f64, theta_sp: f64) -> Self {
        Self { mixing, block_phase, theta_sp, orientation: -1.0 }
    }

    fn x(&self, theta: f64) -> f64 {
        self.theta_sp + self.orientation * theta
    }

    fn projectors(&self, theta: f64) -> (Mat2, Mat2) {
        let (c, s) = (libm::cos(self.mixing), libm::sin(self.mixing));
        let x = self.x(theta);
        let d = [cis(x) * c, C64::new(-s, 0.0)];
        let b = [C64::new(s, 0.0), cis(-x) * c];
        let outer = |v: [C64; 2]| Mat2::from_rows([[v[0] * v[0].conj(), v[0] * v[1].conj()], [v[1] * v[0].conj(), v[1] * v[1].conj()]]);
        (outer(d), outer(b))
    }

    /// One block at relative angle error `delta`.
    pub fn block(&self, theta: f64, delta: f64) -> Mat2 {
        let (pd, pb) = self.projectors(theta);
        pd + pb.scale(cis(self.block_phase * (1.0 + delta)))
    }

    /// Product of blocks, first offset applied first.
    pub fn propagator(&self, thetas: &[f64], delta: f64) -> Mat2 {
        thetas.iter().fold(Mat2::identity(), |u, &t| self.block(t, delta) * u)
    }

    /// Final `(g, f)` amplitudes from `|g>`.
    pub fn final_state(&self, thetas: &[f64], delta: f64) -> [C64; 2] {
        let u = self.propagator(thetas, delta);
        [u[(0, 0)], u[(1, 0)]]
    }

    /// Exact Taylor series of the final amplitudes in `delta`.
    pub fn state_series(&self, thetas: &[f64], order: usize) -> [Series; 2] {
        let mut u = SeriesMat2::identity(order);
        for &t in thetas {
            let (pd, pb) = self.projectors(t);
            let e = Series::phase(cis(self.block_phase), self.block_phase, order);
            let entry = |i: usize, j: usize| Series::constant(pd[(i, j)], order).add(&e.scale(pb[(i, j)]));
            let blk = SeriesMat2 { m: [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]] };
            u = blk.mul(&u);
        }
        u.apply([C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
    }

    /// `P_f(delta)` from `|g>`.
    pub fn population(&self, thetas: &[f64], delta: f64) -> f64 {
        self.final_state(thetas, delta)[1].norm_sqr()
    }

    /// Overlap fidelity with `target` from `|g>`.
    pub fn fidelity(&self, thetas: &[f64], target: &TargetState, delta: f64) -> f64 {
        let psi = self.final_state(thetas, delta);
        let t = target.amplitudes();
        (t[0].conj() * psi[0] + t[1].conj() * psi[1]).norm_sqr()
    }

    /// Taylor coefficients of `P_f(delta)`, orders `0..=order`.
    pub fn population_coefficients(&self, thetas: &[f64], order: usize) -> Vec<f64> {
        let [_, f] = self.state_series(thetas, order);
        f.norm_sqr().coeffs().iter().map(|c| c.re).collect()
    }

    /// Derivatives `d^k P_f / d delta^k` at zero, orders `0..=order`.
    pub fn population_derivatives(&self, thetas: &[f64], order: usize) -> Vec<f64> {
        let [_, f] = self.state_series(thetas, order);
        let p = f.norm_sqr();
        (0..=order).map(|k| p.derivative(k).re).collect()
    }

    /// Taylor coefficients `f_k` of the fidelity, orders `0..=order`.
    pub fn fidelity_coefficients(&self, thetas: &[f64], target: &TargetState, order: usize) -> Vec<f64> {
        let [g, f] = self.state_series(thetas, order);
        let t = target.amplitudes();
        let overlap = g.scale(t[0].conj()).add(&f.scale(t[1].conj()));
        overlap.norm_sqr().coeffs().iter().map(|c| c.re).collect()
    }

    /// Relative phase of the nominal final state, `arg(f / g)`.
    pub fn final_phase(&self, thetas: &[f64]) -> f64 {
        let [g, f] = self.final_state(thetas, 0.0);
        (f * g.conj()).arg()
    }

    /// Sign relating this model to [`Self::REFERENCE`], if the closed forms
    /// apply: equal-weight mixing and a quarter-turn block, each within
    /// [`QUARTER_TURN_TOL`].
    pub fn reference_sign(&self) -> Option<f64> {
        let mixing_ok = libm::fabs(self.mixing - FRAC_PI_4) < QUARTER_TURN_TOL;
        let phase = wrap_phase(self.block_phase);
        if !mixing_ok {
            None
        } else if libm::fabs(phase - FRAC_PI_2) < QUARTER_TURN_TOL {
            Some(1.0)
        } else if libm::fabs(phase + FRAC_PI_2) < QUARTER_TURN_TOL {
            Some(-1.0)
        } else {
            None
        }
    }

    /// Maps phases designed on the reference model onto this model.
    ///
    /// With a negative quarter turn the blocks are complex conjugates of
    /// reference blocks at negated relative phase, so the targets' relative
    /// phase flips sign as well (see [`Self::reference_target`]).
    pub fn from_reference(&self, reference: &[f64]) -> Result<Vec<f64>, DesignError> {
        let sign = self.reference_sign().ok_or(DesignError::UseNumeric)?;
        Ok(reference.iter().map(|c| (sign * c - self.theta_sp) / self.orientation).collect())
    }

    /// Inverse of [`Self::from_reference`].
    pub fn to_reference(&self, thetas: &[f64]) -> Result<Vec<f64>, DesignError> {
        let sign = self.reference_sign().ok_or(DesignError::UseNumeric)?;
        Ok(thetas.iter().map(|t| sign * self.x(*t)).collect())
    }

    /// Target as seen on the reference model.
    pub fn reference_target(&self, target: &TargetState) -> Result<TargetState, DesignError> {
        let sign = self.reference_sign().ok_or(DesignError::UseNumeric)?;
        Ok(TargetState { alpha: target.alpha, chi: sign * target.chi })
    }

    fn grid(&self) -> impl Iterator<Item = f64> {
        let n = FLATNESS_POINTS;
        (0..n).map(move |i| -FLATNESS_RANGE + 2.0 * FLATNESS_RANGE * i as f64 / (n - 1) as f64)
    }
}

fn sq(x: f64) -> f64 {
    x * x
}

fn cumulative(first: f64, diffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(diffs.len() + 1);
    out.push(first);
    let mut acc = first;
    for d in diffs {
        acc += d;
        out.push(acc);
    }
    out
}

/// Offsets of a designed level-3 stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Level3Solution {
    /// Absolute offset of each block.
    pub thetas: Vec<f64>,
    /// Reduced differences between consecutive offsets.
    pub differences: Vec<f64>,
    pub objective: f64,
    pub restart: usize,
}

impl Level3Solution {
    fn from_thetas(thetas: Vec<f64>, objective: f64, restart: usize) -> Self {
        let differences = thetas.windows(2).map(|w| wrap_phase(w[1] - w[0])).collect();
        Self { thetas, differences, objective, restart }
    }
}

/// Three-block PC solution on the reference model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcThree {
    pub theta_21: f64,
    pub theta_32: f64,
    /// `d^k P_f / d delta^k` at zero for `k = 0, 1, 2`.
    pub derivatives: [f64; 3],
}

/// Closed-form three-block PC phases.
///
/// Every sign branch of `2 arctan[+-(sqrt(1 - P^2) +- sqrt(2P - P^2))]`
/// is checked on the reference model; among those meeting `P_f` and a
/// vanishing first derivative the smallest second derivative wins, ties
/// going to the first branch in enumeration order.
pub fn level3_pc_three(p_f: f64) -> Result<PcThree, DesignError> {
    check_population(p_f)?;
    let a = libm::sqrt((1.0 - p_f * p_f).max(0.0));
    let b = libm::sqrt((2.0 * p_f - p_f * p_f).max(0.0));
    let model = RotationModel::REFERENCE;
    let mut best: Option<PcThree> = None;
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            for inner in [1.0, -1.0] {
                let t21 = wrap_phase(2.0 * libm::atan(s1 * (a + inner * b)));
                let t32 = wrap_phase(2.0 * libm::atan(s2 * (a - inner * b)));
                let d = model.population_derivatives(&[0.0, t21, t21 + t32], 2);
                if libm::fabs(d[0] - p_f) > ANALYTIC_TOL || libm::fabs(d[1]) > ANALYTIC_TOL {
                    continue;
                }
                let cand = PcThree { theta_21: t21, theta_32: t32, derivatives: [d[0], d[1], d[2]] };
                let better = match &best {
                    None => true,
                    Some(b) => libm::fabs(d[2]) < libm::fabs(b.derivatives[2]) - 1e-12,
                };
                if better {
                    best = Some(cand);
                }
            }
        }
    }
    best.ok_or_else(|| DesignError::NoSolution { best: BestFound { phases: vec![], objective: f64::INFINITY } })
}

/// Orders of `P_f` nulled for `n3` blocks.
///
/// An odd number of blocks nulls twice as many orders as free phases
/// would suggest since the solutions come in mirror pairs that cancel the
/// odd and even terms together.
pub fn pc_orders(n3: usize) -> usize {
    2 * (n3.saturating_sub(1) / 2)
}

/// Orders of the fidelity nulled for `n3` blocks.
///
/// The fidelity peaks at one, so once `f_0 = 1` and the even terms up to
/// `2j` vanish the next odd term vanishes with them; nulling up to an even
/// order is enough.
pub fn fc_orders(n3: usize) -> usize {
    (2 * (n3.saturating_sub(1) / 2)).saturating_sub(2).max(1)
}

/// PC phases for `n3` blocks on the reference model.
pub fn level3_pc_numeric(p_f: f64, n3: usize, seed: u64) -> Result<Level3Solution, DesignError> {
    level3_pc_numeric_with(&RotationModel::REFERENCE, p_f, n3, seed)
}

/// PC phases for `n3` blocks with the first offset fixed at zero: `P_f`
/// is met and its derivatives of orders up to [`pc_orders`] vanish. The
/// relative phase is left free, so members differ in how fast the final
/// state drifts; the one with the smallest weighted sum
/// `sum_k |f_k| s^k` of the infidelity coefficients against its own nominal
/// state, at `s =` [`PC_RANK_SCALE`], is kept.
pub fn level3_pc_numeric_with(model: &RotationModel, p_f: f64, n3: usize, seed: u64) -> Result<Level3Solution, DesignError> {
    check_population(p_f)?;
    if n3 < 2 {
        return Err(DesignError::DomainError(alloc::format!("PC design needs at least two blocks, got {n3}")));
    }
    let k_max = pc_orders(n3);
    let objective = |x: &[f64]| {
        let c = model.population_coefficients(&cumulative(0.0, x), k_max);
        let head = c[0] - p_f;
        head * head + c[1..].iter().map(|v| v * v).sum::<f64>()
    };
    let rank = |x: &[f64]| {
        let th = cumulative(0.0, x);
        let [g, f] = model.final_state(&th, 0.0);
        let nominal = TargetState { alpha: libm::atan2(f.norm(), g.norm()), chi: (f * g.conj()).arg() };
        let c = model.fidelity_coefficients(&th, &nominal, 2 * k_max + 2);
        c[1..].iter().enumerate().map(|(k, v)| libm::fabs(*v) * libm::pow(PC_RANK_SCALE, (k + 1) as f64)).sum::<f64>()
    };
    let res = multistart(objective, rank, n3 - 1, RESTARTS, seed, SOLVED_TOL, &SimplexOptions::default());
    let diffs: Vec<f64> = res.best.x.iter().map(|d| wrap_phase(*d)).collect();
    if !res.converged {
        return Err(DesignError::NoSolution { best: BestFound { phases: diffs, objective: res.best.value } });
    }
    let value = objective(&diffs);
    Ok(Level3Solution::from_thetas(cumulative(0.0, &diffs), value, res.restart))
}

/// Three-block FC solution on the reference model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcThree {
    pub theta_1: f64,
    pub theta_21: f64,
    pub theta_32: f64,
    /// Fidelity coefficients `f_0, f_1, f_2`.
    pub coefficients: [f64; 3],
    /// Row of the solution table the member came from, counted from one.
    pub row: usize,
}

impl FcThree {
    pub fn thetas(&self) -> [f64; 3] {
        [self.theta_1, self.theta_1 + self.theta_21, self.theta_1 + self.theta_21 + self.theta_32]
    }
}

/// Candidate `(row, theta_1, theta_21, theta_32)` of the closed-form family
/// for an equal-weight target. Row three leaves `theta_21` free; it is
/// sampled in steps of `pi / 4`.
pub fn fc_candidates(chi: f64, theta_1: f64) -> Vec<(usize, f64, f64, f64)> {
    let mut out = Vec::new();
    for m in [0.0, 1.0] {
        out.push((1, theta_1, m * PI, 1.5 * PI - theta_1 - chi + 2.0 * m * PI));
        out.push((2, theta_1, 0.75 * PI - (theta_1 + chi) / 2.0 + m * PI, 2.0 * m * PI));
    }
    for k in 0..8 {
        out.push((3, FRAC_PI_2 - chi, k as f64 * FRAC_PI_4, PI));
    }
    for sign in [1.0, -1.0] {
        out.push((4, 1.5 * PI - sign * 2.0 * PI / 3.0 - chi, sign * 4.0 * PI / 3.0, 0.0));
        out.push((5, FRAC_PI_2 - sign * PI / 3.0 - chi, sign * 2.0 * PI / 3.0, 0.0));
    }
    out
}

/// All closed-form members meeting `f_0 = 1` and `f_1 = 0`.
pub fn level3_fc_family(target: &TargetState, theta_1: f64) -> Result<Vec<FcThree>, DesignError> {
    if libm::fabs(target.alpha - FRAC_PI_4) > 1e-12 {
        return Err(DesignError::UseNumeric);
    }
    let model = RotationModel::REFERENCE;
    let mut out = Vec::new();
    for (row, t1, t21, t32) in fc_candidates(target.chi, theta_1) {
        let cand = FcThree { theta_1: wrap_phase(t1), theta_21: wrap_phase(t21), theta_32: wrap_phase(t32), coefficients: [0.0; 3], row };
        let f = model.fidelity_coefficients(&cand.thetas(), target, 2);
        if libm::fabs(f[0] - 1.0) < ANALYTIC_TOL && libm::fabs(f[1]) < ANALYTIC_TOL {
            out.push(FcThree { coefficients: [f[0], f[1], f[2]], ..cand });
        }
    }
    Ok(out)
}

/// Closed-form three-block FC phases with the smallest `|f_2|`.
pub fn level3_fc_three(target: &TargetState, theta_1: f64) -> Result<FcThree, DesignError> {
    let family = level3_fc_family(target, theta_1)?;
    let mut best: Option<FcThree> = None;
    for c in family {
        let better = match &best {
            None => true,
            Some(b) => libm::fabs(c.coefficients[2]) < libm::fabs(b.coefficients[2]) - 1e-12,
        };
        if better {
            best = Some(c);
        }
    }
    best.ok_or_else(|| DesignError::NoSolution { best: BestFound { phases: vec![], objective: f64::INFINITY } })
}

/// FC phases for `n3` blocks on the reference model.
pub fn level3_fc_numeric(target: &TargetState, n3: usize, seed: u64) -> Result<Level3Solution, DesignError> {
    level3_fc_numeric_with(&RotationModel::REFERENCE, target, n3, seed)
}

/// FC phases for `n3` blocks: the fidelity reaches one and its Taylor
/// coefficients up to [`fc_orders`] vanish. All offsets are free since the
/// first one sets the relative phase of the result.
pub fn level3_fc_numeric_with(model: &RotationModel, target: &TargetState, n3: usize, seed: u64) -> Result<Level3Solution, DesignError> {
    if n3 < 2 {
        return Err(DesignError::DomainError(alloc::format!("FC design needs at least two blocks, got {n3}")));
    }
    let k_max = fc_orders(n3);
    let objective = |x: &[f64]| {
        let c = model.fidelity_coefficients(&cumulative(x[0], &x[1..]), target, k_max);
        // The fidelity never exceeds one, so 1 - f_0 is a non-negative residual.
        (1.0 - c[0]) + c[1..].iter().map(|v| v * v).sum::<f64>()
    };
    let rank = |x: &[f64]| {
        let th = cumulative(x[0], &x[1..]);
        model.grid().map(|d| sq(1.0 - model.fidelity(&th, target, d))).sum::<f64>()
    };
    let res = multistart(objective, rank, n3, RESTARTS, seed, FC_SOLVED_TOL, &SimplexOptions::default());
    let x: Vec<f64> = res.best.x.iter().map(|d| wrap_phase(*d)).collect();
    if !res.converged {
        return Err(DesignError::NoSolution { best: BestFound { phases: x, objective: res.best.value } });
    }
    let value = objective(&x);
    Ok(Level3Solution::from_thetas(cumulative(x[0], &x[1..]), value, res.restart))
}

/// Common shift of all offsets that moves the nominal relative phase of
/// the result to `chi`, leaving every population unchanged.
pub fn phase_alignment(model: &RotationModel, thetas: &[f64], chi: f64) -> f64 {
    // A common shift s of the relative phase conjugates the propagator by
    // diag(e^{is}, 1), which moves arg(f/g) by -s.
    let now = model.final_phase(thetas);
    wrap_phase(model.orientation * (now - chi))
}
