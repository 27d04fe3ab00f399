//! Time-ordered propagation of pulse pairs and sequences.
//!
//! Pairs abut back to back. Every pair is integrated without its field
//! phases and the phases are put back by the diagonal gauge transform
//! `U(theta_s, theta_p) = W U_0 W^dagger`, `W = diag(e^{-i theta_p}, e^{-i theta_s}, 1)`.
//! That identity is exact step by step, so sequences that reuse one envelope
//! only integrate it once.

use alloc::vec::Vec;

use crate::error::SimError;
use crate::linalg::{cis, exp_hermitian, Mat3, Matrix, State3, C64};
use crate::pulses::{effective_duration, hamiltonian_from_rates, rates, Detuning, ErrorModel, SpPair};
use crate::sequence::Sequence;

/// Fewest steps accepted per pair.
pub const MIN_STEPS: usize = 100;

/// Population change tolerated by the step-doubling guard.
pub const CONVERGENCE_LIMIT: f64 = 1e-9;

/// One-step exponential integrators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Integrator {
    /// Fourth-order Magnus step on two Gauss-Legendre nodes.
    #[default]
    Magnus4,
    /// Exponential of the midpoint Hamiltonian (second order).
    Midpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct PropagationConfig {
    pub steps_per_pair: usize,
    /// Trace sampling interval, in steps.
    pub sample_stride: usize,
    pub integrator: Integrator,
    /// Re-run every pair with twice the steps and fail if populations move.
    pub check_convergence: bool,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self { steps_per_pair: 2000, sample_stride: 20, integrator: Integrator::Magnus4, check_convergence: false }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.steps_per_pair < MIN_STEPS {
            return Err(SimError::StepCountError { min: MIN_STEPS, got: self.steps_per_pair });
        }
        if self.sample_stride == 0 {
            return Err(SimError::InvalidStride);
        }
        Ok(())
    }

    pub fn with_steps(self, steps_per_pair: usize) -> Self {
        Self { steps_per_pair, ..self }
    }
}

/// Unitary for one step `[t0, t0 + dt]` of a Hermitian `h(t)`.
pub fn step<const N: usize, F: Fn(f64) -> Matrix<N>>(h: &F, t0: f64, dt: f64, integrator: Integrator) -> Matrix<N> {
    match integrator {
        Integrator::Midpoint => exp_hermitian(&h(t0 + 0.5 * dt), dt),
        Integrator::Magnus4 => {
            let off = dt * libm::sqrt(3.0) / 6.0;
            let mid = t0 + 0.5 * dt;
            let h1 = h(mid - off);
            let h2 = h(mid + off);
            let k = libm::sqrt(3.0) * dt * dt / 12.0;
            let g = (h1 + h2).scale_re(0.5 * dt) + h2.commutator(&h1).scale(C64::new(0.0, -k));
            exp_hermitian(&g, 1.0)
        }
    }
}

/// Time-ordered exponential of `-i h(t)` over `[0, duration]`.
pub fn propagate_fn<const N: usize, F: Fn(f64) -> Matrix<N>>(h: F, duration: f64, steps: usize, integrator: Integrator) -> Matrix<N> {
    let dt = duration / steps as f64;
    let mut u = Matrix::<N>::identity();
    for k in 0..steps {
        u = step(&h, k as f64 * dt, dt, integrator) * u;
    }
    u
}

/// Gauge matrix `W = diag(e^{-i theta_p}, e^{-i theta_s}, 1)`.
pub fn gauge_matrix(theta_s: f64, theta_p: f64) -> Mat3 {
    Mat3::diagonal([cis(-theta_p), cis(-theta_s), C64::new(1.0, 0.0)])
}

/// Puts field phases onto a propagator computed with zero phases.
pub fn apply_phases(u0: &Mat3, theta_s: f64, theta_p: f64) -> Mat3 {
    let w = [cis(-theta_p), cis(-theta_s), C64::new(1.0, 0.0)];
    let mut u = *u0;
    for i in 0..3 {
        for j in 0..3 {
            u[(i, j)] = w[i] * u0[(i, j)] * w[j].conj();
        }
    }
    u
}

fn check_inputs(pair: &SpPair, err: &ErrorModel, cfg: &PropagationConfig) -> Result<(), SimError> {
    cfg.validate()?;
    pair.validate()?;
    err.validate()?;
    Ok(())
}

/// Step boundaries for one pair: `steps` equal steps, with the nearest
/// interior boundary moved onto every kink of the envelopes so no step
/// straddles one. Kinks that would share a boundary get an extra step.
pub fn step_grid(pair: &SpPair, err: &ErrorModel, steps: usize) -> Vec<f64> {
    let duration = effective_duration(pair, err);
    let dt = duration / steps as f64;
    let mut grid: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    grid[steps] = duration;
    let mut knots = pair.shape.knots();
    if let Some(p) = &pair.pump_override {
        knots.extend(p.knots());
    }
    if let Detuning::Shaped { shape, .. } = &pair.detuning {
        knots.extend(shape.knots());
    }
    let mut moved = alloc::vec![false; steps + 1];
    let mut extra = Vec::new();
    for k in knots {
        let t = k * err.time_scale();
        if !(t > 0.0 && t < duration) {
            continue;
        }
        let i = (libm::round(t / dt) as usize).clamp(1, steps - 1);
        if moved[i] {
            extra.push(t);
        } else {
            grid[i] = t;
            moved[i] = true;
        }
    }
    if !extra.is_empty() {
        grid.extend(extra);
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }
    grid
}

fn integrate_phase_free(pair: &SpPair, err: &ErrorModel, steps: usize, integrator: Integrator) -> Mat3 {
    let h = |t: f64| hamiltonian_from_rates(&rates(pair, err, t), 0.0, 0.0);
    step_grid(pair, err, steps).windows(2).fold(Mat3::identity(), |u, w| step(&h, w[0], w[1] - w[0], integrator) * u)
}

/// Propagator of `pair` with both field phases set to zero.
pub fn phase_free_propagator(pair: &SpPair, err: &ErrorModel, cfg: &PropagationConfig) -> Result<Mat3, SimError> {
    check_inputs(pair, err, cfg)?;
    let u = integrate_phase_free(pair, err, cfg.steps_per_pair, cfg.integrator);
    if cfg.check_convergence {
        let fine = integrate_phase_free(pair, err, 2 * cfg.steps_per_pair, cfg.integrator);
        let change = population_change(&u, &fine);
        if change >= CONVERGENCE_LIMIT {
            return Err(SimError::NotConverged { change, limit: CONVERGENCE_LIMIT });
        }
    }
    Ok(u)
}

/// Largest change in any transition probability `|U_jm|^2`.
pub fn population_change(a: &Mat3, b: &Mat3) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max(libm::fabs(a[(i, j)].norm_sqr() - b[(i, j)].norm_sqr()));
        }
    }
    worst
}

/// Propagator of one pair under `err`.
pub fn propagate_pair(pair: &SpPair, err: &ErrorModel, cfg: &PropagationConfig) -> Result<Mat3, SimError> {
    let u0 = phase_free_propagator(pair, err, cfg)?;
    Ok(apply_phases(&u0, pair.theta_s, pair.theta_p))
}

/// Memo of phase-free propagators keyed by the pair with its phases
/// cleared. Sequences that reuse one envelope integrate it once; sharing a
/// cache across sequences evaluated at the same error point does the same
/// across sequences. Entries are dropped when the error model or config
/// changes.
#[derive(Debug, Default)]
pub struct EnvelopeCache {
    key: Option<(ErrorModel, PropagationConfig)>,
    entries: Vec<(SpPair, Mat3)>,
}

impl EnvelopeCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Phase-free propagator of `pair`.
    pub fn get(&mut self, pair: &SpPair, err: &ErrorModel, cfg: &PropagationConfig) -> Result<Mat3, SimError> {
        if self.key != Some((*err, *cfg)) {
            self.key = Some((*err, *cfg));
            self.entries.clear();
        }
        let key = pair.with_phases(0.0, 0.0);
        if let Some((_, u)) = self.entries.iter().find(|(k, _)| *k == key) {
            return Ok(*u);
        }
        let u = phase_free_propagator(&key, err, cfg)?;
        self.entries.push((key, u));
        Ok(u)
    }

    /// Ordered product over `pairs` (first pair acts first).
    pub fn propagate(&mut self, pairs: &[SpPair], err: &ErrorModel, cfg: &PropagationConfig) -> Result<Mat3, SimError> {
        let mut u = Mat3::identity();
        for p in pairs {
            p.validate()?;
            let u0 = self.get(p, err, cfg)?;
            u = apply_phases(&u0, p.theta_s, p.theta_p) * u;
        }
        Ok(u)
    }
}

/// Ordered product over a list of pairs (first pair acts first).
pub fn propagate_pairs(pairs: &[SpPair], err: &ErrorModel, cfg: &PropagationConfig) -> Result<Mat3, SimError> {
    EnvelopeCache::new().propagate(pairs, err, cfg)
}

/// Propagator of a whole sequence.
pub fn propagate_sequence(seq: &Sequence, err: &ErrorModel, cfg: &PropagationConfig) -> Result<Mat3, SimError> {
    propagate_pairs(&seq.pairs, err, cfg)
}

/// Final state from `init`.
pub fn final_state(seq: &Sequence, err: &ErrorModel, init: &State3, cfg: &PropagationConfig) -> Result<State3, SimError> {
    Ok(propagate_sequence(seq, err, cfg)?.apply(init))
}

/// One row of a population trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    /// `(P_g, P_f, P_e)`.
    pub populations: [f64; 3],
    pub state: State3,
}

impl TraceSample {
    fn new(t: f64, state: State3) -> Self {
        Self { t, populations: state.populations(), state }
    }
}

/// Populations along the sequence, sampled every `sample_stride` steps and
/// at every pair boundary. The first sample is the initial state at `t = 0`.
pub fn trace_populations(seq: &Sequence, err: &ErrorModel, init: &State3, cfg: &PropagationConfig) -> Result<Vec<TraceSample>, SimError> {
    trace_pairs(&seq.pairs, err, init, cfg)
}

pub fn trace_pairs(pairs: &[SpPair], err: &ErrorModel, init: &State3, cfg: &PropagationConfig) -> Result<Vec<TraceSample>, SimError> {
    cfg.validate()?;
    err.validate()?;
    let mut out = Vec::new();
    let mut psi = *init;
    let mut t_start = 0.0;
    out.push(TraceSample::new(0.0, psi));
    for pair in pairs {
        pair.validate()?;
        let key = pair.with_phases(0.0, 0.0);
        let h = |t: f64| hamiltonian_from_rates(&rates(&key, err, t), 0.0, 0.0);
        let grid = step_grid(pair, err, cfg.steps_per_pair);
        let n = grid.len() - 1;
        let w = gauge_matrix(pair.theta_s, pair.theta_p);
        let mut local = w.dagger().apply(&psi);
        for k in 0..n {
            local = step(&h, grid[k], grid[k + 1] - grid[k], cfg.integrator).apply(&local);
            if k + 1 == n || (k + 1) % cfg.sample_stride == 0 {
                out.push(TraceSample::new(t_start + grid[k + 1], w.apply(&local)));
            }
        }
        psi = w.apply(&local);
        t_start += grid[n];
    }
    Ok(out)
}
