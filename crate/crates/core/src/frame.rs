//! Dark/bright frame, instantaneous eigensystem and single-pair characterization.
//!
//! With `theta_sp = theta_s - theta_p` and mixing angle `phi` (`tan phi = Omega_p / Omega_s`):
//!
//! ```text
//! |d> = cos(phi) e^{i theta_sp} |g> - sin(phi) |f>
//! |b> = sin(phi) |g> + cos(phi) e^{-i theta_sp} |f>
//! ```
//!
//! The bright state couples to `|e>` with `<b|H|e> = Omega e^{-i theta_p}`, the
//! dark state does not couple at all while `phi` is constant.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::error::FrameError;
use crate::linalg::{cis, Mat3, Matrix, State3, C64};
use crate::pulses::{build_hamiltonian, rates, rates_derivative, ErrorModel, SpPair};
use crate::sim::{propagate_fn, propagate_pair, Integrator, PropagationConfig};

/// Leak tolerance on the dark row/column of a characterized propagator.
pub const DARK_TOL: f64 = 1e-8;

/// Instantaneous frame of one pair at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenFrame {
    pub t: f64,
    /// Mixing angle of the ground states.
    pub phi: f64,
    /// Bright/excited mixing angle, `tan 2 varphi = 2 Omega / Delta`.
    pub varphi: f64,
    pub theta_s: f64,
    pub theta_p: f64,
    pub theta_sp: f64,
    pub omega: f64,
    pub delta: f64,
    /// `[E_0, E_+, E_-]` with `E_0 = 0` for the dark state.
    pub energies: [f64; 3],
    /// Columns `|d>, |b>, |e>` in the bare basis.
    pub basis: Mat3,
    /// Columns `|d>, |E_+>, |E_->` in the bare basis.
    pub eigenvectors: Mat3,
}

impl EigenFrame {
    pub fn dark(&self) -> State3 {
        self.basis.column(0)
    }

    pub fn bright(&self) -> State3 {
        self.basis.column(1)
    }
}

/// Columns `|d>, |b>, |e>` for a mixing angle and relative phase.
pub fn dark_bright_basis(phi: f64, theta_sp: f64) -> Mat3 {
    let (s, c) = (libm::sin(phi), libm::cos(phi));
    let d = State3::new([cis(theta_sp) * c, C64::new(-s, 0.0), C64::new(0.0, 0.0)]);
    let b = State3::new([C64::new(s, 0.0), cis(-theta_sp) * c, C64::new(0.0, 0.0)]);
    Matrix::from_columns([d, b, State3::basis(2)])
}

fn frame_mixing(pair: &SpPair, err: &ErrorModel, omega_p: f64, omega_s: f64) -> f64 {
    if pair.is_synchronized() || omega_p == 0.0 && omega_s == 0.0 {
        err.mixing_angle(pair)
    } else {
        libm::atan2(omega_p, omega_s)
    }
}

/// Eigensystem of the pair Hamiltonian at time `t`.
pub fn eigensystem(pair: &SpPair, err: &ErrorModel, t: f64) -> Result<EigenFrame, FrameError> {
    build_hamiltonian(pair, err, t)?;
    let r = rates(pair, err, t);
    let omega = libm::hypot(r.omega_p, r.omega_s);
    if omega == 0.0 && r.delta == 0.0 {
        return Err(FrameError::DegenerateError { t });
    }
    let phi = frame_mixing(pair, err, r.omega_p, r.omega_s);
    let varphi = 0.5 * libm::atan2(2.0 * omega, r.delta);
    let root = libm::sqrt(0.25 * r.delta * r.delta + omega * omega);
    let e_plus = 0.5 * r.delta + root;
    let e_minus = 0.5 * r.delta - root;
    let theta_sp = pair.theta_sp();
    let basis = dark_bright_basis(phi, theta_sp);
    let b = basis.column(1);
    let ph = cis(-pair.theta_p);
    let (sv, cv) = (libm::sin(varphi), libm::cos(varphi));
    let mut plus = [C64::new(0.0, 0.0); 3];
    let mut minus = [C64::new(0.0, 0.0); 3];
    for k in 0..2 {
        plus[k] = ph * b.amp(k) * sv;
        minus[k] = ph * b.amp(k) * cv;
    }
    plus[2] = C64::new(cv, 0.0);
    minus[2] = C64::new(-sv, 0.0);
    let eigenvectors = Matrix::from_columns([basis.column(0), State3::new(plus), State3::new(minus)]);
    Ok(EigenFrame {
        t,
        phi,
        varphi,
        theta_s: pair.theta_s,
        theta_p: pair.theta_p,
        theta_sp,
        omega,
        delta: r.delta,
        energies: [0.0, e_plus, e_minus],
        basis,
        eigenvectors,
    })
}

/// Change of basis from `{g, f, e}` to `{d, b, e}` (columns are the new kets).
pub fn db_transform(frame: &EigenFrame) -> Mat3 {
    frame.basis
}

/// Rewrites a bare-basis operator in the `{d, b, e}` frame of `pair`.
pub fn to_dark_bright(pair: &SpPair, err: &ErrorModel, op: &Mat3) -> Mat3 {
    let b = dark_bright_basis(err.mixing_angle(pair), pair.theta_sp());
    b.dagger() * *op * b
}

/// Hamiltonian in the adiabatic basis `{|d>, |E_+>, |E_->}`.
///
/// Diagonal entries are the energies, the only coupling is
/// `<E_+|H_a|E_-> = i dvarphi/dt` with
/// `dvarphi/dt = (Omega' Delta - Omega Delta') / (Delta^2 + 4 Omega^2)`.
/// The dark row stays empty because the mixing angle is constant.
pub fn adiabatic_hamiltonian(pair: &SpPair, err: &ErrorModel, t: f64) -> Result<Mat3, FrameError> {
    let f = eigensystem(pair, err, t)?;
    let r = rates(pair, err, t);
    let dr = rates_derivative(pair, err, t);
    let omega_dot = if f.omega > 0.0 { (r.omega_p * dr.omega_p + r.omega_s * dr.omega_s) / f.omega } else { 0.0 };
    let varphi_dot = (omega_dot * f.delta - f.omega * dr.delta) / (f.delta * f.delta + 4.0 * f.omega * f.omega);
    let mut h = Mat3::diagonal([C64::new(0.0, 0.0), C64::new(f.energies[1], 0.0), C64::new(f.energies[2], 0.0)]);
    h[(1, 2)] = C64::new(0.0, varphi_dot);
    h[(2, 1)] = C64::new(0.0, -varphi_dot);
    Ok(h)
}

/// Parameters of a single-pair propagator in the `{d, b, e}` frame.
///
/// The bright/excited block equals
/// `e^{-i gamma} [[s e^{i alpha}, r e^{-i theta_s}], [-r* e^{i theta_s}, s e^{-i alpha}]]`.
/// The prefactor carries the block determinant `e^{-2 i gamma}`, which the
/// detuning makes different from one. `alpha` lies in `(-pi/2, pi/2]` and
/// `gamma` in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairCharacterization {
    pub r: C64,
    pub s: f64,
    pub alpha: f64,
    pub gamma: f64,
}

impl PairCharacterization {
    /// Phase picked up by the bright state, relative to the dark state, over
    /// one level-1 unit (two pairs with the exact phase step).
    pub fn unit_phase(&self) -> f64 {
        2.0 * (self.alpha - self.gamma)
    }

    /// `{d, b, e}` propagator rebuilt from the parameters.
    pub fn reconstruct(&self, theta_s: f64) -> Mat3 {
        let g = cis(-self.gamma);
        let mut u = Mat3::identity();
        u[(1, 1)] = g * cis(self.alpha) * self.s;
        u[(1, 2)] = g * self.r * cis(-theta_s);
        u[(2, 1)] = -g * self.r.conj() * cis(theta_s);
        u[(2, 2)] = g * cis(-self.alpha) * self.s;
        u
    }
}

/// Reads `(r, s, alpha, gamma)` off a `{d, b, e}` propagator.
pub fn extract_r_alpha(u: &Mat3, theta_s: f64) -> Result<PairCharacterization, FrameError> {
    let leak =
        [(u[(0, 0)] - C64::new(1.0, 0.0)).norm(), u[(0, 1)].norm(), u[(0, 2)].norm(), u[(1, 0)].norm(), u[(2, 0)].norm()].into_iter().fold(0.0, f64::max);
    if leak.is_nan() || leak > DARK_TOL {
        return Err(FrameError::NotBlockDiagonal { leak });
    }
    let block = u.lower_block();
    let mut gamma = -0.5 * block.det().arg();
    let mut alpha = (u[(1, 1)] * cis(gamma)).arg();
    if alpha > FRAC_PI_2 {
        alpha -= PI;
        gamma -= PI;
    } else if alpha <= -FRAC_PI_2 {
        alpha += PI;
        gamma += PI;
    }
    let gamma = crate::linalg::wrap_phase(gamma);
    let r = u[(1, 2)] * cis(gamma) * cis(theta_s);
    let s = libm::sqrt((1.0 - r.norm_sqr()).max(0.0));
    Ok(PairCharacterization { r, s, alpha, gamma })
}

/// Simulates one pair and characterizes it in its own dark/bright frame.
pub fn characterize_pair(pair: &SpPair, err: &ErrorModel, cfg: &PropagationConfig) -> Result<PairCharacterization, FrameError> {
    let u = propagate_pair(pair, err, cfg)?;
    extract_r_alpha(&to_dark_bright(pair, err, &u), pair.theta_s)
}

/// Outcome of a gauge-invariance comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeReport {
    /// Level phases `lambda_j` with `H(theta) = D H D^dagger`, `D = diag(e^{i lambda_j})`.
    pub level_phases: Vec<f64>,
    /// `max | |U_theta,jm| - |U_jm| |`.
    pub max_magnitude_deviation: f64,
    /// `max |U_theta - D U D^dagger|`.
    pub max_phase_relation_residual: f64,
}

/// Level phases that absorb the given coupling phases.
///
/// Each coupling `(j, m, theta_jm)` with `j != m` multiplies `H_jm` by
/// `e^{i theta_jm}`. A solution needs `lambda_j - lambda_m = theta_jm` on
/// every edge; on a chain this always holds, on graphs with loops the phases
/// around each loop must add to zero modulo `2 pi`.
pub fn solve_level_phases(levels: usize, couplings: &[(usize, usize, f64)]) -> Result<Vec<f64>, FrameError> {
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); levels];
    for &(j, m, th) in couplings {
        adj[j].push((m, -th));
        adj[m].push((j, th));
    }
    let mut lambda: Vec<Option<f64>> = vec![None; levels];
    for root in 0..levels {
        if lambda[root].is_some() {
            continue;
        }
        lambda[root] = Some(0.0);
        let mut queue = VecDeque::from([root]);
        while let Some(m) = queue.pop_front() {
            let lm = lambda[m].unwrap_or(0.0);
            for &(j, th) in &adj[m] {
                if lambda[j].is_none() {
                    lambda[j] = Some(lm + th);
                    queue.push_back(j);
                }
            }
        }
    }
    let lambda: Vec<f64> = lambda.into_iter().map(|x| x.unwrap_or(0.0)).collect();
    for &(j, m, th) in couplings {
        let residual = crate::linalg::wrap_phase(lambda[j] - lambda[m] - th);
        if libm::fabs(residual) > 1e-9 {
            return Err(FrameError::ConstraintError { j, m, residual });
        }
    }
    Ok(lambda)
}

/// Compares a propagator with and without extra coupling phases.
///
/// `couplings` lists `(j, m, theta_jm)`. Any nonzero off-diagonal element of
/// `h` that is not listed is treated as a coupling with a fixed zero phase,
/// which is what makes loops constrain the phases.
pub fn gauge_invariance_check<const N: usize, F: Fn(f64) -> Matrix<N>>(
    h: F,
    duration: f64,
    couplings: &[(usize, usize, f64)],
    steps: usize,
    integrator: Integrator,
) -> Result<GaugeReport, FrameError> {
    let mut edges: Vec<(usize, usize, f64)> = couplings.to_vec();
    for k in 0..=8 {
        let hm = h(duration * k as f64 / 8.0);
        for j in 0..N {
            for m in 0..j {
                let listed = edges.iter().any(|&(a, b, _)| (a, b) == (j, m) || (a, b) == (m, j));
                if !listed && (hm[(j, m)].norm() > 0.0) {
                    edges.push((j, m, 0.0));
                }
            }
        }
    }
    let lambda = solve_level_phases(N, &edges)?;
    let mut phase = Matrix::<N>::zeros();
    for &(j, m, th) in &edges {
        phase[(j, m)] = cis(th);
        phase[(m, j)] = cis(-th);
    }
    let shifted = |t: f64| {
        let mut hm = h(t);
        for j in 0..N {
            for m in 0..N {
                if j != m && phase[(j, m)].norm() > 0.0 {
                    hm[(j, m)] *= phase[(j, m)];
                }
            }
        }
        hm
    };
    let u0 = propagate_fn(&h, duration, steps, integrator);
    let u1 = propagate_fn(shifted, duration, steps, integrator);
    let mut d = [C64::new(0.0, 0.0); N];
    for (dk, l) in d.iter_mut().zip(lambda.iter()) {
        *dk = cis(*l);
    }
    let dm = Matrix::<N>::diagonal(d);
    let predicted = dm * u0 * dm.dagger();
    let mut dev = 0.0f64;
    for j in 0..N {
        for m in 0..N {
            dev = dev.max(libm::fabs(u1[(j, m)].norm() - u0[(j, m)].norm()));
        }
    }
    Ok(GaugeReport { level_phases: lambda, max_magnitude_deviation: dev, max_phase_relation_residual: u1.max_diff(&predicted) })
}

/// Gauge check of one lambda pair under extra Stokes and pump phases.
pub fn pair_gauge_check(pair: &SpPair, err: &ErrorModel, cfg: &PropagationConfig, shift_s: f64, shift_p: f64) -> Result<GaugeReport, FrameError> {
    cfg.validate()?;
    pair.validate().map_err(FrameError::from)?;
    let duration = crate::pulses::effective_duration(pair, err);
    let h = |t: f64| crate::pulses::hamiltonian_from_rates(&rates(pair, err, t), pair.theta_s, pair.theta_p);
    gauge_invariance_check(h, duration, &[(2, 0, shift_p), (2, 1, shift_s)], cfg.steps_per_pair, cfg.integrator)
}
