//! Pulse envelopes, the synchronized Stokes/pump pair and systematic errors.
//!
//! Units: rates are multiples of the reference Rabi frequency, times are in
//! its inverse. The reference frequency itself never enters a computation.
//!
//! Basis order is `{|g>, |f>, |e>}`. The pump couples `g` and `e`, the Stokes
//! field couples `f` and `e`, and the excited-state row carries the field
//! phases: `<e|H|g> = Omega_p e^{i theta_p}`, `<e|H|f> = Omega_s e^{i theta_s}`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::PulseError;
use crate::linalg::{cis, Mat3, C64};

/// Relative slack on window boundaries.
const EDGE_TOL: f64 = 1e-12;

/// Stokes envelope in units of the reference frequency.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields))]
pub enum PulseShape {
    /// `A exp(-(t - center)^2 / width^2)` on `[0, duration]`.
    Gaussian { amplitude: f64, center: f64, width: f64, duration: f64 },
    /// `A |sin(pi t / T + phase)|`.
    Sinusoidal { amplitude: f64, phase: f64, duration: f64 },
    /// `A t / T`.
    Sawtooth { amplitude: f64, duration: f64 },
    /// Linear rise to `A` at `peak`, linear fall to zero at `T`.
    Triangle { amplitude: f64, peak: f64, duration: f64 },
    /// Rise over `[0, rise]`, flat top, fall to zero at `T`.
    ///
    /// `plateau` is read as a length when it does not exceed `rise`
    /// (flat top ends at `rise + plateau`), otherwise as the end time of the
    /// flat top. Either way the falling edge meets zero at `T` and the
    /// envelope is continuous.
    Trapezoidal { amplitude: f64, rise: f64, plateau: f64, duration: f64 },
    /// Piecewise-linear table. `times` starts at zero and increases strictly.
    Sampled { times: Vec<f64>, values: Vec<f64> },
}

impl PulseShape {
    /// Gaussian of width `tau` centred in a `6 tau` window.
    pub fn gaussian(amplitude: f64, tau: f64) -> Self {
        Self::Gaussian { amplitude, center: 3.0 * tau, width: tau, duration: 6.0 * tau }
    }

    pub fn sinusoidal(amplitude: f64, phase: f64, duration: f64) -> Self {
        Self::Sinusoidal { amplitude, phase, duration }
    }

    pub fn sawtooth(amplitude: f64, duration: f64) -> Self {
        Self::Sawtooth { amplitude, duration }
    }

    pub fn triangle(amplitude: f64, peak: f64, duration: f64) -> Self {
        Self::Triangle { amplitude, peak, duration }
    }

    pub fn trapezoidal(amplitude: f64, rise: f64, plateau: f64, duration: f64) -> Self {
        Self::Trapezoidal { amplitude, rise, plateau, duration }
    }

    pub fn sampled(times: Vec<f64>, values: Vec<f64>) -> Result<Self, PulseError> {
        let s = Self::Sampled { times, values };
        s.validate()?;
        Ok(s)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Gaussian { .. } => "gaussian",
            Self::Sinusoidal { .. } => "sinusoidal",
            Self::Sawtooth { .. } => "sawtooth",
            Self::Triangle { .. } => "triangle",
            Self::Trapezoidal { .. } => "trapezoidal",
            Self::Sampled { .. } => "sampled",
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            Self::Gaussian { duration, .. }
            | Self::Sinusoidal { duration, .. }
            | Self::Sawtooth { duration, .. }
            | Self::Triangle { duration, .. }
            | Self::Trapezoidal { duration, .. } => *duration,
            Self::Sampled { times, .. } => times.last().copied().unwrap_or(0.0),
        }
    }

    /// Checks parameters for finiteness and internal consistency.
    pub fn validate(&self) -> Result<(), PulseError> {
        let bad = |msg: &str| Err(PulseError::InvalidShape(msg.into()));
        let fin = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Self::Gaussian { amplitude, center, width, duration } => {
                if !fin(&[*amplitude, *center, *width, *duration]) || *width <= 0.0 || *duration <= 0.0 || *amplitude < 0.0 {
                    return bad("gaussian needs finite amplitude >= 0, width > 0 and duration > 0");
                }
            }
            Self::Sinusoidal { amplitude, phase, duration } => {
                if !fin(&[*amplitude, *phase, *duration]) || *duration <= 0.0 || *amplitude < 0.0 {
                    return bad("sinusoidal needs finite amplitude >= 0 and duration > 0");
                }
            }
            Self::Sawtooth { amplitude, duration } => {
                if !fin(&[*amplitude, *duration]) || *duration <= 0.0 || *amplitude < 0.0 {
                    return bad("sawtooth needs finite amplitude >= 0 and duration > 0");
                }
            }
            Self::Triangle { amplitude, peak, duration } => {
                if !fin(&[*amplitude, *peak, *duration]) || *amplitude < 0.0 || !(*peak > 0.0 && *peak < *duration) {
                    return bad("triangle needs 0 < peak < duration");
                }
            }
            Self::Trapezoidal { amplitude, rise, plateau, duration } => {
                if !fin(&[*amplitude, *rise, *plateau, *duration]) || *amplitude < 0.0 || *rise <= 0.0 || *plateau < 0.0 {
                    return bad("trapezoidal needs rise > 0 and plateau >= 0");
                }
                if self.plateau_end() >= *duration {
                    return bad("trapezoidal flat top must end before the pulse does");
                }
            }
            Self::Sampled { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return bad("sampled shape needs at least two (time, value) rows");
                }
                if times[0] != 0.0 {
                    return bad("sampled shape must start at t = 0");
                }
                if times.windows(2).any(|w| w[1] <= w[0]) || !fin(times) {
                    return bad("sampled times must increase strictly");
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return bad("sampled values must be finite and non-negative");
                }
            }
        }
        Ok(())
    }

    fn plateau_end(&self) -> f64 {
        match self {
            Self::Trapezoidal { rise, plateau, .. } => {
                if plateau <= rise {
                    rise + plateau
                } else {
                    *plateau
                }
            }
            _ => f64::NAN,
        }
    }

    /// Envelope value at `t`, rejecting times outside `[0, T]`.
    pub fn eval(&self, t: f64) -> Result<f64, PulseError> {
        let d = self.duration();
        let slack = EDGE_TOL * d.max(1.0);
        if !(t >= -slack && t <= d + slack) {
            return Err(PulseError::DomainError { t, duration: d });
        }
        Ok(self.eval_clamped(t))
    }

    /// Envelope value with `t` clamped into the window.
    pub fn eval_clamped(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.duration());
        match self {
            Self::Gaussian { amplitude, center, width, .. } => {
                let x = (t - center) / width;
                amplitude * libm::exp(-x * x)
            }
            Self::Sinusoidal { amplitude, phase, duration } => amplitude * libm::fabs(libm::sin(core::f64::consts::PI * t / duration + phase)),
            Self::Sawtooth { amplitude, duration } => amplitude * t / duration,
            Self::Triangle { amplitude, peak, duration } => {
                if t <= *peak {
                    amplitude * t / peak
                } else {
                    amplitude * (t - duration) / (peak - duration)
                }
            }
            Self::Trapezoidal { amplitude, rise, duration, .. } => {
                let end = self.plateau_end();
                if t <= *rise {
                    amplitude * t / rise
                } else if t <= end {
                    *amplitude
                } else {
                    amplitude * (t - duration) / (end - duration)
                }
            }
            Self::Sampled { times, values } => {
                let k = segment(times, t);
                let (t0, t1) = (times[k], times[k + 1]);
                let w = (t - t0) / (t1 - t0);
                values[k] * (1.0 - w) + values[k + 1] * w
            }
        }
    }

    /// Time derivative of the envelope. At kinks the right-hand slope is used.
    pub fn derivative(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.duration());
        match self {
            Self::Gaussian { amplitude, center, width, .. } => {
                let x = (t - center) / width;
                -2.0 * x / width * amplitude * libm::exp(-x * x)
            }
            Self::Sinusoidal { amplitude, phase, duration } => {
                let w = core::f64::consts::PI / duration;
                let arg = w * t + phase;
                let s = libm::sin(arg);
                let sign = if s >= 0.0 { 1.0 } else { -1.0 };
                amplitude * w * libm::cos(arg) * sign
            }
            Self::Sawtooth { amplitude, duration } => amplitude / duration,
            Self::Triangle { amplitude, peak, duration } => {
                if t < *peak {
                    amplitude / peak
                } else {
                    amplitude / (peak - duration)
                }
            }
            Self::Trapezoidal { amplitude, rise, duration, .. } => {
                let end = self.plateau_end();
                if t < *rise {
                    amplitude / rise
                } else if t < end {
                    0.0
                } else {
                    amplitude / (end - duration)
                }
            }
            Self::Sampled { times, values } => {
                let k = segment(times, t);
                (values[k + 1] - values[k]) / (times[k + 1] - times[k])
            }
        }
    }

    /// Interior points where the envelope has a kink.
    pub fn knots(&self) -> Vec<f64> {
        match self {
            Self::Triangle { peak, .. } => alloc::vec![*peak],
            Self::Sinusoidal { phase, duration, .. } => {
                // |sin| folds where its argument crosses a multiple of pi.
                let first = libm::ceil(*phase / core::f64::consts::PI) as i64;
                (first..)
                    .map(|k| (k as f64 * core::f64::consts::PI - phase) * duration / core::f64::consts::PI)
                    .skip_while(|t| *t <= 0.0)
                    .take_while(|t| *t < *duration)
                    .collect()
            }
            Self::Trapezoidal { rise, .. } => alloc::vec![*rise, self.plateau_end()],
            Self::Sampled { times, .. } => times[1..times.len() - 1].to_vec(),
            _ => Vec::new(),
        }
    }
}

fn segment(times: &[f64], t: f64) -> usize {
    match times.binary_search_by(|x| x.total_cmp(&t)) {
        Ok(i) => i.min(times.len() - 2),
        Err(i) => i.saturating_sub(1).min(times.len() - 2),
    }
}

/// Two-photon detuning of the excited level.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Detuning {
    Constant(f64),
    /// `scale * shape(t)`, sharing the pair's time axis.
    Shaped {
        scale: f64,
        shape: PulseShape,
    },
}

impl Detuning {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Constant(d) => *d,
            Self::Shaped { scale, shape } => scale * shape.eval_clamped(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Self::Constant(_) => 0.0,
            Self::Shaped { scale, shape } => scale * shape.derivative(t),
        }
    }
}

/// One Stokes pulse and one pump pulse applied together.
///
/// The pump envelope is `pump_ratio` times the Stokes envelope, so the
/// mixing angle `phi = atan(pump_ratio)` is constant. `pump_override`
/// replaces the pump envelope and exists to study broken synchronization.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct SpPair {
    pub shape: PulseShape,
    pub pump_ratio: f64,
    pub theta_s: f64,
    pub theta_p: f64,
    pub detuning: Detuning,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub pump_override: Option<PulseShape>,
}

impl SpPair {
    /// Synchronized pair with constant detuning.
    pub fn new(shape: PulseShape, pump_ratio: f64, detuning: f64, theta_s: f64, theta_p: f64) -> Self {
        Self { shape, pump_ratio, theta_s, theta_p, detuning: Detuning::Constant(detuning), pump_override: None }
    }

    pub fn with_phases(&self, theta_s: f64, theta_p: f64) -> Self {
        Self { theta_s, theta_p, ..self.clone() }
    }

    pub fn duration(&self) -> f64 {
        self.shape.duration()
    }

    pub fn mixing_angle(&self) -> f64 {
        libm::atan(self.pump_ratio)
    }

    pub fn theta_sp(&self) -> f64 {
        self.theta_s - self.theta_p
    }

    pub fn is_synchronized(&self) -> bool {
        self.pump_override.is_none()
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        self.shape.validate()?;
        if let Some(p) = &self.pump_override {
            p.validate()?;
        }
        if !(self.pump_ratio.is_finite() && self.pump_ratio >= 0.0) {
            return Err(PulseError::InvalidPair(format!("pump_ratio {} must be finite and >= 0", self.pump_ratio)));
        }
        if !(self.theta_s.is_finite() && self.theta_p.is_finite()) {
            return Err(PulseError::InvalidPair("phases must be finite".into()));
        }
        if let Detuning::Shaped { scale, shape } = &self.detuning {
            shape.validate()?;
            if !scale.is_finite() {
                return Err(PulseError::InvalidPair("detuning scale must be finite".into()));
            }
        } else if let Detuning::Constant(d) = self.detuning {
            if !d.is_finite() {
                return Err(PulseError::InvalidPair("detuning must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Static systematic deviations applied to a pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ErrorModel {
    /// Relative error on the Stokes amplitude.
    pub d_omega_s: f64,
    /// Relative error on the pump amplitude.
    pub d_omega_p: f64,
    /// Relative error on the detuning.
    pub d_delta: f64,
    /// Relative stretch of the pulse window.
    pub d_duration: f64,
    /// Additive shift of the excited level.
    pub stark: f64,
}

impl ErrorModel {
    pub const NONE: Self = Self { d_omega_s: 0.0, d_omega_p: 0.0, d_delta: 0.0, d_duration: 0.0, stark: 0.0 };

    /// Same relative error on both amplitudes.
    pub fn amplitude(delta: f64) -> Self {
        Self { d_omega_s: delta, d_omega_p: delta, ..Self::NONE }
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        let all = [self.d_omega_s, self.d_omega_p, self.d_delta, self.d_duration, self.stark];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(PulseError::InvalidPair("error model entries must be finite".into()));
        }
        if 1.0 + self.d_duration <= 0.0 {
            return Err(PulseError::InvalidPair("duration error must keep the window positive".into()));
        }
        Ok(())
    }

    pub fn time_scale(&self) -> f64 {
        1.0 + self.d_duration
    }

    /// Effective mixing angle once amplitude errors are applied.
    pub fn mixing_angle(&self, pair: &SpPair) -> f64 {
        libm::atan2(pair.pump_ratio * (1.0 + self.d_omega_p), 1.0 + self.d_omega_s)
    }
}

/// Instantaneous couplings after errors are applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub omega_p: f64,
    pub omega_s: f64,
    pub delta: f64,
}

/// Window length after the duration error.
pub fn effective_duration(pair: &SpPair, err: &ErrorModel) -> f64 {
    pair.duration() * err.time_scale()
}

/// Couplings at time `t` of the (possibly stretched) window. No domain check.
pub fn rates(pair: &SpPair, err: &ErrorModel, t: f64) -> Rates {
    let tau = t / err.time_scale();
    let env_s = pair.shape.eval_clamped(tau);
    let env_p = match &pair.pump_override {
        Some(p) => p.eval_clamped(tau),
        None => env_s,
    };
    Rates {
        omega_p: (1.0 + err.d_omega_p) * pair.pump_ratio * env_p,
        omega_s: (1.0 + err.d_omega_s) * env_s,
        delta: (1.0 + err.d_delta) * pair.detuning.value(tau) + err.stark,
    }
}

/// Time derivatives of [`rates`].
pub fn rates_derivative(pair: &SpPair, err: &ErrorModel, t: f64) -> Rates {
    let k = err.time_scale();
    let tau = t / k;
    let ds = pair.shape.derivative(tau) / k;
    let dp = match &pair.pump_override {
        Some(p) => p.derivative(tau) / k,
        None => ds,
    };
    Rates {
        omega_p: (1.0 + err.d_omega_p) * pair.pump_ratio * dp,
        omega_s: (1.0 + err.d_omega_s) * ds,
        delta: (1.0 + err.d_delta) * pair.detuning.derivative(tau) / k,
    }
}

/// Lambda-system Hamiltonian from given couplings and phases.
pub fn hamiltonian_from_rates(r: &Rates, theta_s: f64, theta_p: f64) -> Mat3 {
    let mut h = Mat3::zeros();
    let ep = cis(theta_p) * r.omega_p;
    let es = cis(theta_s) * r.omega_s;
    h[(2, 0)] = ep;
    h[(0, 2)] = ep.conj();
    h[(2, 1)] = es;
    h[(1, 2)] = es.conj();
    h[(2, 2)] = C64::new(r.delta, 0.0);
    h
}

/// Hamiltonian at time `t`, rejecting times outside the stretched window.
pub fn build_hamiltonian(pair: &SpPair, err: &ErrorModel, t: f64) -> Result<Mat3, PulseError> {
    let d = effective_duration(pair, err);
    let slack = EDGE_TOL * d.max(1.0);
    if !(t >= -slack && t <= d + slack) {
        return Err(PulseError::DomainError { t, duration: d });
    }
    Ok(hamiltonian_from_rates(&rates(pair, err, t), pair.theta_s, pair.theta_p))
}

/// Evaluates `shape` at a time, the public face of the waveform catalog.
pub fn eval_shape(shape: &PulseShape, t: f64) -> Result<f64, PulseError> {
    shape.eval(t)
}
