//! Error types, one enum per module.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix has non-finite entries")]
    InvalidMatrix,
    #[error("state is not normalized (norm {norm})")]
    NormError { norm: f64 },
    #[error("axis is not a unit vector (|n|^2 = {norm_sqr})")]
    AxisNotNormalized { norm_sqr: f64 },
    #[error("matrix is singular")]
    Singular,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PulseError {
    #[error("time {t} outside the pulse window [0, {duration}]")]
    DomainError { t: f64, duration: f64 },
    #[error("invalid shape parameter: {0}")]
    InvalidShape(String),
    #[error("invalid pulse pair: {0}")]
    InvalidPair(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("Hamiltonian vanishes at t = {t}; eigenbasis undefined")]
    DegenerateError { t: f64 },
    #[error("dark state couples to the bright/excited block (leak {leak:e})")]
    NotBlockDiagonal { leak: f64 },
    #[error("coupling phases violate the gauge cycle constraint by {residual:e} on edge ({j}, {m})")]
    ConstraintError { j: usize, m: usize, residual: f64 },
    #[error("gauge check needs one phase per coupling ({expected}), got {got}")]
    PhaseCount { expected: usize, got: usize },
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("steps_per_pair must be at least {min}, got {got}")]
    StepCountError { min: usize, got: usize },
    #[error("step doubling changed the final populations by {change:e} (limit {limit:e})")]
    NotConverged { change: f64, limit: f64 },
    #[error("sample_stride must be positive")]
    InvalidStride,
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Best point found when a solver fails to reach its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct BestFound {
    pub phases: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DesignError {
    #[error("parameter out of domain: {0}")]
    DomainError(String),
    #[error("no restart reached the tolerance; best objective {:e}", best.objective)]
    NoSolution { best: BestFound },
    #[error("closed form only covers a maximally mixed target on a quarter-turn block; use the numeric designer")]
    UseNumeric,
    #[error("inconsistent hierarchy spec: {0}")]
    SpecError(String),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Raised alongside results whose finite-difference noise may dominate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("derivative orders above {max_reliable} are dominated by finite-difference noise")]
pub struct PrecisionWarning {
    pub max_reliable: usize,
}
