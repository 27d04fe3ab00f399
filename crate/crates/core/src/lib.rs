//! Concatenated phase sequences for transitionless driving of a lambda system.
//!
//! The crate is `no_std` and only needs an allocator. It covers
//!
//! * [`linalg`]: fixed-size complex matrices, exponentials, fidelity, Bloch rotations;
//! * [`pulses`]: envelope catalog, synchronized Stokes/pump pairs, error model, Hamiltonian;
//! * [`frame`]: dark/bright and adiabatic frames, pair characterization, gauge checks;
//! * [`sim`]: time-ordered propagation and population traces;
//! * [`design`]: the three phase hierarchies and sequence assembly.
#![no_std]

extern crate alloc;

pub mod design;
pub mod error;
pub mod frame;
pub mod linalg;
pub mod pulses;
pub mod sequence;
pub mod sim;

pub use error::{DesignError, FrameError, LinalgError, PrecisionWarning, PulseError, SimError};
pub use frame::{EigenFrame, PairCharacterization};
pub use linalg::{BlochAxis, Mat2, Mat3, Matrix, State, State2, State3, C64};
pub use pulses::{Detuning, ErrorModel, PulseShape, SpPair};
pub use sequence::{PhaseRecord, Sequence};
pub use sim::{Integrator, PropagationConfig};
