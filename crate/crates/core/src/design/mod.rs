//! Phase hierarchy design.
//!
//! * [`level1`]: the phase step inside a two-pair unit;
//! * [`level2`]: offsets between units against dynamical phase errors;
//! * [`level3`]: offsets between blocks for population or fidelity targets;
//! * [`assemble`]: absolute per-pair phases with provenance;
//! * [`presets`]: tuned base pairs.

pub mod assemble;
pub mod deriv;
pub mod level1;
pub mod level2;
pub mod level3;
pub mod presets;
pub mod series;
pub mod simplex;
