//! Published base pairs and the hierarchies they were tuned for.
//!
//! Gaussian pairs use `tau = 1` in a `6 tau` window with equal Stokes and
//! pump envelopes. The listed phase is the pump phase of the first pair; the
//! Stokes phase starts at zero.

use crate::design::assemble::{HierarchySpec, Level3Mode};
use crate::design::level1::level1_axis_phase;
use crate::design::level3::TargetState;
use crate::frame::PairCharacterization;
use crate::pulses::{PulseShape, SpPair};

/// A tuned base pair with its sequence layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub pair: SpPair,
    /// Dynamical phase the pair was tuned to, for cross-checks.
    pub alpha: Option<f64>,
    pub spec: HierarchySpec,
}

impl Preset {
    /// Base pair ready for assembly. Gaussian rows keep their tuned pump
    /// phase; shape presets get the pump phase that points the unit rotation
    /// at the target.
    pub fn base_pair(&self, ch: &PairCharacterization) -> SpPair {
        if self.alpha.is_some() {
            return self.pair.clone();
        }
        let block_phase = self.spec.n2 as f64 * ch.unit_phase();
        let rel = level1_axis_phase(block_phase, self.spec.target.chi);
        self.pair.with_phases(self.pair.theta_s, self.pair.theta_s + rel)
    }
}

struct GaussianRow {
    name: &'static str,
    amplitude: f64,
    detuning: f64,
    alpha: f64,
    theta_p: f64,
    n2: usize,
    n3: usize,
}

// Published values, rounded as printed.
#[allow(clippy::approx_constant)]
const GAUSSIAN: [GaussianRow; 5] = [
    GaussianRow { name: "2,1", amplitude: 1.099, detuning: 0.6574, alpha: 1.1868, theta_p: 1.5708, n2: 1, n3: 1 },
    GaussianRow { name: "4,3", amplitude: 2.381, detuning: 0.2802, alpha: 0.4479, theta_p: 0.5237, n2: 2, n3: 3 },
    GaussianRow { name: "4,5", amplitude: 2.381, detuning: 0.2802, alpha: 0.4479, theta_p: -0.9425, n2: 2, n3: 5 },
    GaussianRow { name: "8,1", amplitude: 1.1299, detuning: 0.1640, alpha: 0.2957, theta_p: 1.5708, n2: 4, n3: 1 },
    GaussianRow { name: "8,5", amplitude: 1.1299, detuning: 0.1640, alpha: 0.2957, theta_p: -0.9425, n2: 4, n3: 5 },
];

/// Names accepted by [`gaussian`], as `"N1*N2,N3"`.
pub fn gaussian_names() -> impl Iterator<Item = &'static str> {
    GAUSSIAN.iter().map(|r| r.name)
}

/// Gaussian preset targeting `(|g> + |f>) / sqrt(2)`, with PC blocks when
/// there is more than one.
pub fn gaussian(name: &str) -> Option<Preset> {
    let row = GAUSSIAN.iter().find(|r| r.name == name)?;
    let mode = if row.n3 > 1 { Level3Mode::Pc } else { Level3Mode::None };
    Some(Preset {
        name: row.name,
        pair: SpPair::new(PulseShape::gaussian(row.amplitude, 1.0), 1.0, row.detuning, 0.0, row.theta_p),
        alpha: Some(row.alpha),
        spec: HierarchySpec::new(row.n2, row.n3, mode, TargetState::default()),
    })
}

/// Non-Gaussian shapes tuned for a single two-pair unit in a unit window.
/// Phases start at zero; set the pump phase with
/// [`level1_axis_phase`](crate::design::level1::level1_axis_phase).
pub fn shapes() -> [Preset; 4] {
    let unit = HierarchySpec::default();
    let mk = |name, shape, detuning| Preset { name, pair: SpPair::new(shape, 1.0, detuning, 0.0, 0.0), alpha: None, spec: unit };
    [
        mk("sinusoidal", PulseShape::sinusoidal(3.044, 0.0, 1.0), 1.98),
        mk("sawtooth", PulseShape::sawtooth(3.935, 1.0), 1.865),
        mk("triangle", PulseShape::triangle(3.884, 0.5, 1.0), 2.18),
        mk("trapezoidal", PulseShape::trapezoidal(3.249, 0.2, 0.2, 1.0), 2.04),
    ]
}

/// Looks a preset up by name, Gaussian rows first.
pub fn find(name: &str) -> Option<Preset> {
    gaussian(name).or_else(|| shapes().into_iter().find(|p| p.name == name))
}
