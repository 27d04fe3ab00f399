//! Ordered pulse-pair sequences and their phase bookkeeping.

use alloc::string::String;
use alloc::vec::Vec;

use crate::linalg::wrap_phase;
use crate::pulses::SpPair;

/// Where each phase contribution of one pair came from.
///
/// Level-1 and level-2 offsets shift both field phases of a pair, which
/// leaves `theta_sp` alone. Level-3 offsets shift the pump phase only, so
/// they rotate the dark/bright axis of a whole block.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PhaseRecord {
    pub base_theta_s: f64,
    pub base_theta_p: f64,
    pub level1: f64,
    pub level2: f64,
    pub level3: f64,
}

impl PhaseRecord {
    pub fn base(theta_s: f64, theta_p: f64) -> Self {
        Self { base_theta_s: theta_s, base_theta_p: theta_p, level1: 0.0, level2: 0.0, level3: 0.0 }
    }

    pub fn theta_s_unreduced(&self) -> f64 {
        self.base_theta_s + self.level1 + self.level2
    }

    pub fn theta_p_unreduced(&self) -> f64 {
        self.base_theta_p + self.level1 + self.level2 + self.level3
    }

    /// Reduced `(theta_s, theta_p)`.
    pub fn phases(&self) -> (f64, f64) {
        (wrap_phase(self.theta_s_unreduced()), wrap_phase(self.theta_p_unreduced()))
    }
}

/// Hierarchy metadata carried by designed sequences.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct HierarchyInfo {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub level3_mode: String,
    pub alpha: f64,
    pub gamma: f64,
    /// Level-1 step inside each unit.
    pub theta_21: f64,
    /// Cumulative level-2 offset per unit.
    pub level2_offsets: Vec<f64>,
    /// Cumulative level-3 offset per block.
    pub level3_offsets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Sequence {
    pub pairs: Vec<SpPair>,
    /// One record per pair, empty for hand-built sequences.
    #[cfg_attr(feature = "serde", serde(default))]
    pub provenance: Vec<PhaseRecord>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub hierarchy: Option<HierarchyInfo>,
}

impl Sequence {
    pub fn from_pairs(pairs: Vec<SpPair>) -> Self {
        Self { pairs, provenance: Vec::new(), hierarchy: None }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.pairs.iter().map(SpPair::duration).sum()
    }

    /// Largest mismatch between recorded and emitted phases.
    ///
    /// Designed sequences rebuild every phase with the same arithmetic, so
    /// a clean sequence returns exactly zero.
    pub fn audit(&self) -> Option<f64> {
        if self.provenance.len() != self.pairs.len() {
            return None;
        }
        let mut worst = 0.0f64;
        for (p, rec) in self.pairs.iter().zip(&self.provenance) {
            let (s, q) = rec.phases();
            worst = worst.max(libm::fabs(p.theta_s - s)).max(libm::fabs(p.theta_p - q));
        }
        Some(worst)
    }
}
