//! Absolute per-pair phases from the three hierarchies.
//!
//! Pairs are laid out block by block, unit by unit. Pair `j` of unit `u` in
//! block `b` carries `j * theta_21` (level 1) and the cumulative offset of
//! unit `u` (level 2) on both fields, plus the level-3 offset of block `b` on
//! the pump phase alone.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_4;

use crate::design::level1::level1_phase;
use crate::design::level2::{level2_offsets, level2_phases_numeric};
use crate::design::level3::{level3_fc_numeric_with, level3_fc_three, level3_pc_numeric_with, level3_pc_three, phase_alignment, RotationModel, TargetState};
use crate::design::simplex::DEFAULT_SEED;
use crate::error::DesignError;
use crate::frame::PairCharacterization;
use crate::linalg::wrap_phase;
use crate::pulses::SpPair;
use crate::sequence::{HierarchyInfo, PhaseRecord, Sequence};

/// Pairs per level-1 unit.
pub const N1: usize = 2;

/// What the level-3 offsets compensate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Level3Mode {
    /// Population of `|f>` only.
    Pc,
    /// Overlap with the full target state.
    Fc,
    /// A single block, no level-3 offsets.
    #[default]
    None,
}

impl Level3Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Pc => "pc",
            Self::Fc => "fc",
            Self::None => "none",
        }
    }
}

/// How level-2 offsets are found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Level2Method {
    /// Closed forms where they exist, the numeric search otherwise.
    #[default]
    Auto,
    /// Always the numeric search.
    Numeric,
}

/// Shape of a concatenated sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct HierarchySpec {
    /// Pairs per unit; must be two.
    pub n1: usize,
    /// Units per block.
    pub n2: usize,
    /// Blocks.
    pub n3: usize,
    pub level3_mode: Level3Mode,
    pub target: TargetState,
    pub level2_method: Level2Method,
    pub seed: u64,
}

impl Default for HierarchySpec {
    fn default() -> Self {
        Self { n1: N1, n2: 1, n3: 1, level3_mode: Level3Mode::None, target: TargetState::default(), level2_method: Level2Method::Auto, seed: DEFAULT_SEED }
    }
}

impl HierarchySpec {
    pub fn new(n2: usize, n3: usize, level3_mode: Level3Mode, target: TargetState) -> Self {
        Self { n2, n3, level3_mode, target, ..Self::default() }
    }

    /// Total number of pairs.
    pub fn len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<(), DesignError> {
        let fail = |m: String| Err(DesignError::SpecError(m));
        if self.n1 != N1 {
            return fail(alloc::format!("n1 must be {N1}, got {}", self.n1));
        }
        if self.n2 == 0 || self.n3 == 0 {
            return fail(alloc::format!("n2 and n3 must be positive, got n2 = {}, n3 = {}", self.n2, self.n3));
        }
        match self.level3_mode {
            Level3Mode::None if self.n3 != 1 => fail(alloc::format!("level-3 mode none needs n3 = 1, got {}", self.n3)),
            Level3Mode::Pc | Level3Mode::Fc if self.n3 < 2 => fail(alloc::format!("level-3 mode {} needs at least two blocks", self.level3_mode.as_str())),
            _ if !(self.target.alpha.is_finite() && self.target.chi.is_finite()) => fail("target angles must be finite".into()),
            _ => Ok(()),
        }
    }
}

/// Level-2 offsets for `spec`, one per unit.
pub fn design_level2(spec: &HierarchySpec, ch: &PairCharacterization) -> Result<Vec<f64>, DesignError> {
    let r = ch.r.norm();
    match spec.level2_method {
        Level2Method::Auto => level2_offsets(ch.alpha, r, spec.n2, spec.seed),
        Level2Method::Numeric if spec.n2 == 1 => Ok(alloc::vec![0.0]),
        Level2Method::Numeric => Ok(level2_phases_numeric(ch.alpha, r, spec.n2, spec.seed)?.offsets),
    }
}

/// Ground-space model of one block built from `base_pair`.
pub fn block_model(spec: &HierarchySpec, base_pair: &SpPair, ch: &PairCharacterization) -> RotationModel {
    RotationModel::for_blocks(base_pair.mixing_angle(), spec.n2 as f64 * ch.unit_phase(), base_pair.theta_sp())
}

/// Level-3 offsets on the pump phase, one per block.
///
/// Blocks close to an equal-weight quarter turn are designed on the
/// reference model, by closed form for three blocks and numerically
/// otherwise, and mapped back. Other blocks go through the numeric search on
/// their own model. PC designs fix the population only, so their offsets are
/// shifted together afterwards to put the result at the target's relative
/// phase.
pub fn design_level3(spec: &HierarchySpec, model: &RotationModel) -> Result<Vec<f64>, DesignError> {
    let reference = RotationModel::REFERENCE;
    let on_reference = model.reference_sign().is_some();
    match spec.level3_mode {
        Level3Mode::None => Ok(alloc::vec![0.0]),
        Level3Mode::Pc => {
            let p_f = spec.target.p_f();
            let thetas = if on_reference {
                let x0 = model.to_reference(&[0.0])?[0];
                let c = if spec.n3 == 3 {
                    let pc = level3_pc_three(p_f)?;
                    alloc::vec![0.0, pc.theta_21, pc.theta_21 + pc.theta_32]
                } else {
                    level3_pc_numeric_with(&reference, p_f, spec.n3, spec.seed)?.thetas
                };
                model.from_reference(&c.iter().map(|c| c + x0).collect::<Vec<_>>())?
            } else {
                level3_pc_numeric_with(model, p_f, spec.n3, spec.seed)?.thetas
            };
            let shift = phase_alignment(model, &thetas, spec.target.chi);
            Ok(thetas.iter().map(|t| t + shift).collect())
        }
        Level3Mode::Fc if on_reference => {
            let target = model.reference_target(&spec.target)?;
            let equal_weight = libm::fabs(target.alpha - FRAC_PI_4) <= 1e-12;
            let c = if spec.n3 == 3 && equal_weight {
                let x0 = model.to_reference(&[0.0])?[0];
                level3_fc_three(&target, x0)?.thetas().to_vec()
            } else {
                level3_fc_numeric_with(&reference, &target, spec.n3, spec.seed)?.thetas
            };
            model.from_reference(&c)
        }
        Level3Mode::Fc => Ok(level3_fc_numeric_with(model, &spec.target, spec.n3, spec.seed)?.thetas),
    }
}

/// Builds the full sequence from a base pair and its characterization.
pub fn assemble(spec: &HierarchySpec, base_pair: &SpPair, ch: &PairCharacterization) -> Result<Sequence, DesignError> {
    spec.validate()?;
    base_pair.validate().map_err(|e| DesignError::SpecError(alloc::format!("{e}")))?;
    let theta_21 = level1_phase(ch.alpha);
    let level2 = design_level2(spec, ch)?;
    let model = block_model(spec, base_pair, ch);
    let level3 = design_level3(spec, &model)?;
    Ok(build(spec, base_pair, ch, theta_21, level2, level3))
}

/// Lays out the pairs for precomputed offsets. Every emitted phase is the
/// reduction of its record's sum, so [`Sequence::audit`] returns zero.
pub fn build(spec: &HierarchySpec, base_pair: &SpPair, ch: &PairCharacterization, theta_21: f64, level2: Vec<f64>, level3: Vec<f64>) -> Sequence {
    let mut pairs = Vec::with_capacity(spec.len());
    let mut provenance = Vec::with_capacity(spec.len());
    for &l3 in &level3 {
        for &l2 in &level2 {
            for j in 0..spec.n1 {
                let rec = PhaseRecord { base_theta_s: base_pair.theta_s, base_theta_p: base_pair.theta_p, level1: j as f64 * theta_21, level2: l2, level3: l3 };
                let (s, p) = rec.phases();
                pairs.push(base_pair.with_phases(s, p));
                provenance.push(rec);
            }
        }
    }
    let hierarchy = HierarchyInfo {
        n1: spec.n1,
        n2: spec.n2,
        n3: spec.n3,
        level3_mode: spec.level3_mode.as_str().into(),
        alpha: ch.alpha,
        gamma: ch.gamma,
        theta_21,
        level2_offsets: level2,
        level3_offsets: level3,
    };
    Sequence { pairs, provenance, hierarchy: Some(hierarchy) }
}

/// Reduced differences between consecutive entries.
pub fn differences(offsets: &[f64]) -> Vec<f64> {
    offsets.windows(2).map(|w| wrap_phase(w[1] - w[0])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::C64;
    use crate::pulses::PulseShape;
    use core::f64::consts::PI;

    fn pair() -> SpPair {
        SpPair::new(PulseShape::gaussian(2.381, 1.0), 1.0, 0.2802, 0.0, 0.5237)
    }

    fn ch(alpha: f64) -> PairCharacterization {
        PairCharacterization { r: C64::new(0.1, 0.0), s: libm::sqrt(0.99), alpha, gamma: alpha + PI / 8.0 }
    }

    #[test]
    fn validation() {
        let t = TargetState::default();
        assert!(HierarchySpec::new(1, 1, Level3Mode::None, t).validate().is_ok());
        assert!(HierarchySpec::new(1, 3, Level3Mode::None, t).validate().is_err());
        assert!(HierarchySpec::new(1, 1, Level3Mode::Pc, t).validate().is_err());
        assert!(HierarchySpec::new(0, 1, Level3Mode::None, t).validate().is_err());
        let bad_n1 = HierarchySpec { n1: 3, ..HierarchySpec::default() };
        assert!(matches!(bad_n1.validate(), Err(DesignError::SpecError(_))));
    }

    #[test]
    fn single_unit_steps_by_level1_phase() {
        let spec = HierarchySpec::default();
        let seq = assemble(&spec, &pair(), &ch(0.4479)).unwrap();
        assert_eq!(seq.len(), 2);
        let step = wrap_phase(seq.pairs[1].theta_p - seq.pairs[0].theta_p);
        assert!((step - 2.2458).abs() < 1e-4);
        assert!((seq.pairs[1].theta_s - 2.2458).abs() < 1e-4);
        assert_eq!(seq.audit(), Some(0.0));
    }

    #[test]
    fn two_units_carry_cascade_offset() {
        let a = 0.4479;
        let spec = HierarchySpec::new(2, 1, Level3Mode::None, TargetState::default());
        let seq = assemble(&spec, &pair(), &ch(a)).unwrap();
        assert_eq!(seq.len(), 4);
        let rec = &seq.provenance;
        assert_eq!(rec[0].level2, 0.0);
        assert!((wrap_phase(rec[2].level2 - (PI - 4.0 * a))).abs() < 1e-12);
        assert_eq!(rec[2].level2, rec[3].level2);
        assert_eq!(seq.audit(), Some(0.0));
    }

    #[test]
    fn level3_moves_pump_only() {
        // unit_phase = 2 (alpha - gamma) = -pi/4, so two units give a quarter turn.
        let spec = HierarchySpec::new(2, 3, Level3Mode::Pc, TargetState::population(0.5).unwrap());
        let base = pair();
        let c = ch(0.4479);
        let seq = assemble(&spec, &base, &c).unwrap();
        assert_eq!(seq.len(), 12);
        for (i, rec) in seq.provenance.iter().enumerate() {
            assert_eq!(rec.theta_s_unreduced(), base.theta_s + rec.level1 + rec.level2, "pair {i}");
        }
        let h = seq.hierarchy.unwrap();
        let d = differences(&h.level3_offsets);
        assert!(d.iter().any(|x| (x.abs() - 2.0944).abs() < 1e-4), "{d:?}");
        let model = block_model(&spec, &base, &c);
        assert!((model.population(&h.level3_offsets, 0.0) - 0.5).abs() < 1e-9);
        assert!(model.final_phase(&h.level3_offsets).abs() < 1e-9);
    }
}
