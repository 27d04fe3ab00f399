//! JSON configuration shared by every subcommand.
//!
//! A file holds any subset of the keys below; missing keys take their
//! defaults and unknown keys are rejected. Command-line flags are applied on
//! top of the file. The schema lives in `schema/config.schema.json`.

use std::path::{Path, PathBuf};

use ctqd_core::design::assemble::{HierarchySpec, Level2Method, Level3Mode};
use ctqd_core::design::level3::TargetState;
use ctqd_core::{ErrorModel, PropagationConfig, SpPair, State3};
use serde::{Deserialize, Serialize};

use crate::scan::{Axis, Metric, Param};
use crate::CliError;

/// JSON schema of [`Config`].
pub const SCHEMA: &str = include_str!("../schema/config.schema.json");

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Named base pair with its tuned hierarchy.
    pub preset: Option<String>,
    /// Explicit base pair; replaces the preset pair.
    pub pair: Option<SpPair>,
    /// Hierarchy keys layered over the preset layout.
    pub hierarchy: HierarchyPatch,
    /// Previously designed sequence; excludes `preset` and `pair`.
    pub sequence: Option<PathBuf>,
    /// Solver seed.
    pub seed: Option<u64>,
    pub target: Option<TargetSpec>,
    /// Systematic errors applied when simulating and tracing, and as the
    /// base point of scans.
    pub errors: ErrorModel,
    pub propagation: PropagationConfig,
    pub initial: Level,
    pub scan: ScanSettings,
    pub trace: TraceSettings,
}

/// Optional overrides of a hierarchy layout.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HierarchyPatch {
    pub n2: Option<usize>,
    pub n3: Option<usize>,
    pub level3_mode: Option<Level3Mode>,
    pub level2_method: Option<Level2Method>,
}

impl HierarchyPatch {
    pub fn apply(&self, spec: &mut HierarchySpec) {
        if let Some(n2) = self.n2 {
            spec.n2 = n2;
        }
        if let Some(n3) = self.n3 {
            spec.n3 = n3;
        }
        if let Some(m) = self.level3_mode {
            spec.level3_mode = m;
        }
        if let Some(m) = self.level2_method {
            spec.level2_method = m;
        }
    }
}

/// Target given by any of its angle, relative phase and `|f>` population.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSpec {
    pub alpha: Option<f64>,
    pub chi: Option<f64>,
    pub p_f: Option<f64>,
}

impl TargetSpec {
    pub fn resolve(&self) -> Result<TargetState, CliError> {
        Ok(TargetState::from_parts(self.alpha, self.chi, self.p_f)?)
    }
}

/// Initial basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    #[default]
    G,
    F,
    E,
}

impl Level {
    pub fn state(self) -> State3 {
        State3::basis(self as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanSettings {
    pub x: Axis,
    pub y: Axis,
    pub metrics: Vec<Metric>,
    /// Worker threads; all available cores when absent.
    pub workers: Option<usize>,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self { x: Axis::new(Param::DOmegaS, -0.5, 0.5, 101), y: Axis::new(Param::DDelta, -0.5, 0.5, 101), metrics: vec![Metric::F, Metric::PE], workers: None }
    }
}

impl ScanSettings {
    pub fn validate(&self) -> Result<(), CliError> {
        self.x.validate()?;
        self.y.validate()?;
        if self.x.param == self.y.param {
            return Err(CliError::Config(format!("scan axes must differ, both are {}", self.x.param.as_str())));
        }
        if self.metrics.is_empty() {
            return Err(CliError::Config("scan needs at least one metric".into()));
        }
        for (i, m) in self.metrics.iter().enumerate() {
            if self.metrics[..i].contains(m) {
                return Err(CliError::Config(format!("metric {} listed twice", m.as_str())));
            }
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSettings {
    /// Adds real and imaginary amplitude columns.
    pub amplitudes: bool,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a config file. Relative `sequence` paths are taken relative to
    /// the file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let (Some(seq), Some(dir)) = (&cfg.sequence, path.parent()) {
            if seq.is_relative() {
                cfg.sequence = Some(dir.join(seq));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.sequence.is_some() && (self.preset.is_some() || self.pair.is_some()) {
            return Err(CliError::Config("give either a sequence file or a preset/pair, not both".into()));
        }
        if self.sequence.is_some() && self.hierarchy != HierarchyPatch::default() {
            return Err(CliError::Config("hierarchy keys need a preset or pair, not a sequence file".into()));
        }
        if let Some(t) = &self.target {
            t.resolve()?;
        }
        self.errors.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.propagation.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.scan.validate()
    }
}
