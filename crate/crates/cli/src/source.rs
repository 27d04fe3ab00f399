//! Turns a [`Config`] into a base pair, a hierarchy and a sequence.

use std::path::Path;

use ctqd_core::design::assemble::{assemble, HierarchySpec};
use ctqd_core::design::level3::TargetState;
use ctqd_core::design::presets::{self, Preset};
use ctqd_core::frame::characterize_pair;
use ctqd_core::{ErrorModel, PairCharacterization, Sequence, SpPair};

use crate::config::Config;
use crate::CliError;

/// A designed sequence with everything that went into it.
#[derive(Debug, Clone)]
pub struct Designed {
    pub name: String,
    pub spec: HierarchySpec,
    /// Base pair after any preset phase alignment.
    pub pair: SpPair,
    pub characterization: PairCharacterization,
    pub sequence: Sequence,
}

/// A sequence ready to simulate.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub sequence: Sequence,
    pub target: TargetState,
    pub seed: Option<u64>,
}

fn lookup_preset(name: &str) -> Result<Preset, CliError> {
    presets::find(name).ok_or_else(|| {
        let known: Vec<&str> = presets::gaussian_names().chain(presets::shapes().iter().map(|p| p.name)).collect();
        CliError::Config(format!("unknown preset {name:?}; known: {}", known.join(", ")))
    })
}

/// Base pair of the config, if it names one.
pub fn base_pair(cfg: &Config) -> Result<Option<SpPair>, CliError> {
    match (&cfg.pair, &cfg.preset) {
        (Some(p), _) => Ok(Some(p.clone())),
        (None, Some(name)) => Ok(Some(lookup_preset(name)?.pair)),
        (None, None) => Ok(None),
    }
}

/// Designs the sequence described by `cfg`.
pub fn design(cfg: &Config) -> Result<Designed, CliError> {
    cfg.validate()?;
    let preset = cfg.preset.as_deref().map(lookup_preset).transpose()?;
    let raw = match (&cfg.pair, &preset) {
        (Some(pair), _) => {
            pair.validate().map_err(|e| CliError::Config(e.to_string()))?;
            pair.clone()
        }
        (None, Some(p)) => p.pair.clone(),
        (None, None) => return Err(CliError::Config("design needs a preset or a pair".into())),
    };
    let mut spec = preset.as_ref().map_or_else(HierarchySpec::default, |p| p.spec);
    cfg.hierarchy.apply(&mut spec);
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    if let Some(t) = &cfg.target {
        spec.target = t.resolve()?;
    }
    spec.validate()?;
    let ch = characterize_pair(&raw, &ErrorModel::NONE, &cfg.propagation)?;
    // An explicit pair keeps its own phases.
    let pair = match (&cfg.pair, preset) {
        (None, Some(p)) => Preset { spec, ..p }.base_pair(&ch),
        _ => raw,
    };
    let sequence = assemble(&spec, &pair, &ch)?;
    let label = cfg.preset.as_deref().unwrap_or("custom");
    let name = format!("R({},{}) {label}", spec.n1 * spec.n2, spec.n3);
    Ok(Designed { name, spec, pair, characterization: ch, sequence })
}

pub fn read_sequence(path: &Path) -> Result<Sequence, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let seq: Sequence = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for (i, p) in seq.pairs.iter().enumerate() {
        p.validate().map_err(|e| CliError::Config(format!("{}: pair {i}: {e}", path.display())))?;
    }
    Ok(seq)
}

/// Sequence to simulate: read from file or designed on the spot.
pub fn resolve(cfg: &Config) -> Result<Resolved, CliError> {
    cfg.validate()?;
    let explicit = cfg.target.map(|t| t.resolve()).transpose()?;
    if let Some(path) = &cfg.sequence {
        let sequence = read_sequence(path)?;
        return Ok(Resolved { sequence, target: explicit.unwrap_or_default(), seed: None });
    }
    if cfg.preset.is_none() && cfg.pair.is_none() {
        return Err(CliError::Config("need a preset, a pair or a sequence file".into()));
    }
    let d = design(cfg)?;
    Ok(Resolved { target: d.spec.target, seed: Some(d.spec.seed), sequence: d.sequence })
}
