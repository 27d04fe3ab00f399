//! Two-dimensional error scans.
//!
//! Every grid point is an independent simulation. Rows (fixed `dx`) are
//! split into contiguous chunks, one per worker, and gathered by index, so
//! the output does not depend on the worker count.

use ctqd_core::design::level3::TargetState;
use ctqd_core::linalg::fidelity;
use ctqd_core::sim::EnvelopeCache;
use ctqd_core::{ErrorModel, PropagationConfig, Sequence, State3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Error-model entry swept along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    DOmegaS,
    DOmegaP,
    DDelta,
    DDuration,
    Stark,
}

impl Param {
    pub const ALL: [Param; 5] = [Self::DOmegaS, Self::DOmegaP, Self::DDelta, Self::DDuration, Self::Stark];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::DOmegaS => "d_omega_s",
            Self::DOmegaP => "d_omega_p",
            Self::DDelta => "d_delta",
            Self::DDuration => "d_duration",
            Self::Stark => "stark",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.as_str() == s)
    }

    /// Copy of `base` with this entry set to `value`.
    pub fn set(self, base: &ErrorModel, value: f64) -> ErrorModel {
        let mut e = *base;
        match self {
            Self::DOmegaS => e.d_omega_s = value,
            Self::DOmegaP => e.d_omega_p = value,
            Self::DDelta => e.d_delta = value,
            Self::DDuration => e.d_duration = value,
            Self::Stark => e.stark = value,
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    /// Fidelity with the target state.
    F,
    /// Excited-state population.
    #[serde(rename = "P_e")]
    PE,
    /// Population of `|f>`.
    #[serde(rename = "P_f")]
    PF,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Self::F, Self::PE, Self::PF];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::F => "F",
            Self::PE => "P_e",
            Self::PF => "P_f",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

/// Evenly spaced axis including both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(param: Param, min: f64, max: f64, count: usize) -> Self {
        Self { param, min, max, count }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let name = self.param.as_str();
        if self.count < 2 {
            return Err(CliError::Config(format!("axis {name} needs count >= 2, got {}", self.count)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min <= self.max) {
            return Err(CliError::Config(format!("axis {name} needs finite min <= max, got [{}, {}]", self.min, self.max)));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            return self.max;
        }
        self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.value(i))
    }
}

/// Metrics of one final state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMetrics {
    pub f: f64,
    pub p_e: f64,
    pub p_f: f64,
}

impl PointMetrics {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::F => self.f,
            Metric::PE => self.p_e,
            Metric::PF => self.p_f,
        }
    }
}

/// Simulates `seq` from `init` under `err` and scores the final state.
pub fn evaluate(seq: &Sequence, err: &ErrorModel, init: &State3, target: &TargetState, cfg: &PropagationConfig) -> Result<PointMetrics, CliError> {
    evaluate_cached(&mut EnvelopeCache::new(), seq, err, init, target, cfg)
}

/// As [`evaluate`], reusing envelopes already integrated under `err`.
pub fn evaluate_cached(
    cache: &mut EnvelopeCache,
    seq: &Sequence,
    err: &ErrorModel,
    init: &State3,
    target: &TargetState,
    cfg: &PropagationConfig,
) -> Result<PointMetrics, CliError> {
    let psi = cache.propagate(&seq.pairs, err, cfg)?.apply(init);
    let pops = psi.populations();
    let unit = |x: f64| x.clamp(0.0, 1.0);
    Ok(PointMetrics { f: unit(fidelity(&target.state3(), &psi)?), p_e: unit(pops[2]), p_f: unit(pops[1]) })
}

/// Row-major grid: `x` outer, `y` inner, one value per metric per point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanGrid {
    pub x: Axis,
    pub y: Axis,
    pub metrics: Vec<Metric>,
    /// `count_x * count_y * metrics.len()` values.
    pub values: Vec<f64>,
}

impl ScanGrid {
    pub fn len(&self) -> usize {
        self.x.count * self.y.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Metric values at flat point index `k`.
    pub fn point(&self, k: usize) -> &[f64] {
        let m = self.metrics.len();
        &self.values[k * m..(k + 1) * m]
    }

    /// `(dx, dy)` of flat point index `k`.
    pub fn coords(&self, k: usize) -> (f64, f64) {
        (self.x.value(k / self.y.count), self.y.value(k % self.y.count))
    }

    /// One metric over the whole grid.
    pub fn column(&self, metric: Metric) -> Option<Vec<f64>> {
        let j = self.metrics.iter().position(|&m| m == metric)?;
        Some((0..self.len()).map(|k| self.point(k)[j]).collect())
    }

    /// Fraction of grid points where `keep` holds for `metric`.
    pub fn area(&self, metric: Metric, keep: impl Fn(f64) -> bool) -> Option<f64> {
        let col = self.column(metric)?;
        Some(col.iter().filter(|&&v| keep(v)).count() as f64 / col.len() as f64)
    }
}

/// Everything a scan needs besides the sequences and the grid.
#[derive(Debug, Clone, Copy)]
pub struct ScanSetup {
    pub target: TargetState,
    pub initial: State3,
    /// Entries not swept keep their values from here.
    pub base: ErrorModel,
    pub propagation: PropagationConfig,
}

/// Scans one sequence on `workers` threads (all cores if `None`).
pub fn run_scan(setup: &ScanSetup, seq: &Sequence, x: Axis, y: Axis, metrics: &[Metric], workers: Option<usize>) -> Result<ScanGrid, CliError> {
    Ok(run_scan_many(setup, &[seq], x, y, metrics, workers)?.remove(0))
}

/// Scans several sequences over the same grid, one grid each. Sequences
/// built on the same base pair share its integration at every point.
pub fn run_scan_many(setup: &ScanSetup, seqs: &[&Sequence], x: Axis, y: Axis, metrics: &[Metric], workers: Option<usize>) -> Result<Vec<ScanGrid>, CliError> {
    x.validate()?;
    y.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build().map_err(|e| CliError::Config(format!("cannot start workers: {e}")))?;
    let n = pool.current_num_threads().min(x.count);
    let per = x.count.div_ceil(n);
    let chunks: Vec<std::ops::Range<usize>> = (0..n).map(|c| (c * per).min(x.count)..((c + 1) * per).min(x.count)).collect();
    // Values of rows `range`, one vector per sequence.
    let rows = |range: std::ops::Range<usize>| -> Result<Vec<Vec<f64>>, CliError> {
        let mut out = vec![Vec::with_capacity(range.len() * y.count * metrics.len()); seqs.len()];
        let mut cache = EnvelopeCache::new();
        for i in range {
            let dx = x.value(i);
            for dy in y.values() {
                let err = y.param.set(&x.param.set(&setup.base, dx), dy);
                for (seq, vals) in seqs.iter().zip(out.iter_mut()) {
                    let m = evaluate_cached(&mut cache, seq, &err, &setup.initial, &setup.target, &setup.propagation).map_err(|e| CliError::Point {
                        dx,
                        dy,
                        source: Box::new(e),
                    })?;
                    vals.extend(metrics.iter().map(|&k| m.get(k)));
                }
            }
        }
        Ok(out)
    };
    let parts: Vec<Result<Vec<Vec<f64>>, CliError>> = pool.install(|| chunks.par_iter().map(|r| rows(r.clone())).collect());
    let mut grids: Vec<ScanGrid> =
        seqs.iter().map(|_| ScanGrid { x, y, metrics: metrics.to_vec(), values: Vec::with_capacity(x.count * y.count * metrics.len()) }).collect();
    for part in parts {
        for (g, vals) in grids.iter_mut().zip(part?) {
            g.values.extend(vals);
        }
    }
    Ok(grids)
}
