//! Subcommand bodies. Each takes a finished [`Config`] and returns its
//! output; `main` only parses flags and writes files.

use std::fmt;

use ctqd_core::sim::{propagate_sequence, trace_populations};
use ctqd_core::{SpPair, State3};

use crate::config::Config;
use crate::csvio::{sequence_hash, Table};
use crate::report::design_report;
use crate::scan::{evaluate, run_scan, PointMetrics, ScanGrid, ScanSetup};
use crate::source::{self, Designed};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default sample count of `shapes`.
pub const SHAPE_SAMPLES: usize = 1000;

pub struct DesignOutput {
    pub designed: Designed,
    pub report: String,
    pub json: String,
}

pub fn design(cfg: &Config) -> Result<DesignOutput, CliError> {
    let designed = source::design(cfg)?;
    let report = design_report(&designed);
    let json = serde_json::to_string_pretty(&designed.sequence)?;
    Ok(DesignOutput { designed, report, json })
}

/// Final-state summary of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub pairs: usize,
    pub duration: f64,
    pub metrics: PointMetrics,
    pub populations: [f64; 3],
    pub unitarity_error: f64,
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pairs {}", self.pairs)?;
        writeln!(f, "duration {:.6}", self.duration)?;
        writeln!(f, "F {:.12}", self.metrics.f)?;
        let [g, ff, e] = self.populations;
        writeln!(f, "P_g {g:.12}")?;
        writeln!(f, "P_f {ff:.12}")?;
        writeln!(f, "P_e {e:.6e}")?;
        writeln!(f, "unitarity error {:.3e}", self.unitarity_error)
    }
}

pub fn simulate(cfg: &Config) -> Result<SimReport, CliError> {
    let r = source::resolve(cfg)?;
    let init = cfg.initial.state();
    let metrics = evaluate(&r.sequence, &cfg.errors, &init, &r.target, &cfg.propagation)?;
    let u = propagate_sequence(&r.sequence, &cfg.errors, &cfg.propagation)?;
    Ok(SimReport {
        pairs: r.sequence.len(),
        duration: r.sequence.total_duration(),
        metrics,
        populations: u.apply(&init).populations(),
        unitarity_error: u.unitarity_error(),
    })
}

fn provenance_meta(t: &mut Table, seq: &ctqd_core::Sequence, seed: Option<u64>) {
    t.meta("ctqd", VERSION).meta("sequence_sha256", sequence_hash(seq));
    t.meta("seed", seed.map_or_else(|| "none".to_string(), |s| s.to_string()));
}

pub fn scan(cfg: &Config) -> Result<(ScanGrid, Table), CliError> {
    let r = source::resolve(cfg)?;
    let setup = ScanSetup { target: r.target, initial: cfg.initial.state(), base: cfg.errors, propagation: cfg.propagation };
    let s = &cfg.scan;
    let grid = run_scan(&setup, &r.sequence, s.x, s.y, &s.metrics, s.workers)?;
    let mut t = Table::new(&[]);
    provenance_meta(&mut t, &r.sequence, r.seed);
    let body = grid.to_table();
    t.meta.extend(body.meta);
    t.header = body.header;
    t.rows = body.rows;
    Ok((grid, t))
}

const AMPLITUDE_COLUMNS: [&str; 6] = ["Re_g", "Im_g", "Re_f", "Im_f", "Re_e", "Im_e"];

pub fn trace(cfg: &Config) -> Result<Table, CliError> {
    let r = source::resolve(cfg)?;
    let mut header = vec!["t", "P_g", "P_f", "P_e"];
    if cfg.trace.amplitudes {
        header.extend(AMPLITUDE_COLUMNS);
    }
    let mut t = Table::new(&header);
    provenance_meta(&mut t, &r.sequence, r.seed);
    if r.sequence.is_empty() {
        return Ok(t);
    }
    let samples = trace_populations(&r.sequence, &cfg.errors, &cfg.initial.state(), &cfg.propagation)?;
    t.rows = samples
        .iter()
        .map(|s| {
            let mut row = vec![s.t];
            row.extend(s.populations);
            if cfg.trace.amplitudes {
                row.extend(amplitudes(&s.state));
            }
            row
        })
        .collect();
    Ok(t)
}

fn amplitudes(psi: &State3) -> [f64; 6] {
    let a = psi.amps();
    [a[0].re, a[0].im, a[1].re, a[1].im, a[2].re, a[2].im]
}

/// `(t, Omega_s, Omega_p)` at `samples` evenly spaced times over the pulse
/// window, ends included.
pub fn shape_samples(pair: &SpPair, samples: usize) -> Result<Table, CliError> {
    if samples < 2 {
        return Err(CliError::Config(format!("need at least two samples, got {samples}")));
    }
    pair.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let mut t = Table::new(&["t", "Omega_s", "Omega_p"]);
    t.meta("ctqd", VERSION).meta("shape", pair.shape.kind());
    let duration = pair.duration();
    t.rows = (0..samples)
        .map(|i| {
            let time = if i + 1 == samples { duration } else { duration * i as f64 / (samples - 1) as f64 };
            let s = pair.shape.eval_clamped(time);
            let p = pair.pump_override.as_ref().map_or(pair.pump_ratio * s, |o| o.eval_clamped(time));
            vec![time, s, p]
        })
        .collect();
    Ok(t)
}

pub fn shapes(cfg: &Config, samples: usize) -> Result<Table, CliError> {
    let pair = source::base_pair(cfg)?.ok_or_else(|| CliError::Config("shapes needs a preset or a pair".into()))?;
    shape_samples(&pair, samples)
}
