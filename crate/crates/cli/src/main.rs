use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ctqd::config::{Config, Level, TargetSpec, SCHEMA};
use ctqd::csvio::Table;
use ctqd::scan::{Axis, Metric, Param};
use ctqd::{commands, CliError};
use ctqd_core::design::assemble::Level3Mode;

/// Design, simulate and scan concatenated lambda-system pulse sequences.
#[derive(Debug, Parser)]
#[command(name = "ctqd", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Design a sequence, write it as JSON and print the phase report.
    Design {
        #[command(flatten)]
        common: Common,
        /// Sequence JSON destination.
        #[arg(short, long, default_value = "sequence.json")]
        output: PathBuf,
    },
    /// Simulate a sequence once and print the final-state metrics.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Scan two error axes and write the metrics as CSV.
    Scan {
        #[command(flatten)]
        common: Common,
        /// First axis as `param,min,max,count`.
        #[arg(long, value_parser = parse_axis)]
        x: Option<Axis>,
        /// Second axis as `param,min,max,count`.
        #[arg(long, value_parser = parse_axis)]
        y: Option<Axis>,
        /// Comma-separated subset of F, P_e, P_f.
        #[arg(long, value_delimiter = ',', value_parser = parse_metric)]
        metrics: Option<Vec<Metric>>,
        /// Worker threads; all cores when absent.
        #[arg(long)]
        workers: Option<usize>,
        /// CSV destination; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write populations over time as CSV.
    Trace {
        #[command(flatten)]
        common: Common,
        /// Add real and imaginary amplitude columns.
        #[arg(long)]
        amplitudes: bool,
        /// Sampling interval in integration steps.
        #[arg(long)]
        stride: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sample the Stokes and pump envelopes of a pair as CSV.
    Shapes {
        /// Preset name; overrides the config file.
        name: Option<String>,
        #[command(flatten)]
        common: Common,
        /// Sample count, ends included.
        #[arg(long, default_value_t = commands::SHAPE_SAMPLES)]
        samples: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the JSON schema of config files.
    Schema,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file; flags override its keys.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Named base pair and layout.
    #[arg(long)]
    preset: Option<String>,
    /// Designed sequence JSON to simulate.
    #[arg(long)]
    sequence: Option<PathBuf>,
    /// Solver seed.
    #[arg(long, env = "CTQD_SEED")]
    seed: Option<u64>,
    /// Units per block.
    #[arg(long)]
    n2: Option<usize>,
    /// Blocks per sequence.
    #[arg(long)]
    n3: Option<usize>,
    /// Level-3 mode: pc, fc or none.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Level3Mode>,
    /// Target population of |f>.
    #[arg(long)]
    p_f: Option<f64>,
    /// Target relative phase.
    #[arg(long, allow_hyphen_values = true)]
    chi: Option<f64>,
    /// Integration steps per pair.
    #[arg(long)]
    steps: Option<usize>,
    /// Initial state: g, f or e.
    #[arg(long, value_parser = parse_level)]
    initial: Option<Level>,
    /// Relative Stokes amplitude error.
    #[arg(long, allow_hyphen_values = true)]
    d_omega_s: Option<f64>,
    /// Relative pump amplitude error.
    #[arg(long, allow_hyphen_values = true)]
    d_omega_p: Option<f64>,
    /// Relative detuning error.
    #[arg(long, allow_hyphen_values = true)]
    d_delta: Option<f64>,
    /// Relative pulse duration error.
    #[arg(long, allow_hyphen_values = true)]
    d_duration: Option<f64>,
    /// Additive shift of the excited level.
    #[arg(long, allow_hyphen_values = true)]
    stark: Option<f64>,
}

impl Common {
    fn config(&self) -> Result<Config, CliError> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if let Some(p) = &self.preset {
            cfg.preset = Some(p.clone());
            cfg.sequence = None;
        }
        if let Some(s) = &self.sequence {
            cfg.sequence = Some(s.clone());
            cfg.preset = None;
            cfg.pair = None;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        let h = &mut cfg.hierarchy;
        h.n2 = self.n2.or(h.n2);
        h.n3 = self.n3.or(h.n3);
        h.level3_mode = self.mode.or(h.level3_mode);
        if self.p_f.is_some() || self.chi.is_some() {
            let mut t = cfg.target.unwrap_or_default();
            if self.p_f.is_some() {
                t = TargetSpec { p_f: self.p_f, alpha: None, ..t };
            }
            t.chi = self.chi.or(t.chi);
            cfg.target = Some(t);
        }
        if let Some(n) = self.steps {
            cfg.propagation.steps_per_pair = n;
        }
        if let Some(l) = self.initial {
            cfg.initial = l;
        }
        let e = &mut cfg.errors;
        for (flag, slot) in [
            (self.d_omega_s, &mut e.d_omega_s),
            (self.d_omega_p, &mut e.d_omega_p),
            (self.d_delta, &mut e.d_delta),
            (self.d_duration, &mut e.d_duration),
            (self.stark, &mut e.stark),
        ] {
            if let Some(v) = flag {
                *slot = v;
            }
        }
        Ok(cfg)
    }
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    let f: Vec<&str> = s.split(',').map(str::trim).collect();
    let [param, min, max, count] = f[..] else {
        return Err(format!("expected param,min,max,count, got {s:?}"));
    };
    let names: Vec<&str> = Param::ALL.iter().map(|p| p.as_str()).collect();
    let param = Param::parse(param).ok_or_else(|| format!("unknown parameter {param:?}; known: {}", names.join(", ")))?;
    let num = |x: &str| x.parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok(Axis::new(param, num(min)?, num(max)?, count.parse().map_err(|e| format!("{count:?}: {e}"))?))
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    Metric::parse(s.trim()).ok_or_else(|| format!("unknown metric {s:?}; known: F, P_e, P_f"))
}

fn parse_mode(s: &str) -> Result<Level3Mode, String> {
    match s {
        "pc" => Ok(Level3Mode::Pc),
        "fc" => Ok(Level3Mode::Fc),
        "none" => Ok(Level3Mode::None),
        _ => Err(format!("unknown mode {s:?}; known: pc, fc, none")),
    }
}

fn parse_level(s: &str) -> Result<Level, String> {
    match s {
        "g" => Ok(Level::G),
        "f" => Ok(Level::F),
        "e" => Ok(Level::E),
        _ => Err(format!("unknown level {s:?}; known: g, f, e")),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes to stdout; a closed pipe ends output quietly.
fn print_out(s: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(s.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn emit_table(t: &Table, output: Option<&Path>) -> Result<(), CliError> {
    let text = t.to_string()?;
    match output {
        Some(path) => write_file(path, text.as_bytes()),
        None => print_out(&text),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Design { common, output } => {
            let out = commands::design(&common.config()?)?;
            write_file(&output, out.json.as_bytes())?;
            print_out(&format!("{}sequence written to {}\n", out.report, output.display()))?;
        }
        Cmd::Simulate { common } => print_out(&commands::simulate(&common.config()?)?.to_string())?,
        Cmd::Scan { common, x, y, metrics, workers, output } => {
            let mut cfg = common.config()?;
            let s = &mut cfg.scan;
            s.x = x.unwrap_or(s.x);
            s.y = y.unwrap_or(s.y);
            if let Some(m) = metrics {
                s.metrics = m;
            }
            s.workers = workers.or(s.workers);
            let (_, table) = commands::scan(&cfg)?;
            emit_table(&table, output.as_deref())?;
        }
        Cmd::Trace { common, amplitudes, stride, output } => {
            let mut cfg = common.config()?;
            cfg.trace.amplitudes |= amplitudes;
            if let Some(s) = stride {
                cfg.propagation.sample_stride = s;
            }
            emit_table(&commands::trace(&cfg)?, output.as_deref())?;
        }
        Cmd::Shapes { name, common, samples, output } => {
            let mut cfg = common.config()?;
            if name.is_some() {
                cfg.preset = name;
                cfg.pair = None;
            }
            emit_table(&commands::shapes(&cfg, samples)?, output.as_deref())?;
        }
        Cmd::Schema => print_out(SCHEMA)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
