//! CSV tables: comma separated, LF line ends, one header row, metadata in
//! leading `# key value` lines.
//!
//! Numbers are written in scientific notation with 12 significant digits
//! (`d.ddddddddddde±x`, as produced by `{:.11e}`). Parsing a written value
//! and writing it again gives the same text, so a table read back from disk
//! is bit-identical to the rounded values that were written.

use std::io::Write;

use ctqd_core::Sequence;
use sha2::{Digest, Sha256};

use crate::scan::{Axis, Metric, Param, ScanGrid};
use crate::CliError;

/// 12 significant digits. Negative zero is written as zero.
pub fn format_value(v: f64) -> String {
    format!("{:.11e}", v + 0.0)
}

/// `v` as it reads back after [`format_value`].
pub fn round_value(v: f64) -> f64 {
    format_value(v).parse().unwrap_or(v)
}

/// Hex SHA-256 of the sequence's JSON form.
pub fn sequence_hash(seq: &Sequence) -> String {
    let json = serde_json::to_vec(seq).unwrap_or_default();
    hex::encode(Sha256::digest(&json))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { meta: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), CliError> {
        let io = |e| CliError::io("<csv>", e);
        for (k, v) in &self.meta {
            writeln!(w, "# {k} {v}").map_err(io)?;
        }
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|&v| format_value(v)))?;
        }
        out.flush().map_err(io)?;
        Ok(())
    }

    pub fn to_string(&self) -> Result<String, CliError> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let meta = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .map(|l| {
                let body = l.trim_start_matches('#').trim();
                let (k, v) = body.split_once(' ').unwrap_or((body, ""));
                (k.to_string(), v.to_string())
            })
            .collect();
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let header = rdr.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec.iter().map(|f| f.parse::<f64>().map_err(|e| CliError::Config(format!("bad number {f:?}: {e}")))).collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Ok(Self { meta, header, rows })
    }
}

fn axis_meta(a: &Axis) -> String {
    format!("{} {} {} {}", a.param.as_str(), format_value(a.min), format_value(a.max), a.count)
}

fn rounded_axis(a: &Axis) -> Axis {
    Axis { min: round_value(a.min), max: round_value(a.max), ..*a }
}

fn parse_axis(s: &str) -> Result<Axis, CliError> {
    let bad = || CliError::Config(format!("bad axis metadata {s:?}"));
    let f: Vec<&str> = s.split_whitespace().collect();
    if f.len() != 4 {
        return Err(bad());
    }
    let param = Param::parse(f[0]).ok_or_else(bad)?;
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    Ok(Axis::new(param, num(f[1])?, num(f[2])?, f[3].parse().map_err(|_| bad())?))
}

impl ScanGrid {
    /// Table with columns `dx, dy` and one per metric. The axis definitions
    /// go into the metadata so the grid can be read back; coordinates are
    /// computed from the axis ends as written, so reading them back agrees.
    pub fn to_table(&self) -> Table {
        let mut header = vec!["dx", "dy"];
        header.extend(self.metrics.iter().map(|m| m.as_str()));
        let mut t = Table::new(&header);
        let (x, y) = (rounded_axis(&self.x), rounded_axis(&self.y));
        t.meta("x", axis_meta(&x)).meta("y", axis_meta(&y));
        let written = Self { x, y, metrics: Vec::new(), values: Vec::new() };
        t.rows = (0..self.len())
            .map(|k| {
                let (dx, dy) = written.coords(k);
                let mut row = vec![dx, dy];
                row.extend_from_slice(self.point(k));
                row
            })
            .collect();
        t
    }

    pub fn from_table(t: &Table) -> Result<Self, CliError> {
        let x = parse_axis(t.get_meta("x").ok_or_else(|| CliError::Config("missing x axis metadata".into()))?)?;
        let y = parse_axis(t.get_meta("y").ok_or_else(|| CliError::Config("missing y axis metadata".into()))?)?;
        if t.header.len() < 3 || t.header[0] != "dx" || t.header[1] != "dy" {
            return Err(CliError::Config(format!("unexpected scan header {:?}", t.header)));
        }
        let metrics = t.header[2..]
            .iter()
            .map(|h| Metric::parse(h).ok_or_else(|| CliError::Config(format!("unknown metric column {h}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if t.rows.len() != x.count * y.count || t.rows.iter().any(|r| r.len() != t.header.len()) {
            return Err(CliError::Config("scan table does not match its axes".into()));
        }
        let values = t.rows.iter().flat_map(|r| r[2..].iter().copied()).collect();
        Ok(Self { x, y, metrics, values })
    }

    /// Values as they read back from a written table.
    pub fn rounded(&self) -> Self {
        Self {
            x: rounded_axis(&self.x),
            y: rounded_axis(&self.y),
            metrics: self.metrics.clone(),
            values: self.values.iter().map(|&v| round_value(v)).collect(),
        }
    }
}
