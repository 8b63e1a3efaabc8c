//! File formats: convergence tables as CSV, field snapshots as plain text with a
//! one-line header, and JSON run manifests.
//!
//! Floats are written with the shortest decimal that parses back to the same
//! bits, so every file re-reads exactly and reruns are byte-identical.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D, PaddedField};
use crate::verify::ConvergenceRow;

pub const CSV_HEADER: [&str; 8] = [
    "alpha",
    "beta",
    "h",
    "tau",
    "max_error",
    "rate_max",
    "l2_error",
    "rate_l2",
];

/// Shortest round-trip representation.
pub fn fmt_real(x: f64) -> String {
    format!("{x:e}")
}

/// Observed order to three decimals; `*` for the first row of a ladder.
pub fn fmt_rate(r: Option<f64>) -> String {
    match r {
        Some(r) => format!("{r:.3}"),
        None => "*".to_string(),
    }
}

/// One parsed CSV line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CsvRow {
    pub alpha: f64,
    pub beta: f64,
    pub h: f64,
    pub tau: f64,
    pub max_error: f64,
    pub rate_max: Option<f64>,
    pub l2_error: f64,
    pub rate_l2: Option<f64>,
}

impl From<&ConvergenceRow> for CsvRow {
    fn from(r: &ConvergenceRow) -> Self {
        Self {
            alpha: r.alpha,
            beta: r.beta,
            h: r.h,
            tau: r.tau,
            max_error: r.error.max,
            rate_max: r.rate_max,
            l2_error: r.error.l2,
            rate_l2: r.rate_l2,
        }
    }
}

impl CsvRow {
    fn fields(&self) -> [String; 8] {
        [
            fmt_real(self.alpha),
            fmt_real(self.beta),
            fmt_real(self.h),
            fmt_real(self.tau),
            fmt_real(self.max_error),
            fmt_rate(self.rate_max),
            fmt_real(self.l2_error),
            fmt_rate(self.rate_l2),
        ]
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Writes the header and one line per row.
pub fn write_csv<W: Write>(out: W, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.fields()).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[CsvRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

fn parse_real(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: cannot parse {s:?}")))
}

fn parse_rate(s: &str, what: &str) -> Result<Option<f64>> {
    match s.trim() {
        "*" => Ok(None),
        v => parse_real(v, what).map(Some),
    }
}

/// Reads a table written by [`write_csv`].
pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err)?;
            let f = |i: usize| &rec[i];
            Ok(CsvRow {
                alpha: parse_real(f(0), "alpha")?,
                beta: parse_real(f(1), "beta")?,
                h: parse_real(f(2), "h")?,
                tau: parse_real(f(3), "tau")?,
                max_error: parse_real(f(4), "max_error")?,
                rate_max: parse_rate(f(5), "rate_max")?,
                l2_error: parse_real(f(6), "l2_error")?,
                rate_l2: parse_rate(f(7), "rate_l2")?,
            })
        })
        .collect()
}

/// Header of a field snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotHeader {
    pub m1: usize,
    pub m2: usize,
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// A snapshot holds every node of the grid, boundary included:
/// `M2 + 1` rows (one per `y_j`) of `M1 + 1` values.
pub fn write_snapshot<W: Write>(
    mut out: W,
    header: &SnapshotHeader,
    field: &Field2D,
    grid: &Grid2D,
) -> Result<()> {
    field.check_shape(grid)?;
    if (header.m1, header.m2) != (grid.m1, grid.m2) {
        return Err(Error::GridMismatch {
            m1: grid.m1,
            m2: grid.m2,
            what: format!("snapshot header M1={} M2={}", header.m1, header.m2),
        });
    }
    writeln!(
        out,
        "# M1={} M2={} t={} alpha={} beta={}",
        header.m1,
        header.m2,
        fmt_real(header.t),
        fmt_real(header.alpha),
        fmt_real(header.beta)
    )?;
    let p = PaddedField::from_interior(field);
    let mut line = String::new();
    for j in 0..=grid.m2 {
        line.clear();
        for i in 0..=grid.m1 {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&fmt_real(p.node(i, j)));
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_snapshot_file(
    path: &Path,
    header: &SnapshotHeader,
    field: &Field2D,
    grid: &Grid2D,
) -> Result<()> {
    let f = fs::File::create(path)?;
    write_snapshot(std::io::BufWriter::new(f), header, field, grid)
}

fn header_value<'a>(tokens: &[&'a str], key: &str) -> Result<&'a str> {
    tokens
        .iter()
        .find_map(|t| t.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .ok_or_else(|| Error::Parse(format!("snapshot header lacks {key}")))
}

/// Reads a snapshot back; returns the header and the interior values.
pub fn read_snapshot<R: std::io::Read>(input: R) -> Result<(SnapshotHeader, Field2D)> {
    let mut lines = BufReader::new(input).lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Parse("empty snapshot".into()))??;
    let tokens: Vec<&str> = first
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("snapshot header must start with '#'".into()))?
        .split_whitespace()
        .collect();
    let int = |k: &str| -> Result<usize> {
        header_value(&tokens, k)?
            .parse()
            .map_err(|_| Error::Parse(format!("bad {k}")))
    };
    let header = SnapshotHeader {
        m1: int("M1")?,
        m2: int("M2")?,
        t: parse_real(header_value(&tokens, "t")?, "t")?,
        alpha: parse_real(header_value(&tokens, "alpha")?, "alpha")?,
        beta: parse_real(header_value(&tokens, "beta")?, "beta")?,
    };
    if header.m1 < 2 || header.m2 < 2 {
        return Err(Error::Parse("snapshot needs M1, M2 >= 2".into()));
    }
    let (nx, ny) = (header.m1 - 1, header.m2 - 1);
    let mut data = Vec::with_capacity(nx * ny);
    let mut rows = 0;
    for (j, line) in lines.enumerate() {
        let line = line?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|v| parse_real(v, "value"))
            .collect::<Result<_>>()?;
        if vals.len() != header.m1 + 1 {
            return Err(Error::Parse(format!(
                "row {j} has {} values, expected {}",
                vals.len(),
                header.m1 + 1
            )));
        }
        if j >= 1 && j < header.m2 {
            data.extend_from_slice(&vals[1..header.m1]);
        }
        rows += 1;
    }
    if rows != header.m2 + 1 {
        return Err(Error::Parse(format!(
            "snapshot has {rows} rows, expected {}",
            header.m2 + 1
        )));
    }
    Ok((header, Field2D::from_vec(nx, ny, data)?))
}

/// Pretty JSON with a trailing newline.
pub fn write_manifest(path: &Path, manifest: &impl Serialize) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(manifest).map_err(|e| Error::Parse(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}
