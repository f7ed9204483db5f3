//! CSV and JSON writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

/// One CSV line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub omega: f64,
    pub t: f64,
    pub r: f64,
    pub subband: usize,
    pub is_center: bool,
}

pub const HEADER: [&str; 5] = ["omega", "T", "R", "subband_index", "is_center"];

/// 17 significant digits; NaN for pole hits.
pub fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NaN".to_string()
    }
}

pub fn write_csv(path: &Path, rows: &[Row]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([
            fmt(r.omega),
            fmt(r.t),
            fmt(r.r),
            r.subband.to_string(),
            u8::from(r.is_center).to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_csv(path: &Path) -> io::Result<Vec<Row>> {
    let mut rd = csv::Reader::from_path(path)?;
    let bad = |e: &dyn std::fmt::Display| io::Error::new(io::ErrorKind::InvalidData, e.to_string());
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let f = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(&e));
        out.push(Row {
            omega: f(0)?,
            t: f(1)?,
            r: f(2)?,
            subband: rec[3].parse().map_err(|e| bad(&e))?,
            is_center: &rec[4] == "1",
        });
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

/// `n` equally spaced points including both ends.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (a + b)],
        _ => (0..n).map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}
