//! Plain-text field dumps: a CSV body plus a JSON header.

use super::form::{AdForm, Degree, Grid};
use crate::error::{Result, WeldError};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DumpHeader {
    pub grid: Grid,
    pub degree: Degree,
    pub label: String,
}

pub const CSV_COLUMNS: &str = "i,j,k,l,component,algebra,value";

/// CSV body with one row per stored coefficient. Values round-trip exactly.
pub fn to_csv(f: &AdForm) -> String {
    let mut s = String::with_capacity(f.data.len() * 24);
    s.push_str(CSV_COLUMNS);
    s.push('\n');
    let nc = f.degree.components();
    for p in 0..f.grid.points() {
        let [i, j, k, l] = f.grid.multi_index(p);
        for c in 0..nc {
            for a in 0..3 {
                let v = f.data[(p * nc + c) * 3 + a];
                let _ = writeln!(s, "{i},{j},{k},{l},{c},{a},{v:?}");
            }
        }
    }
    s
}

pub fn from_csv(header: &DumpHeader, body: &str) -> Result<AdForm> {
    let mut f = AdForm::zeros(header.grid, header.degree);
    let nc = header.degree.components();
    let mut lines = body.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_COLUMNS => {}
        other => return Err(WeldError::Parse(format!("bad CSV header {other:?}"))),
    }
    let mut seen = 0usize;
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(WeldError::Parse(format!("line {}: expected 7 columns", ln + 2)));
        }
        let idx: Vec<usize> = cols[..6]
            .iter()
            .map(|c| c.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| WeldError::Parse(format!("line {}: {e}", ln + 2)))?;
        let v: f64 = cols[6]
            .trim()
            .parse()
            .map_err(|e| WeldError::Parse(format!("line {}: {e}", ln + 2)))?;
        let n = header.grid.n;
        if idx[..4].iter().any(|&i| i >= n) || idx[4] >= nc || idx[5] >= 3 {
            return Err(WeldError::Parse(format!("line {}: index out of range", ln + 2)));
        }
        let p = header.grid.flat_index([idx[0], idx[1], idx[2], idx[3]]);
        f.data[(p * nc + idx[4]) * 3 + idx[5]] = v;
        seen += 1;
    }
    if seen != f.data.len() {
        return Err(WeldError::Parse(format!("expected {} rows, found {seen}", f.data.len())));
    }
    Ok(f)
}

/// Writes `<stem>.csv` and `<stem>.json`, returning both paths.
pub fn write_dump(f: &AdForm, label: &str, stem: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv = stem.with_extension("csv");
    let json = stem.with_extension("json");
    let header = DumpHeader { grid: f.grid, degree: f.degree, label: label.to_string() };
    std::fs::write(&csv, to_csv(f))?;
    std::fs::write(&json, serde_json::to_string_pretty(&header)?)?;
    Ok((csv, json))
}

pub fn read_dump(stem: &Path) -> Result<(DumpHeader, AdForm)> {
    let header: DumpHeader = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
    let body = std::fs::read_to_string(stem.with_extension("csv"))?;
    let f = from_csv(&header, &body)?;
    Ok((header, f))
}
