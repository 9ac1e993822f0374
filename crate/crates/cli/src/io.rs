//! Artifact files: profile CSV, JSON records, sweep and table CSV.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use quasisol_core::{Field, RadialGrid, SweepResult, TableRow};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use crate::config::RunConfig;

pub const PROFILE_FILE: &str = "profile.csv";
pub const SOLUTION_FILE: &str = "solution.json";
pub const REPORT_FILE: &str = "report.json";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_FILE: &str = "sweep.json";
pub const TABLE_FILE: &str = "table.csv";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

fn fs_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Fs { path: path.to_path_buf(), source }
}

fn format_err(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format { path: path.to_path_buf(), message: message.into() }
}

/// Every JSON artifact carries the resolved config and the tool version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record<T> {
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub result: T,
}

impl<T> Record<T> {
    pub fn new(command: &str, config: &RunConfig, result: T) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: config.clone(),
            result,
        }
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(fs_err(dir))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let file = File::create(path).map_err(fs_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| format_err(path, e.to_string()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(fs_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let file = File::open(path).map_err(fs_err(path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| format_err(path, e.to_string()))
}

fn grid_header(grid: &RadialGrid) -> String {
    format!("# dim={} radius={} nodes={}", grid.dim(), grid.radius(), grid.nodes())
}

/// `r,v,u` with a leading `# dim=.. radius=.. nodes=..` comment naming the grid.
pub fn write_profile(path: &Path, grid: &RadialGrid, v: &[f64], u: &[f64]) -> Result<(), IoError> {
    let file = File::create(path).map_err(fs_err(path))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", grid_header(grid)).map_err(fs_err(path))?;
    let mut csv = csv::Writer::from_writer(w);
    let to_err = |e: csv::Error| format_err(path, e.to_string());
    csv.write_record(["r", "v", "u"]).map_err(to_err)?;
    for ((r, v), u) in grid.r().iter().zip(v).zip(u) {
        csv.write_record([r.to_string(), v.to_string(), u.to_string()]).map_err(to_err)?;
    }
    csv.flush().map_err(fs_err(path))
}

fn parse_header(path: &Path, line: &str) -> Result<RadialGrid, IoError> {
    let bad = || format_err(path, format!("line 1: expected '# dim=N radius=R nodes=n', found {line:?}"));
    let body = line.strip_prefix('#').ok_or_else(bad)?;
    let (mut dim, mut radius, mut nodes) = (None, None, None);
    for item in body.split_whitespace() {
        let (key, value) = item.split_once('=').ok_or_else(bad)?;
        match key {
            "dim" => dim = value.parse::<usize>().ok(),
            "radius" => radius = value.parse::<f64>().ok(),
            "nodes" => nodes = value.parse::<usize>().ok(),
            _ => return Err(bad()),
        }
    }
    let (dim, radius, nodes) = (dim.ok_or_else(bad)?, radius.ok_or_else(bad)?, nodes.ok_or_else(bad)?);
    RadialGrid::new(dim, radius, nodes).map_err(|e| format_err(path, format!("line 1: {e}")))
}

pub struct Profile {
    pub grid: RadialGrid,
    pub v: Field,
    pub u: Field,
}

pub fn read_profile(path: &Path) -> Result<Profile, IoError> {
    let file = File::open(path).map_err(fs_err(path))?;
    let mut reader = BufReader::new(file);
    let mut first = String::new();
    reader.read_line(&mut first).map_err(fs_err(path))?;
    let grid = parse_header(path, first.trim_end())?;
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = csv.headers().map_err(|e| format_err(path, e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != ["r", "v", "u"] {
        return Err(format_err(path, "line 2: expected header r,v,u"));
    }
    let (mut v, mut u) = (Vec::with_capacity(grid.nodes()), Vec::with_capacity(grid.nodes()));
    let tol = 1e-9 * grid.radius();
    for (i, record) in csv.records().enumerate() {
        let line = i + 3;
        let record = record.map_err(|e| format_err(path, format!("line {line}: {e}")))?;
        if record.len() != 3 {
            return Err(format_err(path, format!("line {line}: expected 3 columns")));
        }
        let mut vals = [0.0; 3];
        for (slot, field) in vals.iter_mut().zip(record.iter()) {
            *slot = field
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format_err(path, format!("line {line}: malformed number {field:?}")))?;
        }
        let expected = grid.r().get(i).copied();
        if expected.is_none_or(|r| (r - vals[0]).abs() > tol) {
            return Err(format_err(path, format!("line {line}: r = {} does not match the grid", vals[0])));
        }
        v.push(vals[1]);
        u.push(vals[2]);
    }
    if v.len() != grid.nodes() {
        return Err(format_err(path, format!("{} rows, header declares {} nodes", v.len(), grid.nodes())));
    }
    Ok(Profile { grid, v: v.into(), u: u.into() })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |x| x.to_string())
}

pub fn write_sweep_csv(path: &Path, sweep: &SweepResult) -> Result<(), IoError> {
    let mut csv = csv::Writer::from_path(path).map_err(|e| format_err(path, e.to_string()))?;
    let to_err = |e: csv::Error| format_err(path, e.to_string());
    csv.write_record([
        "kappa",
        "converged",
        "linf_u",
        "threshold",
        "linf_pass",
        "all_pass",
        "j_value",
        "mp_level",
        "threshold_constant",
        "failures",
        "error",
    ])
    .map_err(to_err)?;
    for e in &sweep.entries {
        csv.write_record([
            e.kappa.to_string(),
            e.converged.to_string(),
            opt(e.linf_u),
            opt(e.threshold),
            e.linf_pass.to_string(),
            e.all_pass.to_string(),
            opt(e.j_value),
            opt(e.mp_level),
            opt(e.threshold_constant),
            e.failures.join(";"),
            e.error.clone().unwrap_or_default(),
        ])
        .map_err(to_err)?;
    }
    csv.flush().map_err(fs_err(path))
}

pub fn write_table(path: &Path, rows: &[TableRow]) -> Result<(), IoError> {
    let mut csv = csv::Writer::from_path(path).map_err(|e| format_err(path, e.to_string()))?;
    let to_err = |e: csv::Error| format_err(path, e.to_string());
    csv.write_record(["t", "g", "g_prime", "primitive", "inverse", "f", "f_primitive"]).map_err(to_err)?;
    for r in rows {
        csv.write_record(
            [r.t, r.g, r.g_prime, r.primitive, r.inverse, r.f, r.f_primitive].map(|x| x.to_string()),
        )
        .map_err(to_err)?;
    }
    csv.flush().map_err(fs_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_round_trip() {
        let grid = RadialGrid::new(3, 12.5, 101).unwrap();
        let parsed = parse_header(Path::new("x"), &grid_header(&grid)).unwrap();
        assert_eq!(parsed, grid);
    }

    #[test]
    fn header_rejects_garbage() {
        assert!(parse_header(Path::new("x"), "r,v,u").is_err());
        assert!(parse_header(Path::new("x"), "# dim=3 radius=abc nodes=101").is_err());
    }
}
