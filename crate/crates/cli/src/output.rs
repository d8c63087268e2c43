//! CSV tables and `key = value` metadata sidecars.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use holeflux::units::UnitRegistry;

use crate::config::RunConfig;
use crate::error::CliResult;

/// Everything a command produces, before it touches the filesystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    /// Basename shared by the CSV and its sidecar.
    pub stem: &'static str,
    pub csv: String,
    pub results: Vec<(String, String)>,
    pub summary: Vec<String>,
    /// Some part of the run failed numerically; outputs are still written.
    pub failed: bool,
}

/// Shortest round-trip text for `x`; exponent form outside [1e-4, 1e15).
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Sidecar text: the full resolved config (re-readable as a config file),
/// the physical constants, then the results.
pub fn sidecar(report: &Report, cfg: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# holeflux {} metadata", report.command);
    let _ = writeln!(s, "meta.command = {}", report.command);
    let _ = writeln!(s, "meta.version = {}", env!("CARGO_PKG_VERSION"));
    s.push_str(&cfg.to_text());
    for (k, v) in UnitRegistry::CODATA_2018.entries() {
        let _ = writeln!(s, "{k} = {v:e}");
    }
    for (k, v) in &report.results {
        let _ = writeln!(s, "result.{k} = {v}");
    }
    s
}

/// Write `<stem>.csv` and `<stem>.meta` into `dir`.
pub fn write(dir: &Path, report: &Report, cfg: &RunConfig) -> CliResult<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let data = dir.join(format!("{}.csv", report.stem));
    let meta = dir.join(format!("{}.meta", report.stem));
    fs::write(&data, &report.csv)?;
    fs::write(&meta, sidecar(report, cfg))?;
    Ok((data, meta))
}
