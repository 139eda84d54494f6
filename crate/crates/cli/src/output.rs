//! CSV, metadata and grid helpers.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::json;

use crate::settings::RunConfig;
use crate::CliError;

/// Grid endpoints are included when within this distance.
pub const GRID_TOLERANCE: f64 = 1e-12;
const MAX_GRID_POINTS: usize = 10_000_000;

/// Scientific notation with 15 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.14e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Parses `lo:hi:step`, inclusive of `hi` within [`GRID_TOLERANCE`].
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::Usage(format!("malformed grid `{spec}`: {why}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(bad("expected lo:hi:step"));
    };
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("endpoints must be numbers"));
    let (lo, hi, step) = (parse(lo)?, parse(hi)?, parse(step)?);
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(bad("values must be finite"));
    }
    if hi < lo {
        return Err(bad("hi must not be below lo"));
    }
    if !(step > 0.0) {
        return Err(bad("step must be positive"));
    }
    let count = ((hi - lo) / step + GRID_TOLERANCE).floor() as usize + 1;
    if count > MAX_GRID_POINTS {
        return Err(bad("too many grid points"));
    }
    let mut grid: Vec<f64> = (0..count).map(|i| lo + i as f64 * step).collect();
    if grid.last().is_none_or(|&last| last < hi - GRID_TOLERANCE) {
        let next = lo + count as f64 * step;
        if (next - hi).abs() <= GRID_TOLERANCE {
            grid.push(next);
        }
    }
    for v in grid.iter_mut() {
        if (*v - hi).abs() <= GRID_TOLERANCE {
            *v = hi;
        }
    }
    Ok(grid)
}

/// Comma-separated, LF-terminated table.
#[derive(Debug, Default)]
pub struct Csv {
    text: String,
    rows: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut csv = Self::default();
        csv.text.push_str(&header.join(","));
        csv.text.push('\n');
        csv
    }

    pub fn row(&mut self, fields: &[String]) {
        let _ = writeln!(self.text, "{}", fields.join(","));
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// What a run produced, plus the single metadata record describing it.
pub struct Outputs<'a> {
    config: &'a RunConfig,
    out: Option<PathBuf>,
    written: Vec<String>,
    rows: usize,
}

impl<'a> Outputs<'a> {
    pub fn new(config: &'a RunConfig) -> Self {
        let out = config.get("out").map(PathBuf::from);
        Self { config, out, written: Vec::new(), rows: 0 }
    }

    pub fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }

    /// `<out><suffix>`, when an output path was given.
    pub fn sibling(&self, suffix: &str) -> Option<PathBuf> {
        self.out.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(suffix);
            PathBuf::from(s)
        })
    }

    /// Writes the main table to `--out`, or stdout.
    pub fn main_table(&mut self, csv: &Csv) -> Result<(), CliError> {
        self.rows = csv.rows();
        match self.out.clone() {
            Some(path) => self.file(&path, csv.as_str()),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(csv.as_str().as_bytes()).map_err(CliError::io("stdout"))?;
                stdout.flush().map_err(CliError::io("stdout"))
            }
        }
    }

    pub fn file(&mut self, path: &Path, contents: &str) -> Result<(), CliError> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(CliError::io(dir.display().to_string()))?;
        }
        fs::write(path, contents).map_err(CliError::io(path.display().to_string()))?;
        self.written.push(path.display().to_string());
        Ok(())
    }

    /// Emits the metadata record: next to `--out`, or on stderr.
    pub fn finish(mut self, extra: serde_json::Value) -> Result<(), CliError> {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let meta_path = self.sibling(".meta.jsonl");
        if let Some(p) = &meta_path {
            self.written.push(p.display().to_string());
        }
        let record = json!({
            "record": "metadata",
            "subcommand": self.config.subcommand,
            "config": self.config.settings,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp_unix": timestamp,
            "rows": self.rows,
            "outputs": self.written,
            "details": extra,
        });
        let line = format!("{record}\n");
        match meta_path {
            Some(p) => fs::write(&p, line).map_err(CliError::io(p.display().to_string())),
            None => {
                eprint!("{line}");
                Ok(())
            }
        }
    }
}

/// A small matplotlib script plotting `y` against `x`, one line per `group`.
pub fn plot_script(csv_name: &str, x: &str, y: &str, group: Option<&str>) -> String {
    let group = group.map_or("None".to_string(), |g| format!("{g:?}"));
    format!(
        r#"#!/usr/bin/env python3
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else {csv_name:?}
x_col, y_col, group_col = {x:?}, {y:?}, {group}
series = defaultdict(list)
with open(path, newline="") as f:
    for row in csv.DictReader(f):
        if row[y_col] == "":
            continue
        key = row[group_col] if group_col else y_col
        series[key].append((float(row[x_col]), float(row[y_col])))
for key, points in series.items():
    points.sort()
    plt.plot([p[0] for p in points], [p[1] for p in points], marker=".", label=str(key))
plt.xlabel(x_col)
plt.ylabel(y_col)
if group_col:
    plt.legend(title=group_col)
plt.savefig(path + ".png", dpi=150)
"#
    )
}
