//! Run records and their on-disk layout.
//!
//! A run directory holds `config.json`, `tracks.csv`, `frames.csv`,
//! optionally `table.csv` and `summary.json`, and `manifest.json`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use magnon_core::{MagnonError, State};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{ExpError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct TrackRow {
    pub t: f64,
    pub observable: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRow {
    pub t: f64,
    pub i: usize,
    pub j: usize,
    pub re: f64,
    pub im: f64,
    pub prob: f64,
}

/// A rectangular numeric table with a header row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| fmt_e(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Space-aligned rendering for terminals.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|v| format!("{v:.6e}")).collect())
            .collect();
        let widths: Vec<usize> = (0..self.header.len())
            .map(|k| cells.iter().map(|r| r[k].len()).chain([self.header[k].len()]).max().unwrap_or(0))
            .collect();
        let line = |r: &[String]| {
            r.iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = line(&self.header);
        out.push('\n');
        for r in &cells {
            out.push_str(&line(r));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub subcommand: String,
    pub config: ExperimentConfig,
    pub tracks: Vec<TrackRow>,
    pub frames: Vec<FrameRow>,
    pub table: Option<Table>,
    /// Additional named text files written verbatim.
    pub extra: Vec<(String, String)>,
    pub summary: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn new(subcommand: &str, config: &ExperimentConfig) -> Self {
        Self {
            subcommand: subcommand.into(),
            config: config.clone(),
            tracks: Vec::new(),
            frames: Vec::new(),
            table: None,
            extra: Vec::new(),
            summary: BTreeMap::new(),
            warnings: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn track(&mut self, t: f64, observable: impl Into<String>, value: f64) {
        self.tracks.push(TrackRow {
            t,
            observable: observable.into(),
            value,
        });
    }

    /// Values of one observable in recording order.
    pub fn series(&self, observable: &str) -> Vec<(f64, f64)> {
        self.tracks
            .iter()
            .filter(|r| r.observable == observable)
            .map(|r| (r.t, r.value))
            .collect()
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.insert(key.into(), v.into());
    }

    pub fn get_f64(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }

    pub fn warn(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    /// Stores a snapshot: sites whose probability is below
    /// `cutoff·peak` are dropped, and the peak goes to the track `frame_peak`.
    pub fn frame(&mut self, t: f64, s: &State, cutoff: f64) {
        let probs = s.probabilities();
        let peak = probs.iter().copied().fold(0.0, f64::max);
        self.track(t, "frame_peak", peak);
        for (k, (a, p)) in s.amplitudes().iter().zip(&probs).enumerate() {
            if *p >= cutoff * peak && *p > 0.0 {
                self.frames.push(FrameRow {
                    t,
                    i: k % s.nx,
                    j: k / s.nx,
                    re: a.re,
                    im: a.im,
                    prob: *p,
                });
            }
        }
    }

    /// Every track whose name starts with `pop` must be a probability.
    pub fn check_probabilities(&self) -> Result<()> {
        for r in self.tracks.iter().filter(|r| r.observable.starts_with("pop")) {
            if !(r.value >= -1e-9 && r.value <= 1.0 + 1e-9) {
                return Err(MagnonError::Validation(format!(
                    "track {} = {} at t = {} is not a probability",
                    r.observable, r.value, r.t
                ))
                .into());
            }
        }
        Ok(())
    }

    pub fn tracks_csv(&self) -> String {
        let mut out = String::from("t,observable,value\n");
        for r in &self.tracks {
            let _ = writeln!(out, "{},{},{}", fmt_e(r.t), r.observable, fmt_e(r.value));
        }
        out
    }

    pub fn frames_csv(&self) -> String {
        let mut out = String::from("t,i,j,re,im,prob\n");
        for f in &self.frames {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_e(f.t),
                f.i,
                f.j,
                fmt_e(f.re),
                fmt_e(f.im),
                fmt_e(f.prob)
            );
        }
        out
    }
}

/// C-style `%.12e`: `-1.234567890123e-05`.
pub fn fmt_e(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.12e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub subcommand: String,
    /// SHA-256 of the config bytes as supplied (empty input when defaults were used).
    pub config_sha256: String,
    /// SHA-256 of the echoed `config.json`.
    pub config_echo_sha256: String,
    pub started: String,
    pub finished: String,
    pub wall_time_s: f64,
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    let p: PathBuf = dir.join(name);
    std::fs::write(&p, text).map_err(|e| ExpError::io(&p, e))
}

/// Writes the run directory and returns its manifest.
pub fn write_run_dir(
    rec: &RunRecord,
    dir: &Path,
    config_bytes: &[u8],
    started: chrono::DateTime<chrono::Utc>,
) -> Result<RunManifest> {
    rec.check_probabilities()?;
    std::fs::create_dir_all(dir).map_err(|e| ExpError::io(dir, e))?;
    let echo = rec.config.to_json() + "\n";
    write(dir, "config.json", &echo)?;
    write(dir, "tracks.csv", &rec.tracks_csv())?;
    write(dir, "frames.csv", &rec.frames_csv())?;
    let mut files = vec!["config.json".to_string(), "tracks.csv".into(), "frames.csv".into()];
    if let Some(t) = &rec.table {
        write(dir, "table.csv", &t.to_csv())?;
        files.push("table.csv".into());
    }
    for (name, text) in &rec.extra {
        write(dir, name, text)?;
        files.push(name.clone());
    }
    if !rec.summary.is_empty() {
        let s = serde_json::to_string_pretty(&rec.summary).expect("summary serialises") + "\n";
        write(dir, "summary.json", &s)?;
        files.push("summary.json".into());
    }
    files.push("manifest.json".into());
    let m = RunManifest {
        tool: "magnon".into(),
        tool_version: TOOL_VERSION.into(),
        subcommand: rec.subcommand.clone(),
        config_sha256: sha256_hex(config_bytes),
        config_echo_sha256: sha256_hex(echo.as_bytes()),
        started: started.to_rfc3339(),
        finished: chrono::Utc::now().to_rfc3339(),
        wall_time_s: rec.wall_time_s,
        files,
        warnings: rec.warnings.clone(),
    };
    let text = serde_json::to_string_pretty(&m).expect("manifest serialises") + "\n";
    write(dir, "manifest.json", &text)?;
    Ok(m)
}
