//! CSV and log output for simulation sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::domain::Time;
use crate::error::{Error, Result};
use crate::lifelong::SimResult;

/// One finished `(algorithm, seed)` simulation.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub algo: String,
    pub seed: u64,
    pub agents: usize,
    pub stride: Time,
    pub result: SimResult,
}

pub const METRICS_HEADER: &str = "algo,seed,agents,W,total_idle_time,parcels,avg_solve_ms,workload_pct";
pub const TIMELINE_HEADER: &str = "algo,seed,t,parcels_cum";

fn sorted(records: &[RunRecord]) -> Vec<&RunRecord> {
    let mut v: Vec<&RunRecord> = records.iter().collect();
    v.sort_by(|a, b| (&a.algo, a.seed).cmp(&(&b.algo, b.seed)));
    v
}

/// Metrics table, one row per run sorted by algorithm then seed. Solve
/// times are wall-clock and vary between runs, so they are written as `NA`
/// unless `timing` is set.
pub fn metrics_csv(records: &[RunRecord], timing: bool) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in sorted(records) {
        let m = &r.result.metrics;
        let ms = if timing {
            format!("{:.3}", m.avg_solve_ms())
        } else {
            "NA".to_string()
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6}",
            r.algo, r.seed, r.agents, r.stride, m.total_idle_time, m.parcels, ms, m.workload
        );
    }
    out
}

/// Cumulative parcels at every stride boundary of every run.
pub fn timeline_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(TIMELINE_HEADER);
    out.push('\n');
    for r in sorted(records) {
        for &(t, p) in &r.result.metrics.timeline {
            let _ = writeln!(out, "{},{},{t},{p}", r.algo, r.seed);
        }
    }
    out
}

/// Event logs of all runs, each preceded by a `# algo=<a> seed=<s>` line.
pub fn event_log(records: &[RunRecord]) -> String {
    let mut out = String::new();
    for r in sorted(records) {
        let _ = writeln!(out, "# algo={} seed={}", r.algo, r.seed);
        for e in &r.result.events {
            let _ = writeln!(out, "{e}");
        }
    }
    out
}

/// `<path>.<suffix>`, e.g. `m.csv.timeline.csv`.
pub fn companion_path(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes the metrics table to `path` and the timeline next to it as
/// `<path>.timeline.csv`.
pub fn write_metrics_csv(records: &[RunRecord], path: &Path, timing: bool) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("no runs to write".into()));
    }
    write(path, &metrics_csv(records, timing))?;
    write(&companion_path(path, "timeline.csv"), &timeline_csv(records))
}

pub fn write_event_log(records: &[RunRecord], path: &Path) -> Result<()> {
    write(path, &event_log(records))
}
