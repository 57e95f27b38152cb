//! Regression snapshots of grid maxima.
//!
//! The implied constants in the bounds are unknown, so the artifact records
//! the largest observed `δ/bound` (per case) over a pinned grid and checks
//! later runs against it: `max_ratio` to a 10⁻⁹ relative tolerance, the
//! attaining point exactly. A snapshot is tied to its grid by the grid hash.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::engine::{run_sweep, MaxEntry, SweepOptions, SweepSummary};
use super::grid::GridSpec;
use crate::{Error, Result};

pub const RATIO_TOLERANCE: f64 = 1e-9;

/// The on-disk snapshot format (pretty-printed JSON).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnapshotFile {
    pub task: String,
    pub grid_hash: String,
    pub tool_version: String,
    pub maxima: Vec<MaxEntry>,
}

/// Runs the grid (rows discarded) and returns the folded maxima.
pub fn compute_maxima(spec: &GridSpec, jobs: usize) -> Result<SweepSummary> {
    if !spec.task.has_ratio_maxima() {
        return Err(Error::invalid(format!(
            "task `{}` has no ratio maxima to snapshot",
            spec.task
        )));
    }
    run_sweep(
        spec,
        None,
        &SweepOptions {
            jobs,
            ..Default::default()
        },
    )
}

/// Records the maxima for `spec` at `path`.
pub fn write_snapshot(spec: &GridSpec, jobs: usize, path: &Path) -> Result<SnapshotFile> {
    let summary = compute_maxima(spec, jobs)?;
    let snap = SnapshotFile {
        task: spec.task.to_string(),
        grid_hash: summary.grid_hash.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        maxima: summary.maxima,
    };
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let body = serde_json::to_string_pretty(&snap)
        .map_err(|e| Error::invalid(format!("serialize snapshot: {e}")))?;
    std::fs::write(path, format!("{body}\n"))?;
    Ok(snap)
}

/// Reads a snapshot file.
pub fn read_snapshot(path: &Path) -> Result<SnapshotFile> {
    let body = std::fs::read_to_string(path)?;
    serde_json::from_str(&body)
        .map_err(|e| Error::invalid(format!("unreadable snapshot {}: {e}", path.display())))
}

/// Outcome of a snapshot check; `report` is one line per case.
#[derive(Clone, Debug)]
pub struct SnapshotCheck {
    pub ok: bool,
    pub report: String,
}

fn ratio_close(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= RATIO_TOLERANCE * a.abs().max(b.abs())
}

/// Recomputes the maxima and compares them to the stored snapshot: same task
/// and grid hash, same cases in the same order, `max_ratio` within 10⁻⁹
/// relative, identical argmax.
pub fn check_snapshot(spec: &GridSpec, jobs: usize, path: &Path) -> Result<SnapshotCheck> {
    let stored = read_snapshot(path)?;
    let mut lines = Vec::new();
    let mut ok = true;
    if stored.task != spec.task.to_string() {
        return Err(Error::invalid(format!(
            "snapshot records task `{}`, grid is `{}`",
            stored.task, spec.task
        )));
    }
    let current_hash = spec.grid_hash();
    if stored.grid_hash != current_hash {
        return Err(Error::invalid(format!(
            "snapshot was recorded on grid {}, current grid is {}",
            &stored.grid_hash[..12.min(stored.grid_hash.len())],
            &current_hash[..12]
        )));
    }
    let summary = compute_maxima(spec, jobs)?;
    if summary.maxima.len() != stored.maxima.len() {
        ok = false;
        lines.push(format!(
            "case count changed: recorded {}, recomputed {}",
            stored.maxima.len(),
            summary.maxima.len()
        ));
    }
    for (rec, cur) in stored.maxima.iter().zip(&summary.maxima) {
        if rec.case != cur.case {
            ok = false;
            lines.push(format!(
                "case order changed: recorded `{}`, recomputed `{}`",
                rec.case, cur.case
            ));
            continue;
        }
        let ratios_match = ratio_close(rec.max_ratio, cur.max_ratio);
        let argmax_match = rec.argmax == cur.argmax;
        if !ratios_match || !argmax_match {
            ok = false;
        }
        lines.push(format!(
            "case {}: recorded {:.12e} at {:?}, recomputed {:.12e} at {:?} — {}",
            rec.case,
            rec.max_ratio,
            rec.argmax,
            cur.max_ratio,
            cur.argmax,
            if ratios_match && argmax_match {
                "ok"
            } else {
                "MISMATCH"
            }
        ));
    }
    Ok(SnapshotCheck {
        ok,
        report: lines.join("\n"),
    })
}
