//! Deterministic parallel parameter sweeps.
//!
//! A sweep is described by a [`GridSpec`] (a small line-oriented text file),
//! evaluated point-by-point into CSV or JSONL rows, and is reproducible by
//! construction: every grid point gets a dense index, points are rendered in
//! fixed-size blocks (workers may compute a block's points out of order, but
//! blocks are serialized in index order), so the output is byte-identical for
//! any worker count. A checkpoint written after each block makes interrupted
//! sweeps resumable without recomputation or duplication.
//!
//! Ratio-style tasks additionally fold their rows into per-case maxima, which
//! [`snapshot`] records and re-checks as regression baselines.

mod engine;
mod grid;
pub mod snapshot;

pub use engine::{run_sweep, task_headers, MaxEntry, SweepOptions, SweepSummary, BLOCK_POINTS};
pub use grid::{AxisRange, Filter, GridSpec, Scalars, Step, Task};
