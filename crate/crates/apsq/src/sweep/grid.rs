//! The sweep grid description: a line-oriented `key=value` file with an
//! explicit `task=` line, up to three axis ranges, optional regime filters,
//! and task-specific scalars. Parsing is strict — unknown or duplicated keys
//! and task/axis mismatches are errors naming the offending field — because a
//! grid file is a reproducibility artifact: its canonical rendering is
//! SHA-256-hashed, and snapshots and checkpoints refuse to mix grids with
//! different hashes.
//!
//! ```text
//! task=ratio_thm1
//! a=0..5000
//! a.step=linear:1
//! d=1..60
//! N=1..60
//! filter=thm1
//! ```
//!
//! Axis keys per task: `a`, `d`, `N` for `delta`, the `ratio_*` tasks,
//! `huxley`, and `poisson`; `dprime`, `x` for `family`; `q` for `salie`.
//! Step syntax: `linear:k` (`k ≥ 1`, the default with `k = 1`) or
//! `geometric:r` (`r ≥ 2`, requires `lo ≥ 1`).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_traits::Zero;
use sha2::{Digest, Sha256};

use crate::analytic::CurveKind;
use crate::{Error, Nat, Result};

/// `fmt::Display` via a `name()` method — used by the spec enums below.
macro_rules! fmt_via_name {
    () => {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.write_str(self.name())
        }
    };
}

/// What a sweep computes at each grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    /// Exact minimum distance with witnesses and regime columns.
    Delta,
    /// `δ / thm1-bound` on points where the theorem applies.
    RatioThm1,
    /// `δ / thm2-bound` on points where the theorem applies.
    RatioThm2,
    /// `δ / d^{3/4}`.
    RatioCor1,
    /// `δ / (√(a+Nd)/N · d^ε)` on admissible conjecture-1 points.
    RatioConj1,
    /// The extremal family: rows over every valid `N` per `(d′, X)`.
    FamilyScan,
    /// Twisted Salié sums against the conjectured bound.
    SalieScan,
    /// Integer points near a curve: count vs proven lower bound.
    HuxleyScan,
    /// Truncated Poisson identity with tail bound.
    PoissonScan,
}

impl Task {
    pub const ALL: [Task; 9] = [
        Task::Delta,
        Task::RatioThm1,
        Task::RatioThm2,
        Task::RatioCor1,
        Task::RatioConj1,
        Task::FamilyScan,
        Task::SalieScan,
        Task::HuxleyScan,
        Task::PoissonScan,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Task::Delta => "delta",
            Task::RatioThm1 => "ratio_thm1",
            Task::RatioThm2 => "ratio_thm2",
            Task::RatioCor1 => "ratio_cor1",
            Task::RatioConj1 => "ratio_conj1",
            Task::FamilyScan => "family",
            Task::SalieScan => "salie",
            Task::HuxleyScan => "huxley",
            Task::PoissonScan => "poisson",
        }
    }

    /// Tasks with `(a, d, N)` axes, on which regime filters make sense.
    pub(crate) fn uses_adn_axes(&self) -> bool {
        !matches!(self, Task::FamilyScan | Task::SalieScan)
    }

    /// Tasks that produce ratio maxima worth snapshotting.
    pub fn has_ratio_maxima(&self) -> bool {
        matches!(
            self,
            Task::RatioThm1
                | Task::RatioThm2
                | Task::RatioCor1
                | Task::RatioConj1
                | Task::SalieScan
        )
    }
}

impl fmt::Display for Task {
    fmt_via_name!();
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Task> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| grid_err("task", format!("unknown task `{s}`")))
    }
}

/// Regime predicates a grid can filter by; names match the report fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Filter {
    Admissible,
    ContainsSquare,
    Conj1,
    Conj2,
    Thm1,
    Thm2,
    NoteRange,
}

impl Filter {
    pub fn name(&self) -> &'static str {
        match self {
            Filter::Admissible => "admissible",
            Filter::ContainsSquare => "contains_square",
            Filter::Conj1 => "conj1",
            Filter::Conj2 => "conj2",
            Filter::Thm1 => "thm1",
            Filter::Thm2 => "thm2",
            Filter::NoteRange => "note_range",
        }
    }
}

impl fmt::Display for Filter {
    fmt_via_name!();
}

impl FromStr for Filter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Filter> {
        const ALL: [Filter; 7] = [
            Filter::Admissible,
            Filter::ContainsSquare,
            Filter::Conj1,
            Filter::Conj2,
            Filter::Thm1,
            Filter::Thm2,
            Filter::NoteRange,
        ];
        ALL.into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| grid_err("filter", format!("unknown filter `{s}`")))
    }
}

/// Axis stepping: every `k`-th value, or multiply by `r` each step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Linear(Nat),
    Geometric(Nat),
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Linear(k) => write!(f, "linear:{k}"),
            Step::Geometric(r) => write!(f, "geometric:{r}"),
        }
    }
}

/// One axis: `lo..hi` inclusive with a step rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxisRange {
    pub lo: Nat,
    pub hi: Nat,
    pub step: Step,
}

impl AxisRange {
    fn validate(&self, field: &str) -> Result<()> {
        if self.lo > self.hi {
            return Err(grid_err(
                field,
                format!("lo..hi needs lo ≤ hi, got {}..{}", self.lo, self.hi),
            ));
        }
        match &self.step {
            Step::Linear(k) if k.is_zero() => {
                Err(grid_err(format!("{field}.step"), "linear step must be ≥ 1"))
            }
            Step::Geometric(r) if *r < Nat::from(2u32) => Err(grid_err(
                format!("{field}.step"),
                "geometric ratio must be ≥ 2",
            )),
            Step::Geometric(_) if self.lo.is_zero() => {
                Err(grid_err(field, "geometric stepping needs lo ≥ 1"))
            }
            _ => Ok(()),
        }
    }

    /// Materializes the axis values, ascending.
    pub fn values(&self) -> Vec<Nat> {
        let mut out = Vec::new();
        let mut v = self.lo.clone();
        while v <= self.hi {
            out.push(v.clone());
            match &self.step {
                Step::Linear(k) => v += k,
                Step::Geometric(r) => v *= r,
            }
        }
        out
    }
}

impl fmt::Display for AxisRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// Task-specific knobs with their defaults. Every scalar is rendered into the
/// canonical form (hence the hash) whether or not the task consults it.
#[derive(Clone, Debug)]
pub struct Scalars {
    /// `ε` exponent for conjecture bounds (`ratio_conj1`, `salie`).
    pub epsilon: f64,
    /// Linear phase on `h` in the Salié sum.
    pub lambda: f64,
    /// Linear phase on `k` in the Salié sum.
    pub mu: f64,
    /// Curve for `huxley`.
    pub curve: CurveKind,
    /// Proximity threshold `ε` for `huxley`.
    pub eps: f64,
    /// Fourier frequency `h` for `poisson`.
    pub h: i64,
    /// Truncation `k_max` for `poisson`.
    pub kmax: u64,
    /// Detector width `Δ` for `poisson` setups.
    pub threshold: f64,
    /// Salié `a` values (number-theoretic parameter, not the progression `a`).
    pub salie_a: Vec<u64>,
    /// Salié `H` values.
    pub salie_h: Vec<u64>,
    /// Salié `K` values.
    pub salie_k: Vec<u64>,
    /// Scan perfect-square moduli too (the conjecture excludes them).
    pub include_square_q: bool,
}

impl Default for Scalars {
    fn default() -> Self {
        Scalars {
            epsilon: 0.05,
            lambda: 0.0,
            mu: 0.0,
            curve: CurveKind::Parabola,
            eps: 0.25,
            h: 1,
            kmax: 10_000,
            threshold: 0.25,
            salie_a: vec![1],
            salie_h: vec![8, 32],
            salie_k: vec![8, 32],
            include_square_q: false,
        }
    }
}

/// A parsed, validated grid description.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub task: Task,
    pub a_axis: Option<AxisRange>,
    pub d_axis: Option<AxisRange>,
    pub n_axis: Option<AxisRange>,
    pub dprime_axis: Option<AxisRange>,
    pub x_axis: Option<AxisRange>,
    pub q_axis: Option<AxisRange>,
    pub filters: Vec<Filter>,
    pub scalars: Scalars,
}

fn grid_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::GridSpec {
        field: field.into(),
        message: message.into(),
    }
}

fn parse_nat(field: &str, s: &str) -> Result<Nat> {
    s.trim()
        .parse::<Nat>()
        .map_err(|_| grid_err(field, format!("expected a nonnegative integer, got `{s}`")))
}

fn parse_f64(field: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| grid_err(field, format!("expected a real number, got `{s}`")))?;
    if !v.is_finite() {
        return Err(grid_err(field, "value must be finite"));
    }
    Ok(v)
}

fn parse_u64_list(field: &str, s: &str) -> Result<Vec<u64>> {
    let vals: Vec<u64> = s
        .split(',')
        .map(|p| {
            p.trim().parse::<u64>().map_err(|_| {
                grid_err(
                    field,
                    format!("expected comma-separated integers, got `{s}`"),
                )
            })
        })
        .collect::<Result<_>>()?;
    if vals.is_empty() || vals.contains(&0) {
        return Err(grid_err(field, "list must be nonempty with entries ≥ 1"));
    }
    Ok(vals)
}

fn parse_range(field: &str, s: &str) -> Result<(Nat, Nat)> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| grid_err(field, format!("expected `lo..hi`, got `{s}`")))?;
    Ok((parse_nat(field, lo)?, parse_nat(field, hi)?))
}

fn parse_step(field: &str, s: &str) -> Result<Step> {
    let (kind, val) = s.split_once(':').ok_or_else(|| {
        grid_err(
            field,
            format!("expected `linear:k` or `geometric:r`, got `{s}`"),
        )
    })?;
    let v = parse_nat(field, val)?;
    match kind.trim() {
        "linear" => Ok(Step::Linear(v)),
        "geometric" => Ok(Step::Geometric(v)),
        other => Err(grid_err(field, format!("unknown step kind `{other}`"))),
    }
}

const AXIS_KEYS: [&str; 6] = ["a", "d", "N", "dprime", "x", "q"];

impl GridSpec {
    /// Parses and validates a grid file's text.
    pub fn parse(text: &str) -> Result<GridSpec> {
        let mut task: Option<Task> = None;
        let mut ranges: Vec<(String, (Nat, Nat))> = Vec::new();
        let mut steps: Vec<(String, Step)> = Vec::new();
        let mut filters: Vec<Filter> = Vec::new();
        let mut scalars = Scalars::default();
        let mut seen: Vec<String> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                grid_err(
                    format!("line {}", lineno + 1),
                    format!("expected `key=value`, got `{line}`"),
                )
            })?;
            let key = key.trim();
            let value = value.trim();
            if key != "filter" {
                if seen.iter().any(|k| k == key) {
                    return Err(grid_err(key, "duplicate key"));
                }
                seen.push(key.to_string());
            }
            match key {
                "task" => task = Some(value.parse()?),
                "filter" => {
                    let f: Filter = value.parse()?;
                    if !filters.contains(&f) {
                        filters.push(f);
                    }
                }
                "epsilon" => scalars.epsilon = parse_f64(key, value)?,
                "lambda" => scalars.lambda = parse_f64(key, value)?,
                "mu" => scalars.mu = parse_f64(key, value)?,
                "curve" => {
                    scalars.curve = match value {
                        "parabola" => CurveKind::Parabola,
                        "root" => CurveKind::Root,
                        other => {
                            return Err(grid_err(
                                key,
                                format!("expected parabola|root, got `{other}`"),
                            ))
                        }
                    }
                }
                "eps" => scalars.eps = parse_f64(key, value)?,
                "h" => {
                    scalars.h = value
                        .parse()
                        .map_err(|_| grid_err(key, format!("expected an integer, got `{value}`")))?
                }
                "kmax" => {
                    scalars.kmax = value.parse().map_err(|_| {
                        grid_err(key, format!("expected an integer ≥ 1, got `{value}`"))
                    })?
                }
                "threshold" => scalars.threshold = parse_f64(key, value)?,
                "salie_a" => scalars.salie_a = parse_u64_list(key, value)?,
                "salie_h" => scalars.salie_h = parse_u64_list(key, value)?,
                "salie_k" => scalars.salie_k = parse_u64_list(key, value)?,
                "include_square_q" => {
                    scalars.include_square_q = match value {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(grid_err(
                                key,
                                format!("expected true|false, got `{other}`"),
                            ))
                        }
                    }
                }
                _ if AXIS_KEYS.contains(&key) => {
                    ranges.push((key.to_string(), parse_range(key, value)?))
                }
                _ if key.ends_with(".step") && AXIS_KEYS.contains(&&key[..key.len() - 5]) => {
                    steps.push((key[..key.len() - 5].to_string(), parse_step(key, value)?))
                }
                other => return Err(grid_err(other, "unknown key")),
            }
        }

        let task = task.ok_or_else(|| grid_err("task", "missing required `task=` line"))?;

        // Pair each range with its step (default linear:1); a step without a
        // range is an error.
        for (axis, _) in &steps {
            if !ranges.iter().any(|(r, _)| r == axis) {
                return Err(grid_err(
                    format!("{axis}.step"),
                    "step given for an axis with no range",
                ));
            }
        }
        let axis_of = |name: &str| -> Option<AxisRange> {
            let (_, (lo, hi)) = ranges.iter().find(|(r, _)| r == name)?;
            let step = steps
                .iter()
                .find(|(s, _)| s == name)
                .map(|(_, s)| s.clone())
                .unwrap_or(Step::Linear(Nat::from(1u32)));
            Some(AxisRange {
                lo: lo.clone(),
                hi: hi.clone(),
                step,
            })
        };

        let spec = GridSpec {
            task,
            a_axis: axis_of("a"),
            d_axis: axis_of("d"),
            n_axis: axis_of("N"),
            dprime_axis: axis_of("dprime"),
            x_axis: axis_of("x"),
            q_axis: axis_of("q"),
            filters,
            scalars,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Reads and parses a grid file.
    pub fn from_path(path: &Path) -> Result<GridSpec> {
        let text = std::fs::read_to_string(path)?;
        GridSpec::parse(&text)
    }

    fn validate(&self) -> Result<()> {
        let require = |axis: &Option<AxisRange>, name: &str, min_lo: u32| -> Result<()> {
            let Some(r) = axis else {
                return Err(grid_err(
                    name,
                    format!("axis required for task `{}`", self.task),
                ));
            };
            r.validate(name)?;
            if r.lo < Nat::from(min_lo) {
                return Err(grid_err(
                    name,
                    format!("axis needs lo ≥ {min_lo} for task `{}`", self.task),
                ));
            }
            Ok(())
        };
        let forbid = |axis: &Option<AxisRange>, name: &str| -> Result<()> {
            if axis.is_some() {
                return Err(grid_err(
                    name,
                    format!("axis not used by task `{}`", self.task),
                ));
            }
            Ok(())
        };

        if self.task.uses_adn_axes() {
            require(&self.a_axis, "a", 0)?;
            require(&self.d_axis, "d", 1)?;
            require(&self.n_axis, "N", 1)?;
            forbid(&self.dprime_axis, "dprime")?;
            forbid(&self.x_axis, "x")?;
            forbid(&self.q_axis, "q")?;
        } else if self.task == Task::FamilyScan {
            require(&self.dprime_axis, "dprime", 1)?;
            require(&self.x_axis, "x", 1)?;
            for (axis, name) in [
                (&self.a_axis, "a"),
                (&self.d_axis, "d"),
                (&self.n_axis, "N"),
                (&self.q_axis, "q"),
            ] {
                forbid(axis, name)?;
            }
        } else {
            // SalieScan
            require(&self.q_axis, "q", 2)?;
            for (axis, name) in [
                (&self.a_axis, "a"),
                (&self.d_axis, "d"),
                (&self.n_axis, "N"),
                (&self.dprime_axis, "dprime"),
                (&self.x_axis, "x"),
            ] {
                forbid(axis, name)?;
            }
        }

        if !self.filters.is_empty() && !self.task.uses_adn_axes() {
            return Err(grid_err(
                "filter",
                format!("regime filters are not supported for task `{}`", self.task),
            ));
        }

        if self.scalars.epsilon < 0.0 {
            return Err(grid_err("epsilon", "must be ≥ 0"));
        }
        match self.task {
            Task::HuxleyScan => {
                if !self.scalars.eps.is_finite() || self.scalars.eps <= 0.0 {
                    return Err(grid_err("eps", "must be a finite value > 0"));
                }
            }
            Task::PoissonScan => {
                if !(self.scalars.threshold > 0.0 && self.scalars.threshold < 0.5) {
                    return Err(grid_err("threshold", "must lie in (0, 1/2)"));
                }
                if self.scalars.kmax == 0 {
                    return Err(grid_err("kmax", "must be ≥ 1"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// The axes the task enumerates, in dense-index order (last varies
    /// fastest); row order is therefore lexicographic ascending in these.
    pub(crate) fn axes(&self) -> Vec<(&'static str, &AxisRange)> {
        match self.task {
            Task::FamilyScan => vec![
                ("dprime", self.dprime_axis.as_ref().expect("validated")),
                ("x", self.x_axis.as_ref().expect("validated")),
            ],
            Task::SalieScan => vec![("q", self.q_axis.as_ref().expect("validated"))],
            _ => vec![
                ("a", self.a_axis.as_ref().expect("validated")),
                ("d", self.d_axis.as_ref().expect("validated")),
                ("N", self.n_axis.as_ref().expect("validated")),
            ],
        }
    }

    /// The canonical rendering that the grid hash commits to. Parsing the
    /// canonical form reproduces the spec (and hence the hash) exactly.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("task={}\n", self.task));
        for (name, axis) in self.axes() {
            out.push_str(&format!("{name}={axis}\n{name}.step={}\n", axis.step));
        }
        let mut filters = self.filters.clone();
        filters.sort();
        for f in filters {
            out.push_str(&format!("filter={f}\n"));
        }
        let s = &self.scalars;
        out.push_str(&format!(
            "epsilon={:?}\nlambda={:?}\nmu={:?}\ncurve={}\neps={:?}\nh={}\nkmax={}\nthreshold={:?}\n",
            s.epsilon, s.lambda, s.mu, s.curve, s.eps, s.h, s.kmax, s.threshold
        ));
        let list = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        out.push_str(&format!(
            "salie_a={}\nsalie_h={}\nsalie_k={}\ninclude_square_q={}\n",
            list(&s.salie_a),
            list(&s.salie_h),
            list(&s.salie_k),
            s.include_square_q
        ));
        out
    }

    /// SHA-256 of the canonical rendering, in hex.
    pub fn grid_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
