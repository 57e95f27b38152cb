//! Exact arithmetic for the question: *how close does a finite arithmetic
//! progression get to a perfect square?*
//!
//! For integers `a ≥ 0`, `d ≥ 1`, `N ≥ 1` consider the progression
//! `{a, a+d, ..., a+Nd}` and define
//!
//! ```text
//! δ(a, d, N) = min |a + nd − m²|      over 0 ≤ n ≤ N and m ∈ ℤ.
//! ```
//!
//! This crate computes δ exactly (with witnesses) by two independent
//! algorithms, classifies `(a, d, N)` against the hypothesis ranges of the
//! known bounds on δ, generates and certifies an extremal family with
//! `δ ≥ d/1800`, evaluates the Gauss/Salié exponential sums and the
//! Poisson-summation apparatus behind the conditional bounds, and drives
//! deterministic parameter sweeps.
//!
//! # Module map
//!
//! - [`exactint`] — integer square root, nearest square, Jacobi symbol,
//!   modular inverse, exact monomial comparison. Everything else builds on
//!   these.
//! - [`delta`] — δ itself: a term-scan oracle, a square-scan dual, and a
//!   dispatcher that picks the cheaper of the two.
//! - [`regimes`] — exact classification of `(a, d, N)` against every
//!   hypothesis threshold, plus high-precision evaluation of each predicted
//!   bound and the ratio δ/bound.
//! - [`families`] — the extremal family `d = 2(9d′+1)`,
//!   `a = ((9d′+1)²(9X+1)²−1)/9` and its exact `δ ≥ d/1800` certificate.
//! - [`expsums`] — Gauss sums `G(a,b;q)`, twisted incomplete Salié sums, and
//!   their conjectured bounds.
//! - [`analytic`] — Huxley-type counts of integers near a curve, tent/Fourier
//!   smoothing, the Poisson-summation identity, and the `S = ΔM + R`
//!   decomposition.
//! - [`sweep`] — deterministic, resumable parallel sweeps with CSV/JSONL
//!   output and ratio snapshots.
//!
//! # Exactness policy
//!
//! Everything that gates a verdict — hypothesis checks, δ itself, the family
//! certificate — is integer or rational arithmetic, never floating point.
//! Floating point appears in two controlled places: high-precision (192-bit)
//! evaluation of fractional-power bound *values*, and `f64` evaluation of
//! exponential sums, which always carry an explicit accumulated-error bound.
//!
//! # Example
//!
//! ```
//! use apsq::delta::{delta, ProgressionParams};
//!
//! let p = ProgressionParams::from_u64(4011, 38, 2).unwrap();
//! let r = delta(&p);
//! assert_eq!(r.delta.to_string(), "9");   // |4087 − 64²| = 9
//! assert_eq!(r.n_star.to_string(), "2");
//! assert_eq!(r.m_star.to_string(), "64");
//! ```

pub mod analytic;
pub mod delta;
mod error;
pub mod exactint;
pub mod expsums;
pub mod families;
pub mod hp;
pub mod regimes;
pub mod sweep;

pub use error::{Error, Result};

/// Arbitrary-precision nonnegative integer; round-trips losslessly through
/// decimal strings, which is how sweeps serialize it.
pub type Nat = num_bigint::BigUint;
