//! Keeps the book honest.
//!
//! Each module below is a chapter of `book/src/` included verbatim as its
//! doc comment, so `cargo test -p apsq-guide` compiles and runs every
//! ```rust``` block in the book against the current `apsq` API. A book
//! example that drifts from the library fails CI instead of misleading a
//! reader.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/exact-integers.md")]
pub mod exact_integers {}

#[doc = include_str!("../../../book/src/minimum-distance.md")]
pub mod minimum_distance {}

#[doc = include_str!("../../../book/src/regimes.md")]
pub mod regimes {}

#[doc = include_str!("../../../book/src/extremal-family.md")]
pub mod extremal_family {}

#[doc = include_str!("../../../book/src/exponential-sums.md")]
pub mod exponential_sums {}

#[doc = include_str!("../../../book/src/curves-and-poisson.md")]
pub mod curves_and_poisson {}

#[doc = include_str!("../../../book/src/sweeps.md")]
pub mod sweeps {}
