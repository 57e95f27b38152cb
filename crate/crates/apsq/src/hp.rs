//! High-precision real arithmetic for bound *values* and diagnostics.
//!
//! Working precision is fixed at 192 bits (≈ 57 decimal digits). Nothing
//! that decides a theorem-level verdict goes through this module — exact
//! integer/rational comparisons live in [`crate::exactint`] and the modules
//! built on it. This module only evaluates expressions like `a^{1/4}√d/√N`
//! or `d^ε` whose values feed ratios and reports.
//!
//! All operations round to nearest/even at the fixed precision, so results
//! are bit-deterministic across platforms and thread counts.

use std::cell::RefCell;
use std::collections::HashMap;

use astro_float::{BigFloat, Consts, RoundingMode};
use num_traits::ToPrimitive;

use crate::Nat;

/// Working precision in bits; 192 bits ≈ 57 significant decimal digits.
pub const PRECISION_BITS: usize = 192;

const RM: RoundingMode = RoundingMode::ToEven;

/// Owns the transcendental-constants cache that `astro-float` needs for
/// powers. Not `Sync`; use [`with_ctx`] for a per-thread instance.
pub struct HpCtx {
    cc: Consts,
    /// Memo for `base^exp` keyed by `(base, exp)` bit patterns — sweeps ask
    /// for the same `d^ε` for long runs of grid points.
    pow_memo: HashMap<(u64, u64), BigFloat>,
}

impl HpCtx {
    pub fn new() -> Self {
        HpCtx {
            cc: Consts::new().expect("constants cache"),
            pow_memo: HashMap::new(),
        }
    }

    pub fn from_u64(&self, v: u64) -> BigFloat {
        BigFloat::from_u64(v, PRECISION_BITS)
    }

    pub fn from_f64(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, PRECISION_BITS)
    }

    /// Converts an arbitrary-precision integer; exact when `x` fits in the
    /// working precision, correctly rounded otherwise.
    pub fn from_nat(&self, x: &Nat) -> BigFloat {
        if let Some(v) = x.to_u64() {
            return self.from_u64(v);
        }
        let two64 = self.from_f64(18446744073709551616.0); // 2^64, exact
        let mut acc = BigFloat::from_u64(0, PRECISION_BITS);
        for digit in x.to_u64_digits().iter().rev() {
            acc = acc.mul(&two64, PRECISION_BITS, RM);
            acc = acc.add(&self.from_u64(*digit), PRECISION_BITS, RM);
        }
        acc
    }

    pub fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b, PRECISION_BITS, RM)
    }

    pub fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b, PRECISION_BITS, RM)
    }

    pub fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b, PRECISION_BITS, RM)
    }

    pub fn div(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.div(b, PRECISION_BITS, RM)
    }

    pub fn sqrt(&self, a: &BigFloat) -> BigFloat {
        a.sqrt(PRECISION_BITS, RM)
    }

    pub fn fourth_root(&self, a: &BigFloat) -> BigFloat {
        self.sqrt(&self.sqrt(a))
    }

    /// `base^exp` for finite `f64` exponents (exactly representable, so the
    /// result is deterministic). Memoized.
    pub fn pow_f64(&mut self, base: &BigFloat, exp: f64) -> BigFloat {
        let key = (hash_bigfloat(base), exp.to_bits());
        if let Some(hit) = self.pow_memo.get(&key) {
            return hit.clone();
        }
        let e = self.from_f64(exp);
        let out = base.pow(&e, PRECISION_BITS, RM, &mut self.cc);
        // The memo only ever holds a handful of entries per sweep, but cap
        // it defensively.
        if self.pow_memo.len() > 4096 {
            self.pow_memo.clear();
        }
        self.pow_memo.insert(key, out.clone());
        out
    }

    /// Nearest-`f64` value of a high-precision number.
    pub fn to_f64(&self, x: &BigFloat) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x.is_inf_pos() {
            return f64::INFINITY;
        }
        if x.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        // Round-trip through the exact decimal rendering; f64 parsing is
        // correctly rounded.
        format!("{x}")
            .parse::<f64>()
            .expect("astro-float rendering parses")
    }
}

impl Default for HpCtx {
    fn default() -> Self {
        Self::new()
    }
}

/// Cheap identity hash of a `BigFloat` for memo keys (mantissa words + exponent).
fn hash_bigfloat(x: &BigFloat) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    if let Some((m, n, s, e, _inexact)) = x.as_raw_parts() {
        m.hash(&mut h);
        n.hash(&mut h);
        (s as i8).hash(&mut h);
        e.hash(&mut h);
    }
    h.finish()
}

thread_local! {
    static CTX: RefCell<HpCtx> = RefCell::new(HpCtx::new());
}

/// Runs `f` with this thread's high-precision context.
pub fn with_ctx<T>(f: impl FnOnce(&mut HpCtx) -> T) -> T {
    CTX.with(|c| f(&mut c.borrow_mut()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_of_five_to_many_digits() {
        let ctx = HpCtx::new();
        let v = ctx.to_f64(&ctx.sqrt(&ctx.from_u64(5)));
        assert!((v - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn from_nat_handles_huge_values() {
        let ctx = HpCtx::new();
        let big: Nat = Nat::from(10u32).pow(40) + 7u32;
        let f = ctx.from_nat(&big);
        // Relative agreement with the decimal rendering.
        let v = ctx.to_f64(&f);
        assert!((v - 1e40).abs() / 1e40 < 1e-15);
    }

    #[test]
    fn pow_is_memoized_and_correct() {
        with_ctx(|ctx| {
            let base = ctx.from_u64(16);
            let pa = ctx.pow_f64(&base, 0.75);
            let pb = ctx.pow_f64(&base, 0.75);
            let a = ctx.to_f64(&pa);
            let b = ctx.to_f64(&pb);
            assert_eq!(a, b);
            assert!((a - 8.0).abs() < 1e-14);
        });
    }

    #[test]
    fn to_f64_special_values() {
        let ctx = HpCtx::new();
        let zero = ctx.from_u64(0);
        assert_eq!(ctx.to_f64(&zero), 0.0);
        let one = ctx.from_u64(1);
        let inf = one.div(&zero, PRECISION_BITS, RoundingMode::ToEven);
        assert!(ctx.to_f64(&inf).is_infinite());
    }
}
