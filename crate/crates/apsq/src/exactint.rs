//! Exact integer primitives everything else builds on: integer square root,
//! nearest-square distance, Jacobi symbol, modular inverse, and exact
//! comparison of integer monomials.
//!
//! None of the verdicts produced here involve floating point. The only use
//! of `f64` is as a *seed* for the Newton iteration in [`isqrt`], whose
//! result is always re-validated by exact integer comparisons.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Nat, Result};

/// Floor of the square root: returns `r` with `r² ≤ x < (r+1)²`.
///
/// Integer Newton iteration from a floating-point seed, followed by exact
/// correction steps. The correction makes the result independent of any
/// seed inaccuracy, so the floating-point stage is purely an accelerator.
///
/// ```
/// use apsq::exactint::isqrt;
/// use num_bigint::BigUint;
///
/// assert_eq!(isqrt(&BigUint::from(36100u32)), BigUint::from(190u32));
/// assert_eq!(isqrt(&BigUint::from(4011u32)), BigUint::from(63u32));
/// ```
pub fn isqrt(x: &Nat) -> Nat {
    if x.is_zero() {
        return Nat::zero();
    }
    let bits = x.bits();
    // Seed with an overestimate of √x so the Newton sequence decreases
    // monotonically onto ⌊√x⌋.
    let mut r: Nat = if bits <= 52 {
        let v = x.to_u64().expect("fits by bit count");
        Nat::from((v as f64).sqrt() as u64 + 1)
    } else {
        // Scale down by an even power of two until the top fits in a f64
        // mantissa, then scale the seed back up with margin.
        let excess = bits - 52;
        let shift = excess + (excess & 1);
        let top = (x >> shift).to_u64().expect("fits by construction");
        Nat::from((top as f64).sqrt() as u64 + 2) << (shift / 2)
    };
    loop {
        let next: Nat = (&r + x / &r) >> 1;
        if next >= r {
            break;
        }
        r = next;
    }
    // Exact correction: a couple of steps at most, and a hard guarantee.
    while &r * &r > *x {
        r -= 1u32;
    }
    loop {
        let r1 = &r + 1u32;
        if &r1 * &r1 <= *x {
            r = r1;
        } else {
            break;
        }
    }
    r
}

/// Ceiling of the square root: smallest `r` with `r² ≥ x`.
pub fn ceil_sqrt(x: &Nat) -> Nat {
    let r = isqrt(x);
    if &r * &r == *x {
        r
    } else {
        r + 1u32
    }
}

/// `u128` fast path used by the sweep kernels. Same contract as [`isqrt`].
pub(crate) fn isqrt_u128(x: u128) -> u128 {
    if x == 0 {
        return 0;
    }
    let mut r = (x as f64).sqrt() as u128;
    while r > 0 && r.checked_mul(r).is_none_or(|sq| sq > x) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= x) {
        r += 1;
    }
    r
}

/// Distance from `x` to the nearest perfect square, with the achieving root.
///
/// Returns `(dist, m)` where `dist = |x − m²|` is minimal over all integers
/// `m ≥ 0`; an exact tie between `r²` and `(r+1)²` is broken toward the
/// smaller root. The distance always satisfies `dist² ≤ 4x` (the nearest
/// square is within `2√x`).
///
/// ```
/// use apsq::exactint::nearest_square_distance;
/// use num_bigint::BigUint;
///
/// let (dist, m) = nearest_square_distance(&BigUint::from(8u32));
/// assert_eq!((dist, m), (BigUint::from(1u32), BigUint::from(3u32)));
/// ```
pub fn nearest_square_distance(x: &Nat) -> (Nat, Nat) {
    let r = isqrt(x);
    let below = x - &r * &r;
    let r1 = &r + 1u32;
    let above = &r1 * &r1 - x;
    if below <= above {
        (below, r)
    } else {
        (above, r1)
    }
}

/// Jacobi symbol `(h/q)` for odd `q ≥ 1`; returns `0` iff `gcd(h, q) > 1`.
///
/// Computed by the binary form of quadratic reciprocity: repeatedly strip
/// factors of two from the numerator (flipping the sign when `q ≡ ±3 mod
/// 8`), then swap (flipping when both are `≡ 3 mod 4`) and reduce.
///
/// ```
/// use apsq::exactint::jacobi;
/// use num_bigint::BigUint;
///
/// assert_eq!(jacobi(&BigUint::from(2u32), &BigUint::from(15u32)).unwrap(), 1);
/// assert_eq!(jacobi(&BigUint::from(3u32), &BigUint::from(7u32)).unwrap(), -1);
/// ```
pub fn jacobi(h: &Nat, q: &Nat) -> Result<i32> {
    if q.is_zero() || q.is_even() {
        return Err(Error::invalid(format!(
            "jacobi symbol needs an odd positive modulus, got q = {q}"
        )));
    }
    let mut num = h % q;
    let mut den = q.clone();
    let mut sign = 1i32;
    while !num.is_zero() {
        while num.is_even() {
            num >>= 1;
            let m8 = (&den % 8u32).to_u32().unwrap();
            if m8 == 3 || m8 == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut num, &mut den);
        if (&num % 4u32).to_u32().unwrap() == 3 && (&den % 4u32).to_u32().unwrap() == 3 {
            sign = -sign;
        }
        num %= &den;
    }
    Ok(if den.is_one() { sign } else { 0 })
}

/// `u64` fast path for the exponential-sum loops. Same contract as [`jacobi`].
pub(crate) fn jacobi_u64(h: u64, q: u64) -> Result<i32> {
    if q == 0 || q.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "jacobi symbol needs an odd positive modulus, got q = {q}"
        )));
    }
    let mut num = h % q;
    let mut den = q;
    let mut sign = 1i32;
    while num != 0 {
        while num.is_multiple_of(2) {
            num /= 2;
            if den % 8 == 3 || den % 8 == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut num, &mut den);
        if num % 4 == 3 && den % 4 == 3 {
            sign = -sign;
        }
        num %= den;
    }
    Ok(if den == 1 { sign } else { 0 })
}

/// Modular inverse: the unique `h̄ ∈ [1, q−1]` with `h·h̄ ≡ 1 (mod q)`.
///
/// Errors unless `gcd(h, q) = 1` and `q ≥ 2`.
pub fn mod_inverse(h: &Nat, q: &Nat) -> Result<Nat> {
    if *q < Nat::from(2u32) {
        return Err(Error::invalid(format!(
            "modular inverse needs q ≥ 2, got q = {q}"
        )));
    }
    // Extended Euclid over signed integers.
    let qi = BigInt::from(q.clone());
    let mut r0 = qi.clone();
    let mut r1 = BigInt::from(h % q);
    let mut t0 = BigInt::zero();
    let mut t1 = BigInt::one();
    while !r1.is_zero() {
        let quot = &r0 / &r1;
        let r2 = &r0 - &quot * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &quot * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if !r0.is_one() {
        return Err(Error::invalid(format!(
            "no inverse: gcd({h}, {q}) = {r0} ≠ 1"
        )));
    }
    let t = ((t0 % &qi) + &qi) % &qi;
    Ok(t.to_biguint()
        .expect("reduced representative is nonnegative"))
}

/// `u64` fast path for the exponential-sum loops. Same contract as
/// [`mod_inverse`].
pub(crate) fn mod_inverse_u64(h: u64, q: u64) -> Result<u64> {
    if q < 2 {
        return Err(Error::invalid(format!(
            "modular inverse needs q ≥ 2, got q = {q}"
        )));
    }
    let (mut r0, mut r1) = (q as i128, (h % q) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let quot = r0 / r1;
        (r0, r1) = (r1, r0 - quot * r1);
        (t0, t1) = (t1, t0 - quot * t1);
    }
    if r0 != 1 {
        return Err(Error::invalid(format!("no inverse: gcd({h}, {q}) ≠ 1")));
    }
    Ok(t0.rem_euclid(q as i128) as u64)
}

/// One factor `base^exponent` of a monomial.
pub type Factor = (Nat, u32);

/// Evaluates `coeff · Π baseᵉ` exactly.
pub fn eval_monomial(coeff: &Nat, factors: &[Factor]) -> Nat {
    factors
        .iter()
        .fold(coeff.clone(), |acc, (base, exp)| acc * base.pow(*exp))
}

/// Exact three-way comparison of two integer monomials.
///
/// This is how hypothesis thresholds with fractional exponents are decided:
/// e.g. `a ≤ N^{4/3} d^{4/3} / 200` becomes `8·10⁶·a³ ≤ N⁴d⁴` after cubing,
/// which is `cmp_monomial(8_000_000, [(a,3)], 1, [(N,4),(d,4)])`.
///
/// ```
/// use std::cmp::Ordering;
/// use apsq::exactint::cmp_monomial;
/// use num_bigint::BigUint;
///
/// let n = |v: u64| BigUint::from(v);
/// // 1800·a vs N²·d at a=1, N=100, d=1: 1800 < 10000.
/// let ord = cmp_monomial(&n(1800), &[(n(1), 1)], &n(1), &[(n(100), 2), (n(1), 1)]);
/// assert_eq!(ord, Ordering::Less);
/// ```
pub fn cmp_monomial(
    lhs_coeff: &Nat,
    lhs_factors: &[Factor],
    rhs_coeff: &Nat,
    rhs_factors: &[Factor],
) -> Ordering {
    eval_monomial(lhs_coeff, lhs_factors).cmp(&eval_monomial(rhs_coeff, rhs_factors))
}
