//! The minimum distance δ between an arithmetic progression and the perfect
//! squares, computed exactly by two independent algorithms.
//!
//! - [`delta_bruteforce`] walks the progression terms (`Θ(N)` nearest-square
//!   queries) — simple enough to serve as the oracle.
//! - [`delta_square_scan`] walks the perfect squares near the interval
//!   (`Θ(M+2)` steps for `M = ⌊√(a+Nd)⌋ − ⌊√a⌋`) — the dual enumeration,
//!   efficient when squares are sparser than terms.
//! - [`delta`] dispatches to whichever enumeration is shorter.
//!
//! Both return identical results, including the witness under the global
//! tie-break "smallest distance, then smallest n, then smallest m". δ is
//! defined for *all* inputs, including progressions whose interval contains
//! no square — the minimizing square may then lie outside `[a, a+Nd]`, which
//! is why the square scan visits one root below `⌊√a⌋`-level and one above
//! `⌊√(a+Nd)⌋`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exactint::{isqrt, isqrt_u128, nearest_square_distance};
use crate::{Error, Nat, Result};

/// The progression `{a, a+d, ..., a+Nd}`: initial term `a ≥ 0`, common
/// difference `d ≥ 1`, and step count `n ≥ 1` (so `n+1` terms).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProgressionParams {
    pub a: Nat,
    pub d: Nat,
    /// The step count `N`: the last term is `a + n·d`.
    pub n: Nat,
}

impl ProgressionParams {
    pub fn new(a: Nat, d: Nat, n: Nat) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::invalid("common difference d must be ≥ 1"));
        }
        if n.is_zero() {
            return Err(Error::invalid("step count N must be ≥ 1"));
        }
        Ok(ProgressionParams { a, d, n })
    }

    pub fn from_u64(a: u64, d: u64, n: u64) -> Result<Self> {
        Self::new(Nat::from(a), Nat::from(d), Nat::from(n))
    }

    /// `a + N·d`, the right end of the progression interval.
    pub fn last_term(&self) -> Nat {
        &self.a + &self.n * &self.d
    }
}

/// Which enumeration produced a [`DeltaResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Algorithm {
    TermScan,
    SquareScan,
}

/// δ with its witness: `|a + n*·d − m*²| = delta`, and no pair achieves a
/// smaller distance (nor an equal one with smaller `n*`, then `m*`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaResult {
    pub delta: Nat,
    pub n_star: Nat,
    pub m_star: Nat,
    pub algorithm: Algorithm,
}

// ---------------------------------------------------------------------------
// u128 fast-path kernels. Used whenever a + N·d < 2^124 (so every
// intermediate square fits in u128); the arbitrary-precision mirrors below
// are the fallback and the cross-check.
// ---------------------------------------------------------------------------

pub(crate) struct U128Params {
    pub a: u128,
    pub d: u128,
    pub n: u128,
}

pub(crate) fn to_u128(p: &ProgressionParams) -> Option<U128Params> {
    let a = p.a.to_u128()?;
    let d = p.d.to_u128()?;
    let n = p.n.to_u128()?;
    let top = n.checked_mul(d)?.checked_add(a)?;
    // Keep (isqrt(top)+1)² comfortably inside u128.
    if top >= 1u128 << 124 {
        return None;
    }
    Some(U128Params { a, d, n })
}

/// Lexicographic minimum of (dist, n, m) over the term enumeration.
fn brute_u128(a: u128, d: u128, n: u128) -> (u128, u128, u128) {
    let mut best = (u128::MAX, u128::MAX, u128::MAX);
    let mut term = a;
    let mut step = 0u128;
    loop {
        let r = isqrt_u128(term);
        let below = term - r * r;
        let above = (r + 1) * (r + 1) - term;
        let cand = if below <= above {
            (below, step, r)
        } else {
            (above, step, r + 1)
        };
        if cand < best {
            best = cand;
            if best.0 == 0 {
                // No later step can win the tie-break at distance zero.
                break;
            }
        }
        if step == n {
            break;
        }
        step += 1;
        term += d;
    }
    best
}

/// Lexicographic minimum of (dist, n, m) over the square enumeration.
fn scan_u128(a: u128, d: u128, n: u128) -> (u128, u128, u128) {
    let top = a + n * d;
    let m_lo = isqrt_u128(a);
    let m_hi = isqrt_u128(top) + 1;
    let di = d as i128;
    let mut best = (u128::MAX, u128::MAX, u128::MAX);
    for m in m_lo..=m_hi {
        let sq = m * m;
        let p = sq as i128 - a as i128;
        // Nearest step to (m² − a)/d, halves rounded down; the ±1 neighbors
        // below make the rounding convention irrelevant to correctness.
        let cand = (2 * p + di - 1).div_euclid(2 * di);
        let c0 = cand.clamp(0, n as i128);
        for nc in [c0 - 1, c0, c0 + 1] {
            if nc < 0 || nc > n as i128 {
                continue;
            }
            let term = a + nc as u128 * d;
            let t = (term.abs_diff(sq), nc as u128, m);
            if t < best {
                best = t;
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Arbitrary-precision kernels.
// ---------------------------------------------------------------------------

fn brute_big(p: &ProgressionParams) -> (Nat, Nat, Nat) {
    let mut best: Option<(Nat, Nat, Nat)> = None;
    let mut term = p.a.clone();
    let mut step = Nat::zero();
    loop {
        let (dist, m) = nearest_square_distance(&term);
        let cand = (dist, step.clone(), m);
        let better = best.as_ref().is_none_or(|b| cand < *b);
        if better {
            let zero = cand.0.is_zero();
            best = Some(cand);
            if zero {
                break;
            }
        }
        if step == p.n {
            break;
        }
        step += 1u32;
        term += &p.d;
    }
    best.expect("at least one term")
}

fn scan_big(p: &ProgressionParams) -> (Nat, Nat, Nat) {
    let top = p.last_term();
    let m_lo = isqrt(&p.a);
    let m_hi = isqrt(&top) + 1u32;
    let a = BigInt::from(p.a.clone());
    let d = BigInt::from(p.d.clone());
    let n = BigInt::from(p.n.clone());
    let mut best: Option<(Nat, Nat, Nat)> = None;
    let mut m = m_lo;
    while m <= m_hi {
        let sq = BigInt::from(&m * &m);
        let pnum = &sq - &a;
        let two = BigInt::from(2u32);
        let cand = (&pnum * &two + &d - BigInt::one()).div_floor(&(&d * &two));
        let c0 = cand.max(BigInt::zero()).min(n.clone());
        for off in [-1i32, 0, 1] {
            let nc = &c0 + off;
            if nc.is_negative() || nc > n {
                continue;
            }
            let term = &a + &nc * &d;
            let dist = (&term - &sq).abs().to_biguint().unwrap();
            let t = (dist, nc.to_biguint().unwrap(), m.clone());
            if best.as_ref().is_none_or(|b| t < *b) {
                best = Some(t);
            }
        }
        m += 1u32;
    }
    best.expect("scan range is never empty")
}

// ---------------------------------------------------------------------------
// Public API.
// ---------------------------------------------------------------------------

fn pack(t: (u128, u128, u128), algorithm: Algorithm) -> DeltaResult {
    DeltaResult {
        delta: Nat::from(t.0),
        n_star: Nat::from(t.1),
        m_star: Nat::from(t.2),
        algorithm,
    }
}

/// δ by scanning the progression terms; the oracle implementation.
pub fn delta_bruteforce(p: &ProgressionParams) -> DeltaResult {
    match to_u128(p) {
        Some(k) => pack(brute_u128(k.a, k.d, k.n), Algorithm::TermScan),
        None => {
            let (delta, n_star, m_star) = brute_big(p);
            DeltaResult {
                delta,
                n_star,
                m_star,
                algorithm: Algorithm::TermScan,
            }
        }
    }
}

/// δ by scanning the perfect squares near `[a, a+Nd]`; always equal to
/// [`delta_bruteforce`], witnesses included.
pub fn delta_square_scan(p: &ProgressionParams) -> DeltaResult {
    match to_u128(p) {
        Some(k) => pack(scan_u128(k.a, k.d, k.n), Algorithm::SquareScan),
        None => {
            let (delta, n_star, m_star) = scan_big(p);
            DeltaResult {
                delta,
                n_star,
                m_star,
                algorithm: Algorithm::SquareScan,
            }
        }
    }
}

/// δ by whichever enumeration is shorter: terms (`N+1`) or squares (`M+2`).
pub fn delta(p: &ProgressionParams) -> DeltaResult {
    let m_count = isqrt(&p.last_term()) - isqrt(&p.a);
    // Compare M+2 against N; ties go to the term scan.
    if &m_count + 2u32 < p.n {
        delta_square_scan(p)
    } else {
        delta_bruteforce(p)
    }
}

/// True iff the closed interval `[a, a+Nd]` contains a perfect square.
/// (Weaker than `delta = 0`, which asks for a *term* to be a square.)
pub fn interval_contains_square(p: &ProgressionParams) -> bool {
    let r = crate::exactint::ceil_sqrt(&p.a);
    &r * &r <= p.last_term()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: u64, d: u64, n: u64) -> ProgressionParams {
        ProgressionParams::from_u64(a, d, n).unwrap()
    }

    fn unpack(r: &DeltaResult) -> (u64, u64, u64) {
        (
            r.delta.to_u64().unwrap(),
            r.n_star.to_u64().unwrap(),
            r.m_star.to_u64().unwrap(),
        )
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(ProgressionParams::from_u64(1, 0, 1).is_err());
        assert!(ProgressionParams::from_u64(1, 1, 0).is_err());
    }

    #[test]
    fn pinned_examples() {
        assert_eq!(unpack(&delta_bruteforce(&p(0, 5, 1))), (0, 0, 0));
        assert_eq!(unpack(&delta_bruteforce(&p(9, 7, 3))), (0, 0, 3));
        assert_eq!(unpack(&delta_bruteforce(&p(2, 3, 2))), (1, 0, 1));
        assert_eq!(unpack(&delta_square_scan(&p(2, 3, 2))), (1, 0, 1));
        assert_eq!(unpack(&delta_square_scan(&p(4011, 38, 2))), (9, 2, 64));
        assert_eq!(unpack(&delta(&p(4011, 38, 2))), (9, 2, 64));
        assert_eq!(delta(&p(0, 1, 10)).delta, Nat::zero());
    }

    #[test]
    fn first_term_square_means_zero() {
        for k in 0u64..40 {
            let r = delta_square_scan(&p(k * k, 7, 5));
            assert_eq!(unpack(&r), (0, 0, k));
        }
    }

    #[test]
    fn algorithms_agree_on_small_grid() {
        // A fast slice of the exhaustive acceptance grid.
        for a in 0u64..240 {
            for d in 1..14 {
                for n in 1..14 {
                    let pp = p(a, d, n);
                    let b = delta_bruteforce(&pp);
                    let s = delta_square_scan(&pp);
                    assert_eq!(
                        (b.delta.clone(), b.n_star.clone(), b.m_star.clone()),
                        (s.delta, s.n_star, s.m_star),
                        "a={a} d={d} n={n}"
                    );
                    let d2 = delta(&pp);
                    assert_eq!(b.delta, d2.delta);
                }
            }
        }
    }

    #[test]
    fn big_kernels_agree_with_u128_kernels() {
        // Force the arbitrary-precision path and compare against the fast path.
        for (a, d, n) in [
            (4011u64, 38u64, 2u64),
            (0, 2, 10),
            (123_456, 789, 33),
            (99_866_711, 5996, 25),
        ] {
            let pp = p(a, d, n);
            let fast_b = brute_u128(a as u128, d as u128, n as u128);
            let slow_b = brute_big(&pp);
            assert_eq!(
                (
                    Nat::from(fast_b.0),
                    Nat::from(fast_b.1),
                    Nat::from(fast_b.2)
                ),
                slow_b
            );
            let fast_s = scan_u128(a as u128, d as u128, n as u128);
            let slow_s = scan_big(&pp);
            assert_eq!(
                (
                    Nat::from(fast_s.0),
                    Nat::from(fast_s.1),
                    Nat::from(fast_s.2)
                ),
                slow_s
            );
        }
    }

    #[test]
    fn huge_inputs_use_big_path_and_agree() {
        // a + Nd just above the u128 cutoff: the two public algorithms must
        // still agree with each other.
        let a = Nat::one() << 130;
        let pp = ProgressionParams::new(a, Nat::from(1000u32), Nat::from(40u32)).unwrap();
        assert!(to_u128(&pp).is_none());
        let b = delta_bruteforce(&pp);
        let s = delta_square_scan(&pp);
        assert_eq!((b.delta, b.n_star, b.m_star), (s.delta, s.n_star, s.m_star));
    }

    #[test]
    fn monotone_in_n() {
        for a in [5u64, 72, 1000, 4011] {
            for d in [3u64, 38] {
                let mut prev: Option<Nat> = None;
                for n in 1..40 {
                    let r = delta(&p(a, d, n)).delta;
                    if let Some(pr) = prev {
                        assert!(r <= pr, "a={a} d={d} n={n}");
                    }
                    prev = Some(r);
                }
            }
        }
    }

    #[test]
    fn trivial_bound_when_interval_has_square() {
        for a in 0u64..200 {
            for d in 1..20 {
                for n in [1u64, 3, 10] {
                    let pp = p(a, d, n);
                    if interval_contains_square(&pp) {
                        let r = delta(&pp);
                        assert!(
                            r.delta.to_u64().unwrap() <= d.div_ceil(2),
                            "a={a} d={d} n={n} delta={}",
                            r.delta
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn zero_iff_term_is_square() {
        for a in 0u64..150 {
            for d in 1..10 {
                let n = 8;
                let pp = p(a, d, n);
                let zero = delta(&pp).delta.is_zero();
                let direct = (0..=n).any(|i| {
                    let t = a + i * d;
                    let r = isqrt_u128(t as u128) as u64;
                    r * r == t
                });
                assert_eq!(zero, direct, "a={a} d={d}");
            }
        }
    }

    #[test]
    fn witness_invariant_holds() {
        for a in [0u64, 17, 4011, 100_000] {
            for d in [1u64, 38, 59] {
                for n in [1u64, 2, 50] {
                    let pp = p(a, d, n);
                    let r = delta(&pp);
                    let term = &pp.a + &r.n_star * &pp.d;
                    let sq = &r.m_star * &r.m_star;
                    let dist = if term >= sq { &term - &sq } else { &sq - &term };
                    assert_eq!(dist, r.delta);
                    assert!(r.n_star <= pp.n);
                }
            }
        }
    }
}
