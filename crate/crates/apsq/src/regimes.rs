//! Exact classification of `(a, d, N)` against every hypothesis threshold,
//! plus evaluation of each predicted bound and the ratio δ/bound.
//!
//! Hypotheses with fractional exponents are decided by clearing denominators
//! and exponents into integer monomial comparisons — e.g.
//! `a ≤ N^{4/3} d^{4/3} / 200` becomes `8·10⁶·a³ ≤ N⁴ d⁴` — so verdicts near
//! the boundary are exact, which is the whole point. Only the bound *values*
//! (things like `a^{1/4}√d/√N`) are evaluated in 192-bit floating point.

use std::fmt;

use astro_float::BigFloat;
use num_traits::ToPrimitive;

use crate::delta::{self, ProgressionParams};
use crate::exactint::{ceil_sqrt, isqrt, isqrt_u128};
use crate::hp::{self, HpCtx};
use crate::{Error, Nat, Result};

/// Which case of the first theorem's three-way bound applies.
///
/// Gate for all three: `1800·a ≤ N²·d`. Boundary points (`a = Nd` or
/// `a = N²`) belong to two cases; the classifier reports the first match in
/// the order below and sets [`RegimeReport::thm1_boundary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Thm1Case {
    /// `max(Nd, N²) ≤ a`: bound `a^{1/4} d^{1/2} / N^{1/2}`.
    Case1,
    /// `N² ≤ a ≤ Nd`: bound `d^{3/4} / N^{1/4}`.
    Case2,
    /// `a ≤ N²`: bound `d^{1/2}`.
    Case3,
    NotApplicable,
}

/// Which case of the second theorem's bound applies.
///
/// Gate for both: `a ≤ N^{4/3} d^{4/3} / 200` (exact form `8·10⁶·a³ ≤ N⁴d⁴`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Thm2Case {
    /// `max(Nd, N^{2/3} d^{4/3}) ≤ a`: bound `a^{1/2} / N^{1/2}`.
    Case1,
    /// `max(Nd, d^{4/3}) ≤ a ≤ N^{2/3} d^{4/3}`: bound `d / a^{1/4}`.
    Case2,
    NotApplicable,
}

impl fmt::Display for Thm1Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Thm1Case::Case1 => "case1",
            Thm1Case::Case2 => "case2",
            Thm1Case::Case3 => "case3",
            Thm1Case::NotApplicable => "na",
        })
    }
}

impl fmt::Display for Thm2Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Thm2Case::Case1 => "case1",
            Thm2Case::Case2 => "case2",
            Thm2Case::NotApplicable => "na",
        })
    }
}

/// Every hypothesis flag, decided exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegimeReport {
    /// `4a ≤ (Nd−1)²` — the standing admissibility hypothesis, equivalent to
    /// `√(a+Nd) − √a ≥ 1` (the interval is long enough to contain a square).
    pub admissible: bool,
    /// The closed interval `[a, a+Nd]` actually contains a perfect square.
    pub contains_square: bool,
    /// `⌊√(a+Nd)⌋ − ⌊√a⌋`, the integer count proxy for `M`.
    pub m_upper: Nat,
    /// `N ≤ d + 2√a` (exactly: `N ≤ d` or `(N−d)² ≤ 4a`).
    pub conj1_applicable: bool,
    /// `N > d + 2√a` — the complementary regime.
    pub conj2_applicable: bool,
    pub thm1_case: Thm1Case,
    /// True when the point sits on a shared case boundary (`a = Nd` or
    /// `a = N²` with membership in two cases).
    pub thm1_boundary: bool,
    pub thm2_case: Thm2Case,
    /// `25·N²·d ≤ a ≤ N²·d²` **and** `d ≥ 30` — the range where the extremal
    /// family forces `δ ≥ d/1800`. True here does *not* assert the bound;
    /// only family members certify it.
    pub note_range: bool,
}

/// Classifies exactly; every comparison is integer arithmetic.
pub fn classify(p: &ProgressionParams) -> RegimeReport {
    if let Some(k) = to_kernel(p) {
        classify_u128(&k)
    } else {
        classify_big(p)
    }
}

struct Kernel {
    a: u128,
    d: u128,
    n: u128,
}

/// The u128 path needs every intermediate product to fit: the largest are
/// `N⁴d⁴ = ((Nd)²)²` and `8·10⁶·a³`.
fn to_kernel(p: &ProgressionParams) -> Option<Kernel> {
    let a = p.a.to_u128()?;
    let d = p.d.to_u128()?;
    let n = p.n.to_u128()?;
    if a < 1 << 33 && d < 1 << 31 && n.checked_mul(d)? < 1 << 31 {
        Some(Kernel { a, d, n })
    } else {
        None
    }
}

fn classify_u128(k: &Kernel) -> RegimeReport {
    let Kernel { a, d, n } = *k;
    let nd = n * d;
    let top = a + nd;
    let admissible = 4 * a <= (nd - 1) * (nd - 1);
    let root_a = isqrt_u128(a);
    let m_upper = isqrt_u128(top) - root_a;
    let contains_square = {
        let c = if root_a * root_a == a {
            root_a
        } else {
            root_a + 1
        };
        c * c <= top
    };
    let conj1_applicable = n <= d || (n - d) * (n - d) <= 4 * a;

    let n2 = n * n;
    let (thm1_case, thm1_boundary) = if 1800 * a <= n2 * d {
        let c1 = a >= nd && a >= n2;
        let c2 = n2 <= a && a <= nd;
        let c3 = a <= n2;
        let case = if c1 {
            Thm1Case::Case1
        } else if c2 {
            Thm1Case::Case2
        } else {
            Thm1Case::Case3
        };
        (case, (c1 as u8 + c2 as u8 + c3 as u8) >= 2)
    } else {
        (Thm1Case::NotApplicable, false)
    };

    let a3 = a * a * a;
    let nd2 = nd * nd;
    let d4 = d * d * d * d;
    let thm2_case = if 8_000_000 * a3 <= nd2 * nd2 {
        if a >= nd && a3 >= n2 * d4 {
            Thm2Case::Case1
        } else if a >= nd && a3 >= d4 && a3 <= n2 * d4 {
            Thm2Case::Case2
        } else {
            Thm2Case::NotApplicable
        }
    } else {
        Thm2Case::NotApplicable
    };

    let note_range = 25 * n2 * d <= a && a <= n2 * d * d && d >= 30;

    RegimeReport {
        admissible,
        contains_square,
        m_upper: Nat::from(m_upper),
        conj1_applicable,
        conj2_applicable: !conj1_applicable,
        thm1_case,
        thm1_boundary,
        thm2_case,
        note_range,
    }
}

fn classify_big(p: &ProgressionParams) -> RegimeReport {
    let a = &p.a;
    let d = &p.d;
    let n = &p.n;
    let nd = n * d;
    let top = a + &nd;
    let admissible = {
        let s = &nd - 1u32;
        Nat::from(4u32) * a <= &s * &s
    };
    let root_a = isqrt(a);
    let m_upper = isqrt(&top) - &root_a;
    let contains_square = {
        let c = ceil_sqrt(a);
        &c * &c <= top
    };
    let conj1_applicable = n <= d || {
        let diff = n - d;
        &diff * &diff <= Nat::from(4u32) * a
    };

    let n2 = n * n;
    let (thm1_case, thm1_boundary) = if Nat::from(1800u32) * a <= &n2 * d {
        let c1 = *a >= nd && *a >= n2;
        let c2 = n2 <= *a && *a <= nd;
        let c3 = *a <= n2;
        let case = if c1 {
            Thm1Case::Case1
        } else if c2 {
            Thm1Case::Case2
        } else {
            Thm1Case::Case3
        };
        (case, (c1 as u8 + c2 as u8 + c3 as u8) >= 2)
    } else {
        (Thm1Case::NotApplicable, false)
    };

    let a3 = a * a * a;
    let d4 = d.pow(4);
    let thm2_case = if Nat::from(8_000_000u32) * &a3 <= nd.pow(4) {
        if *a >= nd && a3 >= &n2 * &d4 {
            Thm2Case::Case1
        } else if *a >= nd && a3 >= d4 && a3 <= &n2 * &d4 {
            Thm2Case::Case2
        } else {
            Thm2Case::NotApplicable
        }
    } else {
        Thm2Case::NotApplicable
    };

    let note_range =
        Nat::from(25u32) * &n2 * d <= *a && *a <= &n2 * d * d && *d >= Nat::from(30u32);

    RegimeReport {
        admissible,
        contains_square,
        m_upper,
        conj1_applicable,
        conj2_applicable: !conj1_applicable,
        thm1_case,
        thm1_boundary,
        thm2_case,
        note_range,
    }
}

/// Which bound expression to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// Case-selected: `a^{1/4}d^{1/2}/N^{1/2}`, `d^{3/4}/N^{1/4}`, or `d^{1/2}`.
    Thm1,
    /// Case-selected: `a^{1/2}/N^{1/2}` or `d/a^{1/4}`.
    Thm2,
    /// `d^{3/4}`. Evaluated unconditionally — it only involves `d`, and the
    /// range restriction (same gate as Thm1) is the caller's concern.
    Cor1,
    /// `√(a+Nd)/N · d^ε`, gated on admissibility and `N ≤ d + 2√a`.
    Conj1,
    /// `d^ε`, gated on admissibility and `N > d + 2√a`.
    Conj2,
    /// The spacing heuristic `(√(a+Nd)+√a)/N = d/M`; ungated diagnostic.
    Heuristic,
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundKind::Thm1 => "thm1",
            BoundKind::Thm2 => "thm2",
            BoundKind::Cor1 => "cor1",
            BoundKind::Conj1 => "conj1",
            BoundKind::Conj2 => "conj2",
            BoundKind::Heuristic => "heuristic",
        })
    }
}

/// A predicted bound value at 192-bit working precision.
#[derive(Clone, Debug)]
pub struct BoundPrediction {
    pub kind: BoundKind,
    pub value: BigFloat,
    /// The ε that entered the formula (0 for the ε-free kinds).
    pub epsilon_used: f64,
}

impl BoundPrediction {
    pub fn value_f64(&self) -> f64 {
        hp::with_ctx(|ctx| ctx.to_f64(&self.value))
    }
}

/// Evaluates the bound `kind` predicts for `p`, after checking the kind's
/// hypotheses exactly; the error names the violated inequality.
pub fn predicted_bound(
    p: &ProgressionParams,
    kind: BoundKind,
    epsilon: f64,
) -> Result<BoundPrediction> {
    hp::with_ctx(|ctx| predicted_bound_in(ctx, p, kind, epsilon))
}

/// As [`predicted_bound`], with an explicit context (for sweep workers).
pub fn predicted_bound_in(
    ctx: &mut HpCtx,
    p: &ProgressionParams,
    kind: BoundKind,
    epsilon: f64,
) -> Result<BoundPrediction> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::invalid(format!(
            "epsilon must be ≥ 0, got {epsilon}"
        )));
    }
    let report = classify(p);
    let value = match kind {
        BoundKind::Thm1 => match report.thm1_case {
            Thm1Case::Case1 => {
                // (a·d²/N²)^{1/4}
                let num = ctx.from_nat(&(&p.a * &p.d * &p.d));
                let den = ctx.from_nat(&(&p.n * &p.n));
                ctx.fourth_root(&ctx.div(&num, &den))
            }
            Thm1Case::Case2 => {
                // (d³/N)^{1/4}
                let num = ctx.from_nat(&p.d.pow(3));
                let den = ctx.from_nat(&p.n);
                ctx.fourth_root(&ctx.div(&num, &den))
            }
            Thm1Case::Case3 => ctx.sqrt(&ctx.from_nat(&p.d)),
            Thm1Case::NotApplicable => {
                return Err(Error::regime(format!(
                    "theorem 1 needs 1800·a ≤ N²·d; got 1800·{} > {}²·{}",
                    p.a, p.n, p.d
                )));
            }
        },
        BoundKind::Thm2 => match report.thm2_case {
            Thm2Case::Case1 => {
                let num = ctx.from_nat(&p.a);
                let den = ctx.from_nat(&p.n);
                ctx.sqrt(&ctx.div(&num, &den))
            }
            Thm2Case::Case2 => {
                let num = ctx.from_nat(&p.d);
                let den = ctx.fourth_root(&ctx.from_nat(&p.a));
                ctx.div(&num, &den)
            }
            Thm2Case::NotApplicable => {
                return Err(Error::regime(format!(
                    "theorem 2 needs 8·10⁶·a³ ≤ N⁴·d⁴ and a ≥ max(N·d, d^{{4/3}}); \
                     violated at a={}, d={}, N={}",
                    p.a, p.d, p.n
                )));
            }
        },
        BoundKind::Cor1 => ctx.fourth_root(&ctx.from_nat(&p.d.pow(3))),
        BoundKind::Conj1 => {
            require_admissible(&report, p)?;
            if !report.conj1_applicable {
                return Err(Error::regime(format!(
                    "conjecture 1 needs N ≤ d + 2√a; got N={}, d={}, a={}",
                    p.n, p.d, p.a
                )));
            }
            let root = ctx.sqrt(&ctx.from_nat(&p.last_term()));
            let base = ctx.div(&root, &ctx.from_nat(&p.n));
            let dv = ctx.from_nat(&p.d);
            let eps_factor = ctx.pow_f64(&dv, epsilon);
            ctx.mul(&base, &eps_factor)
        }
        BoundKind::Conj2 => {
            require_admissible(&report, p)?;
            if !report.conj2_applicable {
                return Err(Error::regime(format!(
                    "conjecture 2 needs N > d + 2√a; got N={}, d={}, a={}",
                    p.n, p.d, p.a
                )));
            }
            let dv = ctx.from_nat(&p.d);
            ctx.pow_f64(&dv, epsilon)
        }
        BoundKind::Heuristic => {
            let s1 = ctx.sqrt(&ctx.from_nat(&p.last_term()));
            let s2 = ctx.sqrt(&ctx.from_nat(&p.a));
            ctx.div(&ctx.add(&s1, &s2), &ctx.from_nat(&p.n))
        }
    };
    let epsilon_used = match kind {
        BoundKind::Conj1 | BoundKind::Conj2 => epsilon,
        _ => 0.0,
    };
    Ok(BoundPrediction {
        kind,
        value,
        epsilon_used,
    })
}

fn require_admissible(report: &RegimeReport, p: &ProgressionParams) -> Result<()> {
    if !report.admissible {
        return Err(Error::regime(format!(
            "admissibility needs 4a ≤ (Nd−1)²; got a={}, d={}, N={}",
            p.a, p.d, p.n
        )));
    }
    Ok(())
}

/// `δ(p) / predicted_bound(p, kind, ε)` as `f64`; the bound is positive
/// whenever defined, so this never yields NaN.
pub fn ratio(p: &ProgressionParams, kind: BoundKind, epsilon: f64) -> Result<f64> {
    hp::with_ctx(|ctx| ratio_in(ctx, p, kind, epsilon))
}

/// As [`ratio`], with an explicit context (for sweep workers).
pub fn ratio_in(
    ctx: &mut HpCtx,
    p: &ProgressionParams,
    kind: BoundKind,
    epsilon: f64,
) -> Result<f64> {
    let bound = predicted_bound_in(ctx, p, kind, epsilon)?;
    let dv = delta::delta(p);
    let num = ctx.from_nat(&dv.delta);
    let r = ctx.to_f64(&ctx.div(&num, &bound.value));
    debug_assert!(r.is_finite());
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: u64, d: u64, n: u64) -> ProgressionParams {
        ProgressionParams::from_u64(a, d, n).unwrap()
    }

    #[test]
    fn pinned_classifications() {
        let r = classify(&p(0, 2, 10));
        assert!(r.admissible);
        assert_eq!(r.thm1_case, Thm1Case::Case3);

        let r = classify(&p(4011, 38, 2));
        assert!(r.note_range);
        assert!(!r.admissible);
        assert!(!r.contains_square);
        assert_eq!(r.m_upper, Nat::from(0u32));
        assert_eq!(r.thm1_case, Thm1Case::NotApplicable);
        assert_eq!(r.thm2_case, Thm2Case::NotApplicable);

        let r = classify(&p(100, 5, 1000));
        assert!(r.conj2_applicable);
        assert!(!r.conj1_applicable);
    }

    #[test]
    fn thm2_cases_reachable() {
        // Case 1: a = 10⁷, d = 10³, N = 10⁴ (all hypotheses verified by hand).
        let r = classify(&p(10_000_000, 1_000, 10_000));
        assert_eq!(r.thm2_case, Thm2Case::Case1);
        // Case 2: d ≥ N region — a = 10⁷, d = 10⁵, N = 10².
        let r = classify(&p(10_000_000, 100_000, 100));
        assert_eq!(r.thm2_case, Thm2Case::Case2);
    }

    #[test]
    fn thm1_boundary_flagged() {
        // a = N² = 100 ≤ Nd = 18000, gate holds with equality
        // (1800·100 = 10²·1800): cases 2 and 3 both match.
        let r = classify(&p(100, 1800, 10));
        assert!(matches!(r.thm1_case, Thm1Case::Case2));
        assert!(r.thm1_boundary);
        // Just off the boundary: unambiguous case 3.
        let r = classify(&p(99, 1800, 10));
        assert_eq!(r.thm1_case, Thm1Case::Case3);
        assert!(!r.thm1_boundary);
    }

    #[test]
    fn kernel_and_big_classifier_agree() {
        let samples: Vec<(u64, u64, u64)> = vec![
            (0, 1, 1),
            (0, 2, 10),
            (1, 1, 60),
            (100, 1800, 10),
            (4011, 38, 2),
            (2, 1, 60),    // 1800a = N²d exactly
            (100, 10, 10), // a = Nd = N² triple point
            (5000, 60, 60),
            (10_000_000, 1_000, 10_000),
            (10_000_000, 100_000, 100),
        ];
        for (a, d, n) in samples {
            let pp = p(a, d, n);
            let fast = to_kernel(&pp).map(|k| classify_u128(&k));
            let slow = classify_big(&pp);
            if let Some(fast) = fast {
                assert_eq!(fast, slow, "a={a} d={d} n={n}");
            }
            assert_eq!(classify(&pp), slow);
        }
    }

    #[test]
    fn conj1_self_consistency_on_grid() {
        // If N ≤ d + 2√a and Nd ≤ a then 2N² ≤ (√a + N)²; exact integer form
        // uses ⌈√a⌉ as the upper rounding of √a.
        for a in 1u64..400 {
            for d in 1..25 {
                for n in 1..25 {
                    let pp = p(a, d, n);
                    let r = classify(&pp);
                    if r.conj1_applicable && Nat::from(n * d) <= pp.a {
                        let lhs = Nat::from(2 * n * n);
                        let s = ceil_sqrt(&pp.a) + Nat::from(n);
                        assert!(lhs <= &s * &s, "a={a} d={d} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn admissible_implies_m_upper_positive_interval() {
        // Admissibility is exactly "the interval is long enough": check the
        // equivalent chain √(a+Nd) ≥ 1 + √a via contains_square.
        for a in 0u64..300 {
            for d in 1..12 {
                for n in 1..12 {
                    let pp = p(a, d, n);
                    let r = classify(&pp);
                    if r.admissible {
                        assert!(
                            r.contains_square,
                            "admissible interval must contain a square: a={a} d={d} n={n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn classifier_matches_floating_reference_off_boundary() {
        // A deliberately naive f64 classifier; compared only where its
        // margins are comfortably nonzero.
        for a in 0u64..500 {
            for (d, n) in [(3u64, 7u64), (38, 2), (60, 60), (7, 30)] {
                let (af, df, nf) = (a as f64, d as f64, n as f64);
                let margin = |x: f64, y: f64| (x - y).abs() > 1e-6 * (x.abs() + y.abs() + 1.0);
                let gate = 1800.0 * af;
                let rhs = nf * nf * df;
                if margin(gate, rhs) {
                    let r = classify(&p(a, d, n));
                    assert_eq!(gate <= rhs, r.thm1_case != Thm1Case::NotApplicable);
                }
            }
        }
    }

    #[test]
    fn pinned_bounds() {
        // Corollary bound at d = 16: 16^{3/4} = 8.
        let b = predicted_bound(&p(2, 16, 2), BoundKind::Cor1, 0.0).unwrap();
        assert!((b.value_f64() - 8.0).abs() < 1e-12);

        // d^ε with ε = 0 is 1 regardless of regime.
        let b = predicted_bound(&p(100, 5, 1000), BoundKind::Conj2, 0.0).unwrap();
        assert!((b.value_f64() - 1.0).abs() < 1e-15);

        // Thm2 case 1 at (a=10⁷, d=10³, N=10⁴): √(a/N) = √1000.
        let b = predicted_bound(&p(10_000_000, 1_000, 10_000), BoundKind::Thm2, 0.0).unwrap();
        assert!((b.value_f64() - 1000f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn pinned_ratio() {
        // δ(2,3,2) = 1; Cor1 bound 3^{3/4}: ratio = 3^{-3/4} ≈ 0.438691.
        let r = ratio(&p(2, 3, 2), BoundKind::Cor1, 0.0).unwrap();
        assert!((r - 1.0 / 3f64.powf(0.75)).abs() < 1e-12, "got {r}");
        // δ = 0 gives ratio 0.
        let r = ratio(&p(9, 7, 3), BoundKind::Cor1, 0.0).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn regime_mismatch_is_reported() {
        let err = predicted_bound(&p(4011, 38, 2), BoundKind::Thm1, 0.0).unwrap_err();
        assert!(matches!(err, Error::RegimeMismatch(_)));
        assert!(err.to_string().contains("1800"));

        let err = ratio(&p(100, 5, 1000), BoundKind::Conj1, 0.05).unwrap_err();
        assert!(matches!(err, Error::RegimeMismatch(_)));

        let err = predicted_bound(&p(2, 3, 2), BoundKind::Conj2, 0.05).unwrap_err();
        assert!(matches!(err, Error::RegimeMismatch(_)));
    }

    #[test]
    fn heuristic_is_d_over_m() {
        // (√(a+Nd) + √a)/N agrees with d/(√(a+Nd) − √a).
        let pp = p(10_000, 7, 100);
        let b = predicted_bound(&pp, BoundKind::Heuristic, 0.0).unwrap();
        let top = (10_000.0f64 + 700.0).sqrt();
        let expect = 7.0 / (top - 100.0);
        assert!((b.value_f64() - expect).abs() < 1e-9);
    }
}
