//! The extremal family `d = 2(9d′+1)`, `a = ((9d′+1)²(9X+1)²−1)/9`, chosen so
//! the fractional part of `2√a/d` sits near `1/3`, which forces every term of
//! the progression to stay at distance greater than `d/1800` from all squares
//! (for `d ≥ 30` and `25N²d ≤ a ≤ N²d²`).
//!
//! Everything that certifies the lower bound is exact integer arithmetic.
//! Write `B = (9d′+1)(9X+1)` and `s = √(B²−1) = 3√a`; the error terms of the
//! construction have the closed forms
//!
//! * `ε₁ = −2s/(9(s+B))`   (from `2√a/d = 3X + 1/3 + ε₁/(d√a)`),
//! * `ε₂ = −s/(9(s+B)) = ε₁/2`   (from `√a = A + 1/3 + ε₂/√a`),
//! * `ε₃ = −2(s+1)/(9(s+B))`   (from `(2√a/d)(√a−A) = X + 1/9 + ε₃/d`),
//!
//! each derived by rationalizing with `(B−s)(B+s) = 1`. Their range checks
//! reduce to linear inequalities in `s`, decided exactly by sign analysis and
//! squaring (see [`sqrt_lin_lt`]). The Taylor term `ε₀` is certified per `n`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::delta::{self, ProgressionParams};
use crate::exactint::{ceil_sqrt, isqrt};
use crate::hp::{self, HpCtx};
use crate::{Error, Nat, Result};

/// One member of the family, with every derived quantity precomputed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyInstance {
    pub d_prime: Nat,
    pub x: Nat,
    /// The progression length `N` this instance will be checked against.
    pub n: Nat,
    /// `d = 2(9d′+1)`.
    pub d: Nat,
    /// `a = ((9d′+1)²(9X+1)²−1)/9`.
    pub a: Nat,
    /// `A = ⌊√a⌋ = 27d′X + 3X + 3d′`.
    pub a_root: Nat,
}

impl FamilyInstance {
    /// `B = (9d′+1)(9X+1) = 3A + 1`; the fundamental quantity with `9a+1 = B²`.
    pub fn b_value(&self) -> Nat {
        (Nat::from(9u32) * &self.d_prime + 1u32) * (Nat::from(9u32) * &self.x + 1u32)
    }

    /// The progression `(a, d, N)` this instance describes.
    pub fn progression(&self) -> ProgressionParams {
        ProgressionParams::new(self.a.clone(), self.d.clone(), self.n.clone())
            .expect("family instances always have d ≥ 1, N ≥ 1")
    }
}

/// Builds the instance for `(d′, X)` and records the target length `N`.
///
/// Asserts the construction identities: `9 | B²−1` and `⌊√a⌋ = 27d′X+3X+3d′`.
pub fn family_instance(d_prime: &Nat, x: &Nat, n: &Nat) -> Result<FamilyInstance> {
    if d_prime.is_zero() || x.is_zero() {
        return Err(Error::invalid("family parameters need d′ ≥ 1 and X ≥ 1"));
    }
    if n.is_zero() {
        return Err(Error::invalid("family instance needs N ≥ 1"));
    }
    let nine = Nat::from(9u32);
    let p = &nine * d_prime + 1u32;
    let q = &nine * x + 1u32;
    let b = &p * &q;
    let b2m1 = &b * &b - 1u32;
    assert!(
        (&b2m1 % &nine).is_zero(),
        "(9d′+1)²(9X+1)²−1 is divisible by 9 by construction"
    );
    let a = &b2m1 / &nine;
    let d = Nat::from(2u32) * &p;
    let a_root = Nat::from(27u32) * d_prime * x + Nat::from(3u32) * x + Nat::from(3u32) * d_prime;
    assert_eq!(a_root, isqrt(&a), "A = 27d′X + 3X + 3d′ must equal ⌊√a⌋");
    Ok(FamilyInstance {
        d_prime: d_prime.clone(),
        x: x.clone(),
        n: n.clone(),
        d,
        a,
        a_root,
    })
}

/// Convenience constructor from machine integers.
pub fn family_instance_u64(d_prime: u64, x: u64, n: u64) -> Result<FamilyInstance> {
    family_instance(&Nat::from(d_prime), &Nat::from(x), &Nat::from(n))
}

/// All `N` with `25N²d ≤ a ≤ N²d²`, or `None` when no `N` qualifies.
///
/// Exact: `a ≤ N²d²  ⇔  Nd ≥ ⌈√a⌉`, and `25N²d ≤ a  ⇔  N² ≤ ⌊a/(25d)⌋`.
pub fn valid_n_range(inst: &FamilyInstance) -> Option<(Nat, Nat)> {
    let lo_bound = ceil_sqrt(&inst.a);
    // Smallest N ≥ 1 with Nd ≥ ⌈√a⌉.
    let n_min = {
        let q = (&lo_bound + &inst.d - 1u32) / &inst.d;
        if q.is_zero() {
            Nat::from(1u32)
        } else {
            q
        }
    };
    let n_max = isqrt(&(&inst.a / (Nat::from(25u32) * &inst.d)));
    if n_min > n_max {
        None
    } else {
        Some((n_min, n_max))
    }
}

/// `true` when the lower-bound theorem can apply to this instance at all:
/// `d ≥ 30` and the `N`-range is nonempty.
pub fn theorem_applicable(inst: &FamilyInstance) -> bool {
    inst.d >= Nat::from(30u32) && valid_n_range(inst).is_some()
}

/// Outcome of the exact range checks on the construction's error terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EpsilonCertificate {
    /// `|ε₀| ≤ 1/8` for every `n ∈ [0, N]` (Taylor remainder of `√(a+nd)`).
    pub eps0_range_ok: bool,
    /// `ε₁ ∈ (−3, 0)`.
    pub eps1_range_ok: bool,
    /// `ε₂ ∈ (−1, 0)`.
    pub eps2_range_ok: bool,
    /// `ε₃ ∈ (−3, 0)`.
    pub eps3_range_ok: bool,
}

impl EpsilonCertificate {
    pub fn all_ok(&self) -> bool {
        self.eps0_range_ok && self.eps1_range_ok && self.eps2_range_ok && self.eps3_range_ok
    }
}

/// Decides `α·s < β` exactly for `s = √(s2) ≥ 0`, by sign analysis first and
/// squaring second (squaring is valid only once both sides are known
/// nonnegative or both known nonpositive).
fn sqrt_lin_lt(alpha: &BigInt, beta: &BigInt, s2: &Nat) -> bool {
    let s2 = BigInt::from(s2.clone());
    if !alpha.is_negative() {
        if beta.is_positive() {
            // Both sides ≥ 0: compare squares.
            alpha * alpha * &s2 < beta * beta
        } else {
            // α·s ≥ 0 ≥ β: strict inequality impossible.
            false
        }
    } else if !beta.is_negative() {
        // α < 0 so α·s ≤ 0 ≤ β; fails only when both sides are zero.
        !(s2.is_zero() && beta.is_zero())
    } else {
        // Both sides negative: |α|·s > |β|.
        alpha * alpha * &s2 > beta * beta
    }
}

/// Certifies every ε-range with exact integer arithmetic.
///
/// Each bound clears the positive denominator `9(s+B)` and becomes `α·s < β`:
///
/// * `ε₁ < 0   ⇔ −2s < 0`;      `ε₁ > −3 ⇔ −25s < 27B`
/// * `ε₂ < 0   ⇔ −s < 0`;       `ε₂ > −1 ⇔ −8s < 9B`
/// * `ε₃ < 0   ⇔ −2s < 2`;      `ε₃ > −3 ⇔ −25s < 27B − 2`
///
/// For `ε₀`, the two-sided bound `|ε₀| ≤ 1/8` at a given `n` is (after
/// multiplying by `8a^{3/2} > 0`):
/// upper side `√(a+nd) ≤ √a + nd/(2√a)` ⇔ `0 ≤ n²d²/(4a)` (always), and
/// lower side `8a^{3/2}·√(a+nd) ≥ 8a² + 4and − n²d² =: V`, which holds
/// trivially when `V ≤ 0` and is `V² ≤ 64a³(a+nd)` otherwise.
pub fn certify_epsilons(inst: &FamilyInstance) -> EpsilonCertificate {
    let b = BigInt::from(inst.b_value());
    let s2 = {
        let bb = inst.b_value();
        &bb * &bb - 1u32
    };
    let zero = BigInt::zero();
    let m2 = BigInt::from(-2);
    let m8 = BigInt::from(-8);
    let m25 = BigInt::from(-25);

    let eps1_range_ok =
        sqrt_lin_lt(&m2, &zero, &s2) && sqrt_lin_lt(&m25, &(BigInt::from(27) * &b), &s2);
    let eps2_range_ok = sqrt_lin_lt(&BigInt::from(-1), &zero, &s2)
        && sqrt_lin_lt(&m8, &(BigInt::from(9) * &b), &s2);
    let eps3_range_ok = sqrt_lin_lt(&m2, &BigInt::from(2), &s2)
        && sqrt_lin_lt(&m25, &(BigInt::from(27) * &b - 2), &s2);

    let mut eps0_range_ok = true;
    let a = BigInt::from(inst.a.clone());
    let d = BigInt::from(inst.d.clone());
    let a2_8 = BigInt::from(8) * &a * &a;
    let a3_64 = BigInt::from(64) * &a * &a * &a;
    let mut n = BigInt::zero();
    let n_hi = BigInt::from(inst.n.clone());
    while n <= n_hi {
        let nd = &n * &d;
        let v = &a2_8 + BigInt::from(4) * &a * &nd - &nd * &nd;
        if v.is_positive() && &v * &v > &a3_64 * (&a + &nd) {
            eps0_range_ok = false;
            break;
        }
        n += 1;
    }

    EpsilonCertificate {
        eps0_range_ok,
        eps1_range_ok,
        eps2_range_ok,
        eps3_range_ok,
    }
}

/// Computes `δ(a, d, n_steps)` exactly and returns `1800·δ ≥ d`.
///
/// Errors unless `d ≥ 30` and `n_steps` lies in the valid `N`-range; outside
/// that range the theorem says nothing.
pub fn verify_lower_bound(inst: &FamilyInstance, n_steps: &Nat) -> Result<bool> {
    if inst.d < Nat::from(30u32) {
        return Err(Error::regime(format!(
            "lower bound needs d ≥ 30; family (d′={}, X={}) has d={}",
            inst.d_prime, inst.x, inst.d
        )));
    }
    let Some((lo, hi)) = valid_n_range(inst) else {
        return Err(Error::regime(format!(
            "no N satisfies 25N²d ≤ a ≤ N²d² for (d′={}, X={})",
            inst.d_prime, inst.x
        )));
    };
    if *n_steps < lo || *n_steps > hi {
        return Err(Error::regime(format!(
            "N={} outside the valid range [{}, {}] for 25N²d ≤ a ≤ N²d²",
            n_steps, lo, hi
        )));
    }
    let p = ProgressionParams::new(inst.a.clone(), inst.d.clone(), n_steps.clone())?;
    let dv = delta::delta(&p);
    Ok(Nat::from(1800u32) * &dv.delta >= inst.d)
}

/// Floating-point views of the error terms, for display and cross-checks.
/// The certificates above never consult these.
#[derive(Clone, Copy, Debug)]
pub struct EpsilonDiagnostics {
    /// Most negative Taylor term `ε₀(n)` over `1 ≤ n ≤ N` (0 when `N = 0`).
    pub eps0_min: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    /// `d·(min_k frac(k·2√a/d − (2√a/d)(√a−A)) − 1/9)` over the `k` the proof
    /// inspects (`0 ≤ k ≤ Nd/(2√a)+1`); the construction promises this stays
    /// in `(−3, 3)`.
    pub eps4: f64,
    /// `min over n, nearest m of |√(a+nd) − m| − d/(1800√a)`; positive means
    /// the real-valued step of the argument holds with room to spare.
    pub proof_margin: f64,
}

/// Evaluates the diagnostics at 192-bit precision. Cost is `O(N)` square
/// roots, so intended for desk-scale `N`.
pub fn epsilon_diagnostics(inst: &FamilyInstance) -> EpsilonDiagnostics {
    hp::with_ctx(|ctx| epsilon_diagnostics_in(ctx, inst))
}

fn epsilon_diagnostics_in(ctx: &mut HpCtx, inst: &FamilyInstance) -> EpsilonDiagnostics {
    let b = ctx.from_nat(&inst.b_value());
    let one = ctx.from_u64(1);
    let s = ctx.sqrt(&ctx.sub(&ctx.mul(&b, &b), &one));
    let den = ctx.mul(&ctx.from_u64(9), &ctx.add(&s, &b));
    let eps1 = {
        let num = ctx.mul(&ctx.from_f64(-2.0), &s);
        ctx.to_f64(&ctx.div(&num, &den))
    };
    let eps2 = eps1 / 2.0;
    let eps3 = {
        let num = ctx.mul(&ctx.from_f64(-2.0), &ctx.add(&s, &one));
        ctx.to_f64(&ctx.div(&num, &den))
    };

    let a_f = ctx.from_nat(&inst.a);
    let d_f = ctx.from_nat(&inst.d);
    let sqrt_a = ctx.sqrt(&a_f);
    let two_sqrt_a = ctx.mul(&ctx.from_u64(2), &sqrt_a);

    // ε₀(n) = (√(a+nd) − √a − nd/(2√a)) · a^{3/2} / (n²d²)
    let mut eps0_min = 0.0f64;
    let a32 = ctx.mul(&a_f, &sqrt_a);
    let n_max = nat_to_u64_capped(&inst.n);
    for n in 1..=n_max {
        let nd = ctx.mul(&ctx.from_u64(n), &d_f);
        let term = ctx.sqrt(&ctx.add(&a_f, &nd));
        let linear = ctx.add(&sqrt_a, &ctx.div(&nd, &two_sqrt_a));
        let resid = ctx.sub(&term, &linear);
        let e0 = ctx.to_f64(&ctx.div(&ctx.mul(&resid, &a32), &ctx.mul(&nd, &nd)));
        eps0_min = eps0_min.min(e0);
    }

    // ε₄ from the fractional parts the proof inspects.
    let theta = ctx.to_f64(&ctx.div(&two_sqrt_a, &d_f)); // 2√a/d
    let shift = {
        let frac_part = ctx.sub(&sqrt_a, &ctx.from_nat(&inst.a_root)); // √a − A
        let v = ctx.mul(&ctx.div(&two_sqrt_a, &d_f), &frac_part);
        ctx.to_f64(&v)
    };
    let k_hi = {
        let ndd = ctx.mul(&ctx.from_nat(&inst.n), &d_f);
        ctx.to_f64(&ctx.div(&ndd, &two_sqrt_a)).floor() as u64 + 1
    };
    let mut min_frac = f64::INFINITY;
    for k in 0..=k_hi {
        let y = (k as f64) * theta - shift;
        let dist = (y - y.round()).abs();
        min_frac = min_frac.min(dist);
    }
    let d_f64 = ctx.to_f64(&d_f);
    let eps4 = d_f64 * (min_frac - 1.0 / 9.0);

    // Proof margin: |√(a+nd) − m| − d/(1800√a) minimized over the window.
    let gap = ctx.to_f64(&ctx.div(&d_f, &ctx.mul(&ctx.from_u64(1800), &sqrt_a)));
    let mut proof_margin = f64::INFINITY;
    for n in 0..=n_max {
        let t = &inst.a + Nat::from(n) * &inst.d;
        let root = ctx.sqrt(&ctx.from_nat(&t));
        let rf = ctx.to_f64(&root);
        let m = rf.round();
        let dist = (rf - m).abs();
        proof_margin = proof_margin.min(dist - gap);
    }

    EpsilonDiagnostics {
        eps0_min,
        eps1,
        eps2,
        eps3,
        eps4,
        proof_margin,
    }
}

fn nat_to_u64_capped(x: &Nat) -> u64 {
    use num_traits::ToPrimitive;
    x.to_u64().unwrap_or(u64::MAX)
}
