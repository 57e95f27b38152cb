//! Desk-scale verification of the analytic machinery: the integer-points
//! count lower bound (curvature hypotheses checked exactly), the tent/Fourier
//! apparatus, and the Poisson-summation identity behind the `S = ΔM + R`
//! decomposition.
//!
//! Hypothesis checks clear fractional powers into integer or rational
//! comparisons (an `f64` is itself an exact dyadic rational, so thresholds
//! like `ε ≤ 1/4` are decided exactly). Counting on the parabola curve is
//! exact via residues mod `d`; counting on the square-root curve cannot be
//! decided exactly in floating point and is diagnostic, with margins
//! reported. Every Fourier truncation carries an explicitly computable tail
//! budget, so identity tests never pass by accident of truncation.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Euclid, One, Signed, ToPrimitive, Zero};

use crate::delta::ProgressionParams;
use crate::exactint::isqrt;
use crate::expsums::{gauss_sum_direct, ComplexValue, GaussSumArgs};
use crate::hp;
use crate::{Error, Nat, Result};

// ---------------------------------------------------------------------------
// Integer points close to a curve
// ---------------------------------------------------------------------------

/// The two curves the argument applies the count bound to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    /// `f(x) = (x²−a)/d`, with `|f''| = 2/d` exactly: `C = 1`, `Δ = 2/d`.
    Parabola,
    /// `g(x) = √(a+xd)`, with `Δ = d²/(8a^{3/2})`, `C = 2`.
    Root,
}

impl std::fmt::Display for CurveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CurveKind::Parabola => "parabola",
            CurveKind::Root => "root",
        })
    }
}

/// A curve, an integer interval `[i_lo, i_hi]` of length `M`, and a proximity
/// threshold `ε`. The curvature parameters `C` and `Δ` are derived from the
/// curve so they can never disagree with it.
#[derive(Clone, Debug)]
pub struct HuxleySetup {
    pub curve: CurveKind,
    pub params: ProgressionParams,
    pub i_lo: Nat,
    pub i_hi: Nat,
    pub eps: f64,
}

impl HuxleySetup {
    fn validated(self) -> Result<Self> {
        if self.i_lo > self.i_hi {
            return Err(Error::invalid("interval needs i_lo ≤ i_hi"));
        }
        if !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(Error::invalid(format!("eps must be > 0, got {}", self.eps)));
        }
        if self.curve == CurveKind::Root && self.params.a.is_zero() {
            return Err(Error::invalid("root curve needs a ≥ 1"));
        }
        Ok(self)
    }

    /// Parabola over an explicit interval.
    pub fn parabola(p: &ProgressionParams, i_lo: Nat, i_hi: Nat, eps: f64) -> Result<Self> {
        HuxleySetup {
            curve: CurveKind::Parabola,
            params: p.clone(),
            i_lo,
            i_hi,
            eps,
        }
        .validated()
    }

    /// Parabola over the interval of square roots of `[a, a+Nd]`:
    /// `[⌊√a⌋, ⌊√(a+Nd)⌋]`.
    pub fn parabola_for(p: &ProgressionParams, eps: f64) -> Result<Self> {
        let i_lo = isqrt(&p.a);
        let i_hi = isqrt(&p.last_term());
        Self::parabola(p, i_lo, i_hi, eps)
    }

    /// Root curve over an explicit interval.
    pub fn root(p: &ProgressionParams, i_lo: Nat, i_hi: Nat, eps: f64) -> Result<Self> {
        HuxleySetup {
            curve: CurveKind::Root,
            params: p.clone(),
            i_lo,
            i_hi,
            eps,
        }
        .validated()
    }

    /// Root curve over the progression's index interval `[0, N]`.
    pub fn root_for(p: &ProgressionParams, eps: f64) -> Result<Self> {
        Self::root(p, Nat::zero(), p.n.clone(), eps)
    }

    /// `M = i_hi − i_lo`.
    pub fn m_count(&self) -> Nat {
        &self.i_hi - &self.i_lo
    }

    /// The curvature constant `C`.
    pub fn c_param(&self) -> u32 {
        match self.curve {
            CurveKind::Parabola => 1,
            CurveKind::Root => 2,
        }
    }

    /// `Δ` as a float (exact for the parabola; rounded for the root curve).
    pub fn delta_f64(&self) -> f64 {
        match self.curve {
            CurveKind::Parabola => hp::with_ctx(|ctx| {
                let d = ctx.from_nat(&self.params.d);
                ctx.to_f64(&ctx.div(&ctx.from_u64(2), &d))
            }),
            CurveKind::Root => hp::with_ctx(|ctx| {
                let a = ctx.from_nat(&self.params.a);
                let d = ctx.from_nat(&self.params.d);
                let a32 = ctx.mul(&a, &ctx.sqrt(&a));
                let num = ctx.mul(&d, &d);
                let den = ctx.mul(&ctx.from_u64(8), &a32);
                ctx.to_f64(&ctx.div(&num, &den))
            }),
        }
    }

    /// `Δ` as an exact rational; `None` for the root curve (irrational).
    pub fn delta_rational(&self) -> Option<BigRational> {
        match self.curve {
            CurveKind::Parabola => Some(BigRational::new(
                BigInt::from(2),
                BigInt::from(self.params.d.clone()),
            )),
            CurveKind::Root => None,
        }
    }
}

fn eps_rational(eps: f64) -> Result<BigRational> {
    BigRational::from_float(eps)
        .filter(|r| r.is_positive())
        .ok_or_else(|| Error::invalid(format!("eps must be a positive finite value, got {eps}")))
}

/// Checks every hypothesis of the count theorem exactly, naming the first
/// violated inequality: `M ≥ 12`; `144/M² ≤ Δ/C ≤ |f″| ≤ CΔ ≤ 1`;
/// `max(3√(C³Δ), 6C²√(2/M)) ≤ ε ≤ 1/4`.
pub fn huxley_hypotheses(h: &HuxleySetup) -> Result<()> {
    let m = h.m_count();
    let fail = |msg: String| Err(Error::regime(msg));
    if m < Nat::from(12u32) {
        return fail(format!("M ≥ 12 violated: M = {m}"));
    }
    let eps = eps_rational(h.eps)?;
    let quarter = BigRational::new(BigInt::one(), BigInt::from(4));
    if eps > quarter {
        return fail(format!("ε ≤ 1/4 violated: ε = {}", h.eps));
    }
    let eps2 = &eps * &eps;
    let eps4 = &eps2 * &eps2;
    let a = BigInt::from(h.params.a.clone());
    let d = BigInt::from(h.params.d.clone());
    let m_big = BigInt::from(m.clone());
    match h.curve {
        CurveKind::Parabola => {
            // 144/M² ≤ Δ/C = 2/d  ⇔  72·d ≤ M²
            if BigInt::from(72) * &d > &m_big * &m_big {
                return fail(format!(
                    "144/M² ≤ Δ/C violated: 72·d = {} > M² = {}",
                    BigInt::from(72) * &d,
                    &m_big * &m_big
                ));
            }
            // Δ/C ≤ |f''| ≤ CΔ holds with equality (f'' = 2/d everywhere).
            // CΔ ≤ 1  ⇔  2 ≤ d
            if d < BigInt::from(2) {
                return fail(format!("CΔ ≤ 1 violated: 2/d > 1 with d = {d}"));
            }
            // 3√(C³Δ) ≤ ε  ⇔  9·(2/d) ≤ ε²  ⇔  18 ≤ ε²·d
            if eps2.clone() * BigRational::from_integer(d.clone())
                < BigRational::from_integer(BigInt::from(18))
            {
                return fail(format!(
                    "3√(C³Δ) ≤ ε violated: ε²·d = {} < 18",
                    (eps2 * BigRational::from_integer(d))
                        .to_f64()
                        .unwrap_or(f64::NAN)
                ));
            }
            // 6C²√(2/M) ≤ ε  ⇔  72 ≤ ε²·M
            if eps2.clone() * BigRational::from_integer(m_big.clone())
                < BigRational::from_integer(BigInt::from(72))
            {
                return fail(format!("6C²√(2/M) ≤ ε violated: ε²·M < 72 with M = {m}"));
            }
        }
        CurveKind::Root => {
            let a3 = a.pow(3);
            let d4 = d.pow(4);
            // 144/M² ≤ Δ/C = d²/(16·a^{3/2})  ⇔  2304²·a³ ≤ M⁴·d⁴
            if BigInt::from(2304).pow(2) * &a3 > m_big.pow(4) * &d4 {
                return fail("144/M² ≤ Δ/C violated: 2304²·a³ > M⁴·d⁴".to_string());
            }
            // min |g''| ≥ Δ/C on [i_lo, i_hi]  ⇔  (a + i_hi·d)³ ≤ 16·a³
            let top = &a + BigInt::from(h.i_hi.clone()) * &d;
            if top.pow(3) > BigInt::from(16) * &a3 {
                return fail("Δ/C ≤ |g''| violated: (a + i_hi·d)³ > 16·a³".to_string());
            }
            // max |g''| ≤ CΔ holds automatically (i_lo ≥ 0).
            // CΔ ≤ 1  ⇔  d⁴ ≤ 16·a³
            if d4 > BigInt::from(16) * &a3 {
                return fail("CΔ ≤ 1 violated: d⁴ > 16·a³".to_string());
            }
            // 3√(C³Δ) = 3d/a^{3/4} ≤ ε  ⇔  81·d⁴ ≤ ε⁴·a³
            if eps4 * BigRational::from_integer(a3)
                < BigRational::from_integer(BigInt::from(81) * d4)
            {
                return fail("3√(C³Δ) ≤ ε violated: ε⁴·a³ < 81·d⁴".to_string());
            }
            // 6C²√(2/M) = 24√(2/M) ≤ ε  ⇔  1152 ≤ ε²·M
            if eps2 * BigRational::from_integer(m_big)
                < BigRational::from_integer(BigInt::from(1152))
            {
                return fail(format!("6C²√(2/M) ≤ ε violated: ε²·M < 1152 with M = {m}"));
            }
        }
    }
    Ok(())
}

/// Exact parabola count of `m ∈ [i_lo, i_hi]` with `||(m²−a)/d|| ≤ ε`.
/// The distance condition is `min(r, d−r)·den(ε) ≤ num(ε)·d` for
/// `r = (m²−a) mod d` — pure integer arithmetic.
fn parabola_count(h: &HuxleySetup, eps: &BigRational) -> Nat {
    let num = eps.numer();
    let den = eps.denom();
    // u128 fast path covers all desk-scale runs.
    if let (Some(a), Some(d), Some(hi), Some(lo), Some(n), Some(dn)) = (
        h.params.a.to_u128(),
        h.params.d.to_u64(),
        h.i_hi.to_u64(),
        h.i_lo.to_u64(),
        num.to_u64(),
        den.to_u64(),
    ) {
        if n <= (1 << 62) && dn <= (1 << 62) {
            let d128 = d as u128;
            let a_mod = (a % d128) as u64;
            let rhs = n as u128 * d128;
            let mut count = 0u64;
            for m in lo..=hi {
                let m2 = (m as u128 * m as u128) % d128;
                let r = (m2 + d128 - a_mod as u128) % d128;
                let near = r.min(d128 - r);
                if near * dn as u128 <= rhs {
                    count += 1;
                }
            }
            return Nat::from(count);
        }
    }
    let a = BigInt::from(h.params.a.clone());
    let d = BigInt::from(h.params.d.clone());
    let rhs = num * &d;
    let mut count = Nat::zero();
    let mut m = BigInt::from(h.i_lo.clone());
    let hi = BigInt::from(h.i_hi.clone());
    while m <= hi {
        let r = (&m * &m - &a).rem_euclid(&d);
        let near = (&d - &r).min(r);
        if near * den <= rhs {
            count += 1u32;
        }
        m += 1;
    }
    count
}

/// Root-curve count of `m` with `||√(a+md)|| ≤ ε`, plus the smallest
/// `| distance − ε |` margin seen. Points with margin below `10⁻⁹` are
/// re-decided at 192-bit precision; the margin is reported so callers can
/// judge how trustworthy the verdict is.
fn root_count(h: &HuxleySetup) -> (Nat, f64) {
    let mut count = 0u64;
    let mut min_margin = f64::INFINITY;
    let mut m = h.i_lo.clone();
    while m <= h.i_hi {
        let t = &h.params.a + &m * &h.params.d;
        let root_floor = isqrt(&t);
        let (dist, margin) = {
            let tf = nat_f64(&t);
            let rf = tf.sqrt();
            let fl = nat_f64(&root_floor);
            let dist = (rf - fl).min(fl + 1.0 - rf);
            let margin = (dist - h.eps).abs();
            if margin < 1e-9 {
                // Re-decide in high precision.
                hp::with_ctx(|ctx| {
                    let s = ctx.sqrt(&ctx.from_nat(&t));
                    let lo = ctx.from_nat(&root_floor);
                    let below = ctx.sub(&s, &lo);
                    let above = ctx.sub(&ctx.add(&lo, &ctx.from_u64(1)), &s);
                    let d1 = ctx.to_f64(&below);
                    let d2 = ctx.to_f64(&above);
                    let dist = d1.min(d2);
                    (dist, (dist - h.eps).abs())
                })
            } else {
                (dist, margin)
            }
        };
        if dist <= h.eps {
            count += 1;
        }
        min_margin = min_margin.min(margin);
        m += 1u32;
    }
    (Nat::from(count), min_margin)
}

fn nat_f64(x: &Nat) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Ungated count of `m ∈ [i_lo, i_hi]` with `||curve(m)|| ≤ ε`; exact for the
/// parabola, high-precision (margin-guarded) for the root curve.
pub fn huxley_count_raw(h: &HuxleySetup) -> Result<Nat> {
    match h.curve {
        CurveKind::Parabola => {
            let eps = eps_rational(h.eps)?;
            Ok(parabola_count(h, &eps))
        }
        CurveKind::Root => Ok(root_count(h).0),
    }
}

/// The count, after verifying all hypotheses exactly.
pub fn huxley_count(h: &HuxleySetup) -> Result<Nat> {
    huxley_hypotheses(h)?;
    huxley_count_raw(h)
}

/// Smallest `| ||√(a+md)|| − ε |` over the interval — the trust margin of a
/// root-curve count.
pub fn root_count_margin(h: &HuxleySetup) -> Result<f64> {
    if h.curve != CurveKind::Root {
        return Err(Error::invalid("margin diagnostics apply to the root curve"));
    }
    Ok(root_count(h).1)
}

/// `min(ε⁴M/(2⁴3⁴C⁷Δ), εM/(2⁷3²C⁴))`, evaluated as written (no hypothesis
/// gate — callers pair it with [`huxley_hypotheses`]).
pub fn huxley_lower_bound(h: &HuxleySetup) -> f64 {
    let eps = h.eps;
    let m = nat_f64(&h.m_count());
    let c = h.c_param() as f64;
    let delta = h.delta_f64();
    let first = eps.powi(4) * m / (1296.0 * c.powi(7) * delta);
    let second = eps * m / (1152.0 * c.powi(4));
    first.min(second)
}

/// Exact rational form of the lower bound for the parabola curve.
fn parabola_lower_bound(h: &HuxleySetup, eps: &BigRational) -> BigRational {
    let m = BigRational::from_integer(BigInt::from(h.m_count()));
    let delta = BigRational::new(BigInt::from(2), BigInt::from(h.params.d.clone()));
    let eps2 = eps * eps;
    let first = &eps2 * &eps2 * &m / (BigRational::from_integer(BigInt::from(1296)) * delta);
    let second = eps * &m / BigRational::from_integer(BigInt::from(1152));
    first.min(second)
}

/// Checks the hypotheses, then the theorem's conclusion `count ≥ bound`.
/// Exact end to end for the parabola; float-compared for the root curve.
pub fn huxley_verify(h: &HuxleySetup) -> Result<bool> {
    huxley_hypotheses(h)?;
    match h.curve {
        CurveKind::Parabola => {
            let eps = eps_rational(h.eps)?;
            let count = parabola_count(h, &eps);
            let bound = parabola_lower_bound(h, &eps);
            Ok(BigRational::from_integer(BigInt::from(count)) >= bound)
        }
        CurveKind::Root => {
            let (count, _) = root_count(h);
            Ok(nat_f64(&count) >= huxley_lower_bound(h))
        }
    }
}

// ---------------------------------------------------------------------------
// Tent functions and Fourier coefficients
// ---------------------------------------------------------------------------

/// The triangular bump `f(x) = max(0, 1 − |x|)`.
pub fn tent_f(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

/// The scaled tent `t(x) = max(0, 1 − |x/Δ|)`. Requires `Δ ∈ (0, 1/2)`.
pub fn tent_t(x: f64, delta: f64) -> f64 {
    debug_assert!(delta > 0.0 && delta < 0.5);
    tent_f(x / delta)
}

/// The periodized detector `g_λ(x) = Σ_j t(x − λ + j)`; since `Δ < 1/2` at
/// most one term is nonzero, namely the nearest-integer representative.
pub fn g_lambda(x: f64, lambda: f64, delta: f64) -> f64 {
    let y = x - lambda;
    let r = y - y.round();
    tent_t(r, delta)
}

/// Fourier coefficients of `g_λ` (up to the `e(−λh)` phase):
/// `c(0) = Δ` and `c(h) = Δ·(sin πΔh / πΔh)²`.
pub fn fourier_c(h: i64, delta: f64) -> f64 {
    debug_assert!(delta > 0.0 && delta < 0.5);
    if h == 0 {
        return delta;
    }
    let t = PI * delta * h as f64;
    delta * (t.sin() / t).powi(2)
}

/// `f̂(y) = (sin πy / πy)²`, with `f̂(0) = 1` by continuity.
pub fn fhat(y: f64) -> f64 {
    if y == 0.0 {
        return 1.0;
    }
    let t = PI * y;
    (t.sin() / t).powi(2)
}

// ---------------------------------------------------------------------------
// Poisson identity and the smoothed-count decomposition
// ---------------------------------------------------------------------------

/// A window `A ± M` on the square roots, with the detector width `Δ`.
#[derive(Clone, Debug)]
pub struct AnalyticSetup {
    pub a: Nat,
    pub d: Nat,
    /// Set when derived from a progression; explicit setups leave it `None`.
    pub n: Option<Nat>,
    /// The center `A` of the window of candidate roots.
    pub a_center: Nat,
    /// The half-width `M` of the window; `≥ 1`.
    pub m_window: Nat,
    /// The detector width `Δ ∈ (0, 1/2)`.
    pub threshold: f64,
    /// Display-only exponent for the diagnostic `L = (d/M)^σ`.
    pub sigma: f64,
}

impl AnalyticSetup {
    /// Builds the window the argument uses for `(a, d, N)`:
    /// `A = ⌊√(a + ⌊Nd/2⌋)⌋` and `M = ⌊Nd/(12√a)⌋`.
    pub fn from_progression(p: &ProgressionParams, threshold: f64) -> Result<Self> {
        if p.a.is_zero() {
            return Err(Error::invalid("the window formulas need a ≥ 1"));
        }
        let nd = &p.n * &p.d;
        let a_center = isqrt(&(&p.a + (&nd >> 1)));
        // ⌊Nd/(12√a)⌋ = ⌊√((Nd)²/(144a))⌋ = isqrt(⌊(Nd)²/(144a)⌋).
        let m_window = isqrt(&(&nd * &nd / (Nat::from(144u32) * &p.a)));
        if m_window.is_zero() {
            return Err(Error::invalid(format!(
                "window is empty: ⌊Nd/(12√a)⌋ = 0 for a={}, d={}, N={}",
                p.a, p.d, p.n
            )));
        }
        AnalyticSetup {
            a: p.a.clone(),
            d: p.d.clone(),
            n: Some(p.n.clone()),
            a_center,
            m_window,
            threshold,
            sigma: 2.0,
        }
        .validated()
    }

    /// Fully explicit window, for small worked examples.
    pub fn explicit(a: Nat, d: Nat, a_center: Nat, m_window: Nat, threshold: f64) -> Result<Self> {
        AnalyticSetup {
            a,
            d,
            n: None,
            a_center,
            m_window,
            threshold,
            sigma: 2.0,
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        if self.d.is_zero() {
            return Err(Error::invalid("d must be ≥ 1"));
        }
        if self.m_window.is_zero() {
            return Err(Error::invalid("m_window must be ≥ 1"));
        }
        if !(self.threshold > 0.0 && self.threshold < 0.5) {
            return Err(Error::invalid(format!(
                "threshold must lie in (0, 1/2), got {}",
                self.threshold
            )));
        }
        Ok(self)
    }

    /// `λ = a/d mod 1`, computed from the exact residue.
    pub fn lambda(&self) -> f64 {
        let r = &self.a % &self.d;
        nat_f64(&r) / nat_f64(&self.d)
    }

    /// The diagnostic truncation point `L = (d/M)^σ`.
    pub fn l_value(&self) -> f64 {
        (nat_f64(&self.d) / nat_f64(&self.m_window)).powf(self.sigma)
    }

    /// Machine-size views used by the evaluators (desk-scale inputs only).
    fn small(&self) -> Result<SmallSetup> {
        let d = self
            .d
            .to_u64()
            .ok_or_else(|| Error::invalid("d too large for the numeric evaluators"))?;
        let m = self
            .m_window
            .to_u64()
            .ok_or_else(|| Error::invalid("m_window too large for the numeric evaluators"))?;
        let a_mod = (&self.a % &self.d).to_u64().expect("residue < d fits u64");
        let c_mod = (&self.a_center % &self.d)
            .to_u64()
            .expect("residue < d fits u64");
        Ok(SmallSetup { d, m, a_mod, c_mod })
    }
}

struct SmallSetup {
    d: u64,
    m: u64,
    a_mod: u64,
    c_mod: u64,
}

fn e_frac_signed(r: u64, q: u64) -> (f64, f64) {
    let angle = 2.0 * PI * (r as f64 / q as f64);
    (angle.cos(), angle.sin())
}

/// Both sides of the Poisson identity for the inner sum at frequency `h`:
/// left `Σ_{|m|≤M} f(m/M)·e(h(A+m)²/d)`, right
/// `(M/d)·Σ_{|k|≤k_max} f̂(Mk/d)·e(−kA/d)·G(h,k;d)`, and the exact tail bound
/// `2·gmax·d/(π²·M·k_max)` for the discarded `|k| > k_max` terms
/// (`gmax = max_k |G(h,k;d)|`, taken from the computed table).
pub struct PoissonCheck {
    pub lhs: ComplexValue,
    pub rhs: ComplexValue,
    pub tail_bound: f64,
}

impl PoissonCheck {
    pub fn abs_diff(&self) -> f64 {
        ((self.lhs.re - self.rhs.re).powi(2) + (self.lhs.im - self.rhs.im).powi(2)).sqrt()
    }

    pub fn ok(&self, slack: f64) -> bool {
        self.abs_diff() <= self.tail_bound + slack
    }
}

/// Verifies the Poisson step at one frequency `h`. Requires odd `d` and
/// `k_max ≥ 1`.
pub fn poisson_check(s: &AnalyticSetup, h: i64, k_max: u64) -> Result<PoissonCheck> {
    let sm = s.small()?;
    if sm.d % 2 == 0 {
        return Err(Error::invalid(format!(
            "the identity is used with odd d, got d={}",
            sm.d
        )));
    }
    if k_max == 0 {
        return Err(Error::invalid("k_max must be ≥ 1"));
    }
    let d = sm.d;
    let m_win = sm.m as i64;
    let hm = (h as i128).rem_euclid(d as i128) as u64;

    // Left side: exact phases h(A+m)² mod d.
    let mut lhs = crate::expsums::ComplexAcc::default();
    for m in -m_win..=m_win {
        let r = ((sm.c_mod as i128 + m as i128).rem_euclid(d as i128)) as u64;
        let r2 = (r as u128 * r as u128) % d as u128;
        let ph = ((hm as u128 * r2) % d as u128) as u64;
        let (c, s_) = e_frac_signed(ph, d);
        let w = tent_f(m as f64 / m_win as f64);
        lhs.add(w * c, w * s_);
    }
    let lhs = lhs.finish(f64::EPSILON);

    // Gauss-sum table over k mod d, plus its max magnitude for the tail.
    let mut table = Vec::with_capacity(d as usize);
    let mut gmax = 0.0f64;
    let mut g_err = 0.0f64;
    for r in 0..d {
        let g = gauss_sum_direct(&GaussSumArgs {
            a: hm as i64,
            b: r as i64,
            q: d,
        });
        gmax = gmax.max(g.abs());
        g_err = g_err.max(g.abs_error_bound);
        table.push(g);
    }

    // Right side.
    let m_f = m_win as f64;
    let d_f = d as f64;
    let mut rhs = crate::expsums::ComplexAcc::default();
    for k in -(k_max as i64)..=(k_max as i64) {
        let kr = (k as i128).rem_euclid(d as i128) as u64;
        let g = table[kr as usize];
        let ka = ((kr as u128) * (sm.c_mod as u128) % d as u128) as u64;
        let (ec, es) = e_frac_signed((d - ka) % d, d);
        let w = fhat(m_f * k as f64 / d_f);
        let (tre, tim) = (ec * g.re - es * g.im, ec * g.im + es * g.re);
        rhs.add(w * tre, w * tim);
    }
    let mut rhs = rhs.finish(f64::EPSILON);
    rhs.re *= m_f / d_f;
    rhs.im *= m_f / d_f;
    rhs.abs_error_bound = rhs.abs_error_bound * (m_f / d_f) + g_err * (2.0 * k_max as f64 + 1.0);

    let tail_bound = 2.0 * gmax * d_f / (PI * PI * m_f * k_max as f64);
    Ok(PoissonCheck {
        lhs,
        rhs,
        tail_bound,
    })
}

/// Exact count `S = #{m : |m| ≤ M, ||((A+m)² − a)/d|| < Δ}`; the residue
/// comparison `min(r, d−r)/d < Δ` is decided on exact rationals (`Δ` is the
/// exact dyadic value of the stored `f64`).
pub fn s_direct(s: &AnalyticSetup) -> Result<Nat> {
    let sm = s.small()?;
    let delta = BigRational::from_float(s.threshold)
        .ok_or_else(|| Error::invalid("threshold must be finite"))?;
    let num = delta
        .numer()
        .to_u128()
        .ok_or_else(|| Error::invalid("threshold numerator too large"))?;
    let den = delta
        .denom()
        .to_u128()
        .ok_or_else(|| Error::invalid("threshold denominator too large"))?;
    let d = sm.d as u128;
    let mut count = 0u64;
    let m_win = sm.m as i64;
    for m in -m_win..=m_win {
        let r = residue_m(&sm, m);
        let near = (r as u128).min(d - r as u128);
        // near/d < num/den  ⇔  near·den < num·d
        if near * den < num * d {
            count += 1;
        }
    }
    Ok(Nat::from(count))
}

/// `((A+m)² − a) mod d` for signed `m`.
fn residue_m(sm: &SmallSetup, m: i64) -> u64 {
    let d = sm.d as u128;
    let r = ((sm.c_mod as i128 + m as i128).rem_euclid(sm.d as i128)) as u128;
    let r2 = (r * r) % d;
    ((r2 + d - sm.a_mod as u128 % d) % d) as u64
}

/// The smoothed count `Σ_m f(m/M)·g_λ((A+m)²/d)`, evaluated directly from
/// exact residues.
pub fn smoothed_sum_direct(s: &AnalyticSetup) -> Result<f64> {
    let sm = s.small()?;
    let d_f = sm.d as f64;
    let m_win = sm.m as i64;
    let mut acc = crate::expsums::ComplexAcc::default();
    for m in -m_win..=m_win {
        let r = residue_m(&sm, m);
        let dist = (r as f64).min((sm.d - r) as f64) / d_f;
        let w = tent_f(m as f64 / m_win as f64) * tent_t(dist, s.threshold);
        acc.add(w, 0.0);
    }
    Ok(acc.finish(f64::EPSILON).re)
}

/// The Fourier side of the smoothed count: `main = ΔM`, the truncated
/// remainder over `0 < |h| ≤ h_max, |k| ≤ k_max`, and a computable budget for
/// everything discarded.
pub struct FourierDecomposition {
    pub main: f64,
    pub remainder: f64,
    pub error_budget: f64,
}

impl FourierDecomposition {
    pub fn total(&self) -> f64 {
        self.main + self.remainder
    }
}

/// Computes `ΔM + R` with `R` truncated at `h_max, k_max`. Requires odd `d`.
///
/// Budget: the `|h| > h_max` tail is at most `2M/(π²·Δ·h_max)` (each inner
/// sum is at most `M` in absolute value and `c(h) ≤ 1/(π²Δh²)`); the
/// `|k| > k_max` tail for each kept `h` is at most
/// `2d·gmax_h/(π²·M·k_max)·c(h)` with `gmax_h` read off the exact Gauss-sum
/// table; the truncated sum's imaginary part (which would be 0 in exact
/// arithmetic) is also folded in.
pub fn s_fourier(s: &AnalyticSetup, h_max: u64, k_max: u64) -> Result<FourierDecomposition> {
    let sm = s.small()?;
    if sm.d % 2 == 0 {
        return Err(Error::invalid(format!(
            "the expansion is used with odd d, got d={}",
            sm.d
        )));
    }
    if h_max == 0 || k_max == 0 {
        return Err(Error::invalid("h_max and k_max must be ≥ 1"));
    }
    let d = sm.d;
    let d_f = d as f64;
    let m_f = sm.m as f64;
    let delta = s.threshold;

    // Gauss-sum table G[h mod d][k mod d] and per-row maxima.
    let mut table = vec![vec![(0.0f64, 0.0f64); d as usize]; d as usize];
    let mut row_max = vec![0.0f64; d as usize];
    for hr in 0..d {
        for kr in 0..d {
            let g = gauss_sum_direct(&GaussSumArgs {
                a: hr as i64,
                b: kr as i64,
                q: d,
            });
            table[hr as usize][kr as usize] = (g.re, g.im);
            row_max[hr as usize] = row_max[hr as usize].max(g.abs());
        }
    }

    // W[r] = Σ_{0<|h|≤h_max} c(h)·e(−λh)·G(h, r; d), with exact phases
    // λh mod 1 = (a·h mod d)/d.
    let mut w_re = vec![Kahan2::default(); d as usize];
    let mut w_im = vec![Kahan2::default(); d as usize];
    let mut tail_k_coeff = 0.0f64; // Σ c(h)·gmax_h over kept h (both signs)
    for h in 1..=h_max {
        let c_h = fourier_c(h as i64, delta);
        let hr = (h % d) as usize;
        let hr_neg = ((d - h % d) % d) as usize;
        let lam = ((sm.a_mod as u128 * (h % d) as u128) % d as u128) as u64;
        let (pc, ps) = e_frac_signed((d - lam) % d, d); // e(−λh)
        let (nc, ns) = (pc, -ps); // e(+λh)
        tail_k_coeff += c_h * (row_max[hr] + row_max[hr_neg]);
        for r in 0..d as usize {
            let (gre, gim) = table[hr][r];
            w_re[r].add(c_h * (pc * gre - ps * gim));
            w_im[r].add(c_h * (pc * gim + ps * gre));
            let (hre, him) = table[hr_neg][r];
            w_re[r].add(c_h * (nc * hre - ns * him));
            w_im[r].add(c_h * (nc * him + ns * hre));
        }
    }

    // R ≈ (M/d)·Σ_{|k|≤k_max} f̂(Mk/d)·e(−kA/d)·W[k mod d]
    let mut acc_re = Kahan2::default();
    let mut acc_im = Kahan2::default();
    for k in -(k_max as i64)..=(k_max as i64) {
        let kr = ((k as i128).rem_euclid(d as i128)) as usize;
        let ka = ((kr as u128) * (sm.c_mod as u128) % d as u128) as u64;
        let (ec, es) = e_frac_signed((d - ka) % d, d);
        let w = fhat(m_f * k as f64 / d_f);
        let (wre, wim) = (w_re[kr].sum, w_im[kr].sum);
        acc_re.add(w * (ec * wre - es * wim));
        acc_im.add(w * (ec * wim + es * wre));
    }
    let remainder = m_f / d_f * acc_re.sum;
    let spurious_im = (m_f / d_f * acc_im.sum).abs();

    let h_tail = 2.0 * m_f / (PI * PI * delta * h_max as f64);
    let k_tail = 2.0 * d_f * tail_k_coeff / (PI * PI * m_f * k_max as f64);
    Ok(FourierDecomposition {
        main: delta * m_f,
        remainder,
        error_budget: h_tail + k_tail + spurious_im,
    })
}

/// Local compensated accumulator (the expsums one tracks term counts we do
/// not need here).
#[derive(Clone, Copy, Debug, Default)]
struct Kahan2 {
    sum: f64,
    carry: f64,
}

impl Kahan2 {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}
