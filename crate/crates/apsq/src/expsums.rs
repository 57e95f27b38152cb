//! Exponential-sum evaluators: quadratic Gauss sums `G(a,b;q)`, the twisted
//! incomplete Salié double sum, and the bounds they are measured against.
//!
//! Phases are always reduced exactly: the quadratic part of every exponent is
//! an integer residue mod `q`, computed in `u128`, so the only floating-point
//! error is in `cos`/`sin` and the final accumulation. Accumulation uses
//! compensated (Kahan) summation and every result carries an explicit
//! `abs_error_bound`.

use std::f64::consts::TAU;

use crate::exactint::{isqrt_u128, jacobi_u64, mod_inverse_u64};
use crate::{Error, Result};

/// A complex result together with a bound on its absolute rounding error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
    /// Bound on `|computed − exact|` from rounding and phase reduction.
    pub abs_error_bound: f64,
}

impl ComplexValue {
    pub fn abs(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Compensated scalar accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct ComplexAcc {
    re: Kahan,
    im: Kahan,
    terms: u64,
}

impl ComplexAcc {
    pub(crate) fn add(&mut self, re: f64, im: f64) {
        self.re.add(re);
        self.im.add(im);
        self.terms += 1;
    }

    /// Finishes with an error bound of `per_term_phase_err·2π + 4ε` per term.
    pub(crate) fn finish(self, per_term_phase_error: f64) -> ComplexValue {
        let per_term = TAU * per_term_phase_error + 4.0 * f64::EPSILON;
        ComplexValue {
            re: self.re.sum,
            im: self.im.sum,
            abs_error_bound: per_term * self.terms as f64,
        }
    }
}

/// `e(u) = exp(2πiu)`, with the argument reduced mod 1 first.
pub fn e_unit(u: f64) -> (f64, f64) {
    let t = u.rem_euclid(1.0);
    let angle = TAU * t;
    (angle.cos(), angle.sin())
}

/// `e(r/q)` for an exact residue `0 ≤ r < q`.
fn e_frac(r: u64, q: u64) -> (f64, f64) {
    let angle = TAU * (r as f64 / q as f64);
    (angle.cos(), angle.sin())
}

/// Arguments of the Gauss sum `G(a,b;q) = Σ_{n mod q} e((an² + bn)/q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GaussSumArgs {
    pub a: i64,
    pub b: i64,
    pub q: u64,
}

impl GaussSumArgs {
    pub fn new(a: i64, b: i64, q: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("Gauss sum modulus q must be ≥ 1"));
        }
        Ok(GaussSumArgs { a, b, q })
    }
}

fn reduce_mod(v: i64, q: u64) -> u64 {
    (v as i128).rem_euclid(q as i128) as u64
}

/// Quadratic residue `(a n² + b n) mod q`, exactly.
fn quad_residue(a: u64, b: u64, n: u64, q: u64) -> u64 {
    let q128 = q as u128;
    let n2 = (n as u128 * n as u128) % q128;
    let t = (a as u128 * n2) % q128;
    let u = (b as u128 * n as u128) % q128;
    ((t + u) % q128) as u64
}

/// Direct `O(q)` evaluation of `G(a,b;q)` with compensated summation.
/// The rounding bound is at most `10·q·ε`.
pub fn gauss_sum_direct(g: &GaussSumArgs) -> ComplexValue {
    assert!(g.q >= 1, "GaussSumArgs invariant: q ≥ 1");
    let a = reduce_mod(g.a, g.q);
    let b = reduce_mod(g.b, g.q);
    let mut acc = ComplexAcc::default();
    for n in 0..g.q {
        let r = quad_residue(a, b, n, g.q);
        let (re, im) = e_frac(r, g.q);
        acc.add(re, im);
    }
    // Exact rational phases: only cos/sin and accumulation round.
    let mut v = acc.finish(f64::EPSILON);
    v.abs_error_bound = v.abs_error_bound.min(10.0 * g.q as f64 * f64::EPSILON);
    v
}

/// Completed-square closed form, valid for odd `q` with `gcd(a,q) = 1`:
/// `G(a,b;q) = e(−b̄²·(4a)⁻¹/q) · (a/q) · ε_q · √q`, where `ε_q = 1` for
/// `q ≡ 1 (mod 4)` and `ε_q = i` for `q ≡ 3 (mod 4)`.
pub fn gauss_sum_closed(g: &GaussSumArgs) -> Result<ComplexValue> {
    if g.q.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "closed form needs odd q, got q={}",
            g.q
        )));
    }
    let a = reduce_mod(g.a, g.q);
    let b = reduce_mod(g.b, g.q);
    if g.q == 1 {
        return Ok(ComplexValue {
            re: 1.0,
            im: 0.0,
            abs_error_bound: f64::EPSILON,
        });
    }
    let jac = jacobi_u64(a, g.q)?;
    if jac == 0 {
        return Err(Error::invalid(format!(
            "closed form needs gcd(a,q) = 1, got a={} q={}",
            a, g.q
        )));
    }
    let four_a = ((4u128 * a as u128) % g.q as u128) as u64;
    let inv_4a = mod_inverse_u64(four_a, g.q)?;
    let b2 = (b as u128 * b as u128) % g.q as u128;
    let u = ((b2 * inv_4a as u128) % g.q as u128) as u64;
    // e(−u/q) = e((q − u)/q)
    let (pre, pim) = e_frac((g.q - u) % g.q, g.q);
    let root = (g.q as f64).sqrt();
    let s = jac as f64 * root;
    let (re, im) = if g.q % 4 == 1 {
        (s * pre, s * pim)
    } else {
        // multiply by i
        (-s * pim, s * pre)
    };
    Ok(ComplexValue {
        re,
        im,
        abs_error_bound: 16.0 * root * f64::EPSILON,
    })
}

/// Inputs of the twisted incomplete Salié sum
/// `Σ_{1≤h≤H, (h,q)=1} e(λh) Σ_{0≤k<K} e(μk) (h/q) e(a h̄ k²/q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SalieParams {
    pub a: u64,
    pub q: u64,
    /// `H`: the `h` summation runs over `1 ≤ h ≤ h_max`.
    pub h_max: u64,
    /// `K`: the `k` summation runs over `0 ≤ k < k_max`.
    pub k_max: u64,
    pub lambda: f64,
    pub mu: f64,
    pub epsilon: f64,
}

impl SalieParams {
    pub fn new(
        a: u64,
        q: u64,
        h_max: u64,
        k_max: u64,
        lambda: f64,
        mu: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if q < 2 {
            return Err(Error::invalid("Salié sum needs q ≥ 2"));
        }
        if h_max < 1 || k_max < 1 {
            return Err(Error::invalid("Salié sum needs H ≥ 1 and K ≥ 1"));
        }
        if gcd_u64(a, q) != 1 {
            return Err(Error::invalid(format!(
                "Salié sum needs gcd(a,q) = 1, got a={a}, q={q}"
            )));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::invalid(format!(
                "epsilon must be ≥ 0, got {epsilon}"
            )));
        }
        Ok(SalieParams {
            a,
            q,
            h_max,
            k_max,
            lambda,
            mu,
            epsilon,
        })
    }
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Evaluates the Salié double sum in `O(HK)`; quadratic phases exact mod `q`.
pub fn salie_sum(s: &SalieParams) -> Result<ComplexValue> {
    if s.q.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "Salié sum needs odd q, got q={}",
            s.q
        )));
    }
    let q = s.q;
    let a = s.a % q;
    let mut acc = ComplexAcc::default();
    for h in 1..=s.h_max {
        let hq = h % q;
        if hq == 0 || gcd_u64(hq, q) != 1 {
            continue;
        }
        let jac = jacobi_u64(hq, q)? as f64;
        let hbar = mod_inverse_u64(hq, q)?;
        let ahbar = (a as u128 * hbar as u128) % q as u128;
        let (hre, him) = e_unit(s.lambda * h as f64);
        for k in 0..s.k_max {
            let kq = (k % q) as u128;
            let k2 = (kq * kq) % q as u128;
            let r = ((ahbar * k2) % q as u128) as u64;
            let (qre, qim) = e_frac(r, q);
            let (mre, mim) = e_unit(s.mu * k as f64);
            // jac · e(λh) · e(μk) · e(a h̄ k²/q)
            let (t1re, t1im) = (hre * mre - him * mim, hre * mim + him * mre);
            let (re, im) = (t1re * qre - t1im * qim, t1re * qim + t1im * qre);
            acc.add(jac * re, jac * im);
        }
    }
    let phase_err =
        (s.lambda.abs() * s.h_max as f64 + s.mu.abs() * s.k_max as f64 + 1.0) * f64::EPSILON;
    Ok(acc.finish(phase_err))
}

/// The right side of the conjectured bound:
/// `(H^{1/2}K^{1/2} + H^{3/4} + K + q^{−1/2}HK + q^{−1/2}K²) · q^ε`.
pub fn conjecture3_bound(s: &SalieParams) -> f64 {
    let h = s.h_max as f64;
    let k = s.k_max as f64;
    let q = s.q as f64;
    let base = (h * k).sqrt() + h.powf(0.75) + k + (h * k) / q.sqrt() + k * k / q.sqrt();
    base * q.powf(s.epsilon)
}

/// Evaluates the Gauss-sum average
/// `Σ_{0≤k<K} e(μk) Σ_{1≤h≤H, (h,q)=1} e(λh) G(h, sign·k; q)`
/// together with its stated bound
/// `(q^{1/2}H^{1/2}K^{1/2} + q^{1/2}H^{3/4} + q^{1/2}K + HK + K²) · q^ε`.
pub fn lemma2_pair(s: &SalieParams, sign: i32) -> Result<(ComplexValue, f64)> {
    if s.q.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "Gauss-sum average needs odd q, got q={}",
            s.q
        )));
    }
    if sign != 1 && sign != -1 {
        return Err(Error::invalid("sign must be +1 or -1"));
    }
    let mut acc = ComplexAcc::default();
    let mut err = 0.0f64;
    for k in 0..s.k_max {
        let (mre, mim) = e_unit(s.mu * k as f64);
        for h in 1..=s.h_max {
            let hq = h % s.q;
            if gcd_u64(hq, s.q) != 1 {
                continue;
            }
            let b = sign as i64 * k as i64;
            let g = gauss_sum_direct(&GaussSumArgs {
                a: hq as i64,
                b,
                q: s.q,
            });
            err += g.abs_error_bound;
            let (hre, him) = e_unit(s.lambda * h as f64);
            let (t1re, t1im) = (mre * hre - mim * him, mre * him + mim * hre);
            let (re, im) = (t1re * g.re - t1im * g.im, t1re * g.im + t1im * g.re);
            acc.add(re, im);
        }
    }
    let phase_err =
        (s.lambda.abs() * s.h_max as f64 + s.mu.abs() * s.k_max as f64 + 1.0) * f64::EPSILON;
    let mut lhs = acc.finish(phase_err);
    lhs.abs_error_bound += err;

    let h = s.h_max as f64;
    let k = s.k_max as f64;
    let q = s.q as f64;
    let root_q = q.sqrt();
    let bound = (root_q * (h * k).sqrt() + root_q * h.powf(0.75) + root_q * k + h * k + k * k)
        * q.powf(s.epsilon);
    Ok((lhs, bound))
}

/// One row of a Salié ratio scan.
#[derive(Clone, Debug, PartialEq)]
pub struct SalieRow {
    pub q: u64,
    pub a: u64,
    pub h_max: u64,
    pub k_max: u64,
    pub lambda: f64,
    pub mu: f64,
    pub abs_sum: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// Grid of evaluation points for [`conjecture_ratio_scan`].
#[derive(Clone, Debug)]
pub struct ScanGrid {
    pub a_values: Vec<u64>,
    pub h_values: Vec<u64>,
    pub k_values: Vec<u64>,
    pub lambda: f64,
    pub mu: f64,
    pub epsilon: f64,
    /// The conjecture excludes perfect-square `q`; setting this scans them
    /// anyway (counterexample hunting).
    pub include_square_q: bool,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            a_values: vec![1],
            h_values: vec![8, 32],
            k_values: vec![8, 32],
            lambda: 0.0,
            mu: 0.0,
            epsilon: 0.05,
            include_square_q: false,
        }
    }
}

pub(crate) fn is_perfect_square_u64(x: u64) -> bool {
    let r = isqrt_u128(x as u128);
    r * r == x as u128
}

/// Rows the conjecture scan produces for a single modulus `q`, in
/// deterministic `(a, H, K)` order. Even `q`, `q < 3`, excluded squares, and
/// pairs with `gcd(a,q) > 1` produce no rows.
pub fn salie_rows_for_q(q: u64, grid: &ScanGrid) -> Result<Vec<SalieRow>> {
    let mut rows = Vec::new();
    if q < 3 || q.is_multiple_of(2) || (!grid.include_square_q && is_perfect_square_u64(q)) {
        return Ok(rows);
    }
    for &a in &grid.a_values {
        if gcd_u64(a % q, q) != 1 {
            continue;
        }
        for &h in &grid.h_values {
            for &k in &grid.k_values {
                let params = SalieParams::new(a, q, h, k, grid.lambda, grid.mu, grid.epsilon)?;
                let sum = salie_sum(&params)?;
                let bound = conjecture3_bound(&params);
                rows.push(SalieRow {
                    q,
                    a,
                    h_max: h,
                    k_max: k,
                    lambda: grid.lambda,
                    mu: grid.mu,
                    abs_sum: sum.abs(),
                    bound,
                    ratio: sum.abs() / bound,
                });
            }
        }
    }
    Ok(rows)
}

/// Evaluates `|salie_sum| / conjecture3_bound` over all odd `q ≤ q_max` in
/// the conjecture's scope, in deterministic `(q, a, H, K)` order. Pairs with
/// `gcd(a,q) > 1` are skipped.
pub fn conjecture_ratio_scan(q_max: u64, grid: &ScanGrid) -> Result<Vec<SalieRow>> {
    let mut rows = Vec::new();
    let mut q = 3u64;
    while q <= q_max {
        rows.extend(salie_rows_for_q(q, grid)?);
        q += 2;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol
    }

    #[test]
    fn gauss_pinned_values() {
        let g = gauss_sum_direct(&GaussSumArgs { a: 0, b: 0, q: 5 });
        assert!(close(g.re, 5.0, 1e-12) && close(g.im, 0.0, 1e-12));

        let g = gauss_sum_direct(&GaussSumArgs { a: 1, b: 0, q: 3 });
        assert!(close(g.re, 0.0, 1e-12) && close(g.im, 3f64.sqrt(), 1e-12));

        let g = gauss_sum_direct(&GaussSumArgs { a: 1, b: 0, q: 5 });
        assert!(close(g.re, 5f64.sqrt(), 1e-12) && close(g.im, 0.0, 1e-12));

        let g = gauss_sum_closed(&GaussSumArgs { a: 2, b: 0, q: 9 }).unwrap();
        assert!(close(g.re, 3.0, 1e-12) && close(g.im, 0.0, 1e-12));
    }

    #[test]
    fn closed_matches_direct() {
        for q in (3u64..200).step_by(2) {
            for a in [1i64, 2, 5, -3] {
                let args = GaussSumArgs { a, b: 7, q };
                if jacobi_u64(reduce_mod(a, q), q).unwrap() == 0 {
                    continue;
                }
                let d = gauss_sum_direct(&args);
                let c = gauss_sum_closed(&args).unwrap();
                let err = ((d.re - c.re).powi(2) + (d.im - c.im).powi(2)).sqrt();
                assert!(
                    err <= 1e-9 * (q as f64).sqrt(),
                    "a={a} q={q}: direct ({}, {}) vs closed ({}, {})",
                    d.re,
                    d.im,
                    c.re,
                    c.im
                );
            }
        }
    }

    #[test]
    fn gauss_magnitude_and_periodicity() {
        for q in [3u64, 7, 15, 99, 101] {
            for h in [1u64, 2, 4] {
                if gcd_u64(h, q) != 1 {
                    continue;
                }
                let g = gauss_sum_direct(&GaussSumArgs {
                    a: h as i64,
                    b: 0,
                    q,
                });
                let rel = (g.abs() - (q as f64).sqrt()).abs() / (q as f64).sqrt();
                assert!(rel < 1e-6, "|G({h},0;{q})| = {}", g.abs());
            }
            let g1 = gauss_sum_direct(&GaussSumArgs { a: 2, b: 3, q });
            let g2 = gauss_sum_direct(&GaussSumArgs {
                a: 2 + q as i64,
                b: 3,
                q,
            });
            let g3 = gauss_sum_direct(&GaussSumArgs {
                a: 2,
                b: 3 + q as i64,
                q,
            });
            assert!(close(g1.re, g2.re, 1e-9) && close(g1.im, g2.im, 1e-9));
            assert!(close(g1.re, g3.re, 1e-9) && close(g1.im, g3.im, 1e-9));
        }
    }

    #[test]
    fn closed_form_rejections() {
        assert!(gauss_sum_closed(&GaussSumArgs { a: 1, b: 0, q: 4 }).is_err());
        assert!(gauss_sum_closed(&GaussSumArgs { a: 3, b: 0, q: 9 }).is_err());
        assert!(GaussSumArgs::new(1, 0, 0).is_err());
    }

    #[test]
    fn salie_single_term() {
        let s = SalieParams::new(3, 7, 1, 1, 0.0, 0.0, 0.05).unwrap();
        let v = salie_sum(&s).unwrap();
        assert!(close(v.re, 1.0, 1e-12) && close(v.im, 0.0, 1e-12));
    }

    #[test]
    fn salie_matches_naive_loop() {
        let s = SalieParams::new(1, 7, 5, 5, 0.1, 0.2, 0.05).unwrap();
        let v = salie_sum(&s).unwrap();
        // Independent evaluation, all phases in plain f64.
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for h in 1u64..=5 {
            if gcd_u64(h, 7) != 1 {
                continue;
            }
            let hbar = mod_inverse_u64(h % 7, 7).unwrap();
            let jac = jacobi_u64(h % 7, 7).unwrap() as f64;
            for k in 0u64..5 {
                let u = 0.1 * h as f64 + 0.2 * k as f64 + (hbar * k * k) as f64 / 7.0;
                let (c, s_) = e_unit(u);
                re += jac * c;
                im += jac * s_;
            }
        }
        assert!(close(v.re, re, 1e-9) && close(v.im, im, 1e-9));
    }

    #[test]
    fn salie_k1_is_character_sum() {
        let s = SalieParams::new(2, 15, 12, 1, 0.3, 0.0, 0.05).unwrap();
        let v = salie_sum(&s).unwrap();
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for h in 1u64..=12 {
            if gcd_u64(h % 15, 15) != 1 {
                continue;
            }
            let jac = jacobi_u64(h % 15, 15).unwrap() as f64;
            let (c, s_) = e_unit(0.3 * h as f64);
            re += jac * c;
            im += jac * s_;
        }
        assert!(close(v.re, re, 1e-9) && close(v.im, im, 1e-9));
    }

    #[test]
    fn salie_trivial_bound_and_rejections() {
        let s = SalieParams::new(1, 99, 20, 30, 0.37, 0.11, 0.05).unwrap();
        let v = salie_sum(&s).unwrap();
        assert!(v.abs() <= (20 * 30) as f64 + 1e-6);
        assert!(SalieParams::new(3, 9, 1, 1, 0.0, 0.0, 0.05).is_err()); // gcd > 1
        assert!(SalieParams::new(1, 1, 1, 1, 0.0, 0.0, 0.05).is_err()); // q < 2
        let even = SalieParams::new(1, 8, 1, 1, 0.0, 0.0, 0.05).unwrap();
        assert!(salie_sum(&even).is_err()); // odd q required
    }

    #[test]
    fn conjecture_bound_pinned() {
        let s = SalieParams {
            a: 1,
            q: 4,
            h_max: 1,
            k_max: 1,
            lambda: 0.0,
            mu: 0.0,
            epsilon: 0.0,
        };
        assert!(close(conjecture3_bound(&s), 4.0, 1e-12));
        let s = SalieParams {
            a: 1,
            q: 256,
            h_max: 16,
            k_max: 16,
            lambda: 0.0,
            mu: 0.0,
            epsilon: 0.0,
        };
        assert!(close(conjecture3_bound(&s), 72.0, 1e-12));
        let s0 = SalieParams {
            a: 1,
            q: 100,
            h_max: 3,
            k_max: 4,
            lambda: 0.0,
            mu: 0.0,
            epsilon: 0.0,
        };
        let s1 = SalieParams {
            epsilon: 0.05,
            ..s0
        };
        let factor = conjecture3_bound(&s1) / conjecture3_bound(&s0);
        assert!(close(factor, 100f64.powf(0.05), 1e-12));
    }

    #[test]
    fn lemma2_pinned() {
        let s = SalieParams::new(1, 9, 1, 1, 0.0, 0.0, 0.0).unwrap();
        let (lhs, bound) = lemma2_pair(&s, 1).unwrap();
        assert!(close(bound, 11.0, 1e-12));
        assert!(close(lhs.abs(), 3.0, 1e-9), "|G(1,0;9)| = {}", lhs.abs());
        let (lhs_neg, _) = lemma2_pair(&s, -1).unwrap();
        assert!(close(lhs_neg.abs(), 3.0, 1e-9));
    }

    #[test]
    fn scan_is_deterministic_and_finite() {
        let grid = ScanGrid::default();
        let rows = conjecture_ratio_scan(99, &grid).unwrap();
        assert!(!rows.is_empty());
        for r in &rows {
            assert!(r.abs_sum.is_finite() && r.bound.is_finite() && r.ratio.is_finite());
            assert!(!is_perfect_square_u64(r.q));
        }
        let again = conjecture_ratio_scan(99, &grid).unwrap();
        assert_eq!(rows, again);

        let with_squares = conjecture_ratio_scan(
            99,
            &ScanGrid {
                include_square_q: true,
                ..ScanGrid::default()
            },
        )
        .unwrap();
        assert!(with_squares.iter().any(|r| r.q == 9));
        assert!(rows.iter().all(|r| r.q != 9));

        let empty = conjecture_ratio_scan(
            99,
            &ScanGrid {
                a_values: vec![],
                ..ScanGrid::default()
            },
        )
        .unwrap();
        assert!(empty.is_empty());
    }
}
