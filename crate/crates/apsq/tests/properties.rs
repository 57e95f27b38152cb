//! Randomized invariants, each checked against an exact oracle or a proved
//! inequality rather than a reference value.

use proptest::prelude::*;

use apsq::analytic::{
    huxley_count_raw, poisson_check, s_direct, smoothed_sum_direct, AnalyticSetup, HuxleySetup,
};
use apsq::delta::{
    delta, delta_bruteforce, delta_square_scan, interval_contains_square, ProgressionParams,
};
use apsq::exactint::{ceil_sqrt, isqrt, nearest_square_distance};
use apsq::expsums::{gauss_sum_closed, gauss_sum_direct, salie_sum, GaussSumArgs, SalieParams};
use apsq::families::{certify_epsilons, family_instance_u64, valid_n_range, verify_lower_bound};
use apsq::regimes::{classify, ratio, BoundKind, Thm1Case};
use apsq::sweep::{AxisRange, GridSpec, Step};
use apsq::Nat;
use num_traits::ToPrimitive;

fn gcd64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn abs_diff(x: &Nat, y: &Nat) -> Nat {
    if x >= y {
        x - y
    } else {
        y - x
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// The two δ algorithms agree — value and lexicographically-least
    /// witness — on arbitrary points, including where the enumeration
    /// lengths N and M differ by orders of magnitude.
    #[test]
    fn delta_algorithms_agree(a in 0u64..=1_000_000, d in 1u64..=10_000, n in 1u64..=2_000) {
        let p = ProgressionParams::from_u64(a, d, n).unwrap();
        let term = delta_bruteforce(&p);
        let scan = delta_square_scan(&p);
        prop_assert_eq!(&term.delta, &scan.delta);
        prop_assert_eq!(&term.n_star, &scan.n_star);
        prop_assert_eq!(&term.m_star, &scan.m_star);
    }

    /// The dispatcher's answer is a valid witness: the reported (n*, m*)
    /// reproduce δ exactly, n* is in range, and no probed term gets closer
    /// to a square.
    #[test]
    fn delta_witness_is_valid_and_minimal(
        a in 0u64..=100_000_000,
        d in 1u64..=100_000,
        n in 1u64..=5_000,
        probes in prop::array::uniform3(any::<u64>()),
    ) {
        let p = ProgressionParams::from_u64(a, d, n).unwrap();
        let r = delta(&p);
        prop_assert!(r.n_star <= p.n);
        let term = &p.a + &r.n_star * &p.d;
        let sq = &r.m_star * &r.m_star;
        prop_assert_eq!(abs_diff(&term, &sq), r.delta.clone());
        for seed in probes {
            let n0 = seed % (n + 1);
            let probe_term = &p.a + Nat::from(n0) * &p.d;
            let (dist, _) = nearest_square_distance(&probe_term);
            prop_assert!(dist >= r.delta);
        }
    }

    /// When `[a, a+Nd]` contains a square, some term is within d/2 of it:
    /// 2δ ≤ d.
    #[test]
    fn two_delta_at_most_d_when_interval_contains_square(
        a in 0u64..=10_000_000,
        d in 1u64..=50_000,
        n in 1u64..=3_000,
    ) {
        let p = ProgressionParams::from_u64(a, d, n).unwrap();
        if interval_contains_square(&p) {
            let r = delta(&p);
            prop_assert!(Nat::from(2u32) * &r.delta <= p.d);
        }
    }

    /// Every classification field re-derives from its defining inequality,
    /// straddling the u64/bignum kernel boundary.
    #[test]
    fn classification_matches_defining_inequalities(
        a in 0u64..=(1u64 << 34),
        d in 1u64..=100_000,
        n in 1u64..=100_000,
    ) {
        let p = ProgressionParams::from_u64(a, d, n).unwrap();
        let rep = classify(&p);
        let (a, d, n) = (&p.a, &p.d, &p.n);
        let nd = n * d;
        let n2 = n * n;

        let adm = {
            let s = &nd - 1u32;
            Nat::from(4u32) * a <= &s * &s
        };
        prop_assert_eq!(rep.admissible, adm);

        let c = ceil_sqrt(a);
        prop_assert_eq!(rep.contains_square, &c * &c <= a + &nd);

        prop_assert_eq!(rep.m_upper, isqrt(&(a + &nd)) - isqrt(a));

        let conj1 = n <= d || {
            let diff = n - d;
            &diff * &diff <= Nat::from(4u32) * a
        };
        prop_assert_eq!(rep.conj1_applicable, conj1);
        prop_assert_eq!(rep.conj2_applicable, !conj1);

        let gate = Nat::from(1800u32) * a <= &n2 * d;
        prop_assert_eq!(rep.thm1_case != Thm1Case::NotApplicable, gate);
        if gate {
            let c1 = *a >= nd && *a >= n2;
            let c2 = n2 <= *a && *a <= nd;
            let c3 = *a <= n2;
            let expected = if c1 {
                Thm1Case::Case1
            } else if c2 {
                Thm1Case::Case2
            } else {
                Thm1Case::Case3
            };
            prop_assert_eq!(rep.thm1_case, expected);
            prop_assert_eq!(rep.thm1_boundary, (c1 as u8 + c2 as u8 + c3 as u8) >= 2);
        }

        let note = Nat::from(25u32) * &n2 * d <= *a && *a <= &n2 * d * d && *d >= Nat::from(30u32);
        prop_assert_eq!(rep.note_range, note);
    }

    /// Where the case-gate holds by construction, the ratio δ/bound is a
    /// finite nonnegative number (the empirical-constant diagnostic never
    /// degenerates).
    #[test]
    fn gated_ratios_are_finite(d in 1u64..=60, n in 1u64..=60, pick in any::<u64>()) {
        let a_cap = n * n * d / 1800;
        let a = pick % (a_cap + 1);
        let p = ProgressionParams::from_u64(a, d, n).unwrap();
        for kind in [BoundKind::Thm1, BoundKind::Cor1, BoundKind::Heuristic] {
            let r = ratio(&p, kind, 0.0).unwrap();
            prop_assert!(r.is_finite() && r >= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Equivalence still holds far beyond the u128 kernel (a ≥ 2¹²⁴).
    #[test]
    fn delta_algorithms_agree_on_huge_operands(
        hi in (1u64 << 60)..,
        lo in any::<u64>(),
        d in 1u64..=1_000_000,
        n in 1u64..=150,
    ) {
        let a = (Nat::from(hi) << 64u32) | Nat::from(lo);
        let p = ProgressionParams::new(a, Nat::from(d), Nat::from(n)).unwrap();
        let term = delta_bruteforce(&p);
        let scan = delta_square_scan(&p);
        let routed = delta(&p);
        prop_assert_eq!(&term.delta, &scan.delta);
        prop_assert_eq!(&term.n_star, &scan.n_star);
        prop_assert_eq!(&term.m_star, &scan.m_star);
        prop_assert_eq!(&routed.delta, &term.delta);
    }

    /// Every family member certifies: construction identities, the exact
    /// lower bound 1800δ ≥ d, and all four ε-range certificates, at an
    /// arbitrary valid N.
    #[test]
    fn family_members_always_certify(
        dp in 2u64..=400,
        x in 1u64..=40,
        pick in any::<u64>(),
    ) {
        let probe = family_instance_u64(dp, x, 1).unwrap();
        prop_assert_eq!(&probe.d, &Nat::from(2 * (9 * dp + 1)));
        let b = probe.b_value();
        prop_assert_eq!(Nat::from(9u32) * &probe.a + 1u32, &b * &b);

        let Some((lo, hi)) = valid_n_range(&probe) else {
            // Nothing to verify when the admissible window is empty.
            return Ok(());
        };
        let span = (&hi - &lo).to_u64().unwrap();
        let n = lo.to_u64().unwrap() + pick % (span + 1);
        let inst = family_instance_u64(dp, x, n).unwrap();
        prop_assert!(verify_lower_bound(&inst, &Nat::from(n)).unwrap());
        prop_assert!(certify_epsilons(&inst).all_ok());
        let dv = delta(&inst.progression());
        prop_assert!(Nat::from(1800u32) * &dv.delta >= inst.d);
    }

    /// Gauss sums: the closed form tracks direct summation within 10⁻⁹·√q,
    /// and the magnitude is exactly √q (for any linear coefficient b).
    #[test]
    fn gauss_closed_form_and_magnitude(
        j in 0u64..=749,
        raw_a in 1u64..=1_000_000,
        b in -3i64..=3,
    ) {
        let q = 2 * j + 3;
        prop_assume!(gcd64(raw_a % q, q) == 1);
        let g = GaussSumArgs::new(raw_a as i64, b, q).unwrap();
        let direct = gauss_sum_direct(&g);
        let closed = gauss_sum_closed(&g).unwrap();
        let root = (q as f64).sqrt();
        let diff = (closed.re - direct.re).hypot(closed.im - direct.im);
        prop_assert!(diff <= 1e-9 * root);
        prop_assert!((direct.abs() - root).abs() <= 1e-6 * root);
    }

    /// The Salié double sum never exceeds its term count (each summand has
    /// modulus ≤ 1), within the accumulator's own error bound.
    #[test]
    fn salie_sum_bounded_by_term_count(
        j in 0u64..=249,
        raw_a in 1u64..=1_000_000,
        h_max in 1u64..=48,
        k_max in 1u64..=48,
        lambda in 0.0f64..1.0,
        mu in 0.0f64..1.0,
    ) {
        let q = 2 * j + 3;
        prop_assume!(gcd64(raw_a % q, q) == 1);
        let s = SalieParams::new(raw_a % q, q, h_max, k_max, lambda, mu, 0.05).unwrap();
        let v = salie_sum(&s).unwrap();
        let h_terms = (1..=h_max).filter(|h| h % q != 0 && gcd64(h % q, q) == 1).count() as f64;
        prop_assert!(v.abs() <= h_terms * k_max as f64 + v.abs_error_bound + 1e-9);
    }

    /// The near-integer count is monotone in ε and bounded by the interval's
    /// integer count, for arbitrary (ungated) parabola setups.
    #[test]
    fn huxley_count_monotone_in_eps(
        a in 0u64..=1_000_000_000,
        d in 2u64..=100_000,
        x0 in 0u64..=1_000_000,
        m in 12u64..=3_000,
        e1 in 1u32..=4_800,
        e2 in 1u32..=4_800,
    ) {
        let (e1, e2) = (e1.min(e2), e1.max(e2));
        let p = ProgressionParams::from_u64(a, d, 1).unwrap();
        let lo = Nat::from(x0);
        let hi = Nat::from(x0 + m);
        let narrow = HuxleySetup::parabola(&p, lo.clone(), hi.clone(), e1 as f64 / 10_000.0).unwrap();
        let wide = HuxleySetup::parabola(&p, lo, hi, e2 as f64 / 10_000.0).unwrap();
        let c_narrow = huxley_count_raw(&narrow).unwrap();
        let c_wide = huxley_count_raw(&wide).unwrap();
        prop_assert!(c_narrow <= c_wide);
        prop_assert!(c_wide <= Nat::from(m + 1));
    }

    /// The tent-smoothed sum is dominated by the sharp near-integer count
    /// (the tent is ≤ 1 on its support and vanishes outside it).
    #[test]
    fn smoothed_sum_at_most_sharp_count(
        a in 1u64..=10_000_000,
        d in 1u64..=501,
        a_center in 1u64..=10_000_000,
        m in 1u64..=60,
        t in 5u32..=44,
    ) {
        let s = AnalyticSetup::explicit(
            Nat::from(a),
            Nat::from(d),
            Nat::from(a_center),
            Nat::from(m),
            t as f64 / 100.0,
        )
        .unwrap();
        let smooth = smoothed_sum_direct(&s).unwrap();
        let sharp = s_direct(&s).unwrap().to_f64().unwrap();
        prop_assert!(smooth <= sharp + 1e-9);
    }

    /// The truncated Poisson identity holds within its explicit tail bound
    /// for arbitrary odd moduli, windows, twists, and truncation depths.
    #[test]
    fn poisson_identity_within_tail(
        j in 0u64..=49,
        a in 1u64..=1_000_000,
        a_center in 1u64..=1_000_000,
        m in 1u64..=30,
        h in -3i64..=3,
        k_max in 500u64..=4_000,
    ) {
        let d = 2 * j + 3;
        let s = AnalyticSetup::explicit(
            Nat::from(a),
            Nat::from(d),
            Nat::from(a_center),
            Nat::from(m),
            0.25,
        )
        .unwrap();
        let chk = poisson_check(&s, h, k_max).unwrap();
        prop_assert!(chk.ok(1e-8));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Materialized axis values stay in `[lo, hi]`, start at `lo`, and
    /// strictly ascend under both stepping rules.
    #[test]
    fn axis_values_ascend_within_range(
        lo in 0u64..=10_000,
        span in 0u64..=10_000,
        k in 1u64..=97,
        r in 2u64..=7,
        geometric in any::<bool>(),
    ) {
        let lo = if geometric { lo.max(1) } else { lo };
        let hi = lo + span;
        let step = if geometric {
            Step::Geometric(Nat::from(r))
        } else {
            Step::Linear(Nat::from(k))
        };
        let axis = AxisRange { lo: Nat::from(lo), hi: Nat::from(hi), step };
        let values = axis.values();
        prop_assert!(!values.is_empty());
        prop_assert_eq!(&values[0], &Nat::from(lo));
        for w in values.windows(2) {
            prop_assert!(w[0] < w[1]);
        }
        prop_assert!(values.last().unwrap() <= &Nat::from(hi));
    }

    /// `canonical()` is a fixed point of parse → render: re-parsing the
    /// canonical text reproduces it (and therefore the grid hash).
    #[test]
    fn grid_canonical_form_is_a_fixed_point(
        a_lo in 0u64..=1_000, a_span in 0u64..=1_000, a_k in 1u64..=9,
        d_lo in 1u64..=50, d_span in 0u64..=100, d_r in 2u64..=5,
        n_lo in 1u64..=50, n_span in 0u64..=100,
    ) {
        let text = format!(
            "task=ratio_thm1\n\
             a={}..{}\na.step=linear:{a_k}\n\
             d={}..{}\nd.step=geometric:{d_r}\n\
             N={}..{}\n\
             filter=thm1\nfilter=admissible\n",
            a_lo, a_lo + a_span,
            d_lo, d_lo + d_span,
            n_lo, n_lo + n_span,
        );
        let spec = GridSpec::parse(&text).unwrap();
        let canon = spec.canonical();
        let reparsed = GridSpec::parse(&canon).unwrap();
        prop_assert_eq!(&reparsed.canonical(), &canon);
        prop_assert_eq!(reparsed.grid_hash(), spec.grid_hash());
    }
}
