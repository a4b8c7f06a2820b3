//! Property tests for the kernel invariants and the bound calculus.

mod common;

use std::sync::Arc;

use proptest::prelude::*;

use common::{naive_c, naive_g_general};
use frobound::arith::{
    rat_i64, PadicApprox, Rat, RatFunc, RatPoly, TruncSeries, Valuation, ZpCtx,
};
use frobound::bounds::{c_value, g_of_m, BoundProfile, ZCase};

fn ctx(p: u64, mw: u32) -> Arc<ZpCtx> {
    ZpCtx::new(p, mw).unwrap()
}

fn series_from(ctx: &Arc<ZpCtx>, coeffs: &[i64], k: usize) -> TruncSeries {
    let mut s = TruncSeries::zero(ctx, k);
    for (i, &c) in coeffs.iter().enumerate().take(k) {
        s.set_coeff(i, PadicApprox::from_i64(ctx, c));
    }
    s
}

fn assert_series_eq(a: &TruncSeries, b: &TruncSeries, upto: usize) {
    for i in 0..upto {
        assert_eq!(
            a.coeff(i).mantissa(),
            b.coeff(i).mantissa(),
            "series differ at degree {i}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn series_mul_commutative_associative(
        a in prop::collection::vec(-50i64..50, 1..10),
        b in prop::collection::vec(-50i64..50, 1..10),
        c in prop::collection::vec(-50i64..50, 1..10),
    ) {
        let cx = ctx(3, 6);
        let k = 12;
        let (fa, fb, fc) = (series_from(&cx, &a, k), series_from(&cx, &b, k), series_from(&cx, &c, k));
        assert_series_eq(&fa.mul(&fb), &fb.mul(&fa), k);
        assert_series_eq(&fa.mul(&fb).mul(&fc), &fa.mul(&fb.mul(&fc)), k);
    }

    #[test]
    fn derivative_leibniz_rule(
        a in prop::collection::vec(-50i64..50, 1..10),
        b in prop::collection::vec(-50i64..50, 1..10),
    ) {
        let cx = ctx(5, 5);
        let k = 12;
        let (fa, fb) = (series_from(&cx, &a, k), series_from(&cx, &b, k));
        let lhs = fa.mul(&fb).derivative();
        let rhs = fa.derivative().mul(&fb).add(&fa.mul(&fb.derivative()));
        // product truncation loses the top derivative coefficient
        assert_series_eq(&lhs, &rhs, k - 1);
    }

    #[test]
    fn frobenius_substitute_multiplicative(
        a in prop::collection::vec(-20i64..20, 1..8),
        b in prop::collection::vec(-20i64..20, 1..8),
    ) {
        let cx = ctx(3, 5);
        let k = 30;
        let (fa, fb) = (series_from(&cx, &a, k), series_from(&cx, &b, k));
        let lhs = fa.mul(&fb).frobenius_substitute();
        let rhs = fa.frobenius_substitute().mul(&fb.frobenius_substitute());
        // sigma stretches degrees by p, so products agree up to K
        assert_series_eq(&lhs, &rhs, k);
    }

    #[test]
    fn ratfunc_expansion_multiplicative(
        n1 in prop::collection::vec(-9i64..9, 1..4),
        n2 in prop::collection::vec(-9i64..9, 1..4),
        d1 in 1i64..7,
        d2 in 1i64..7,
    ) {
        // denominators (t - u) with u a unit mod 7
        let cx = ctx(7, 5);
        let k = 16;
        let f = RatFunc::new(
            RatPoly::new(n1.iter().map(|&c| rat_i64(c)).collect()),
            RatPoly::linear_root(&rat_i64(d1)),
        );
        let g = RatFunc::new(
            RatPoly::new(n2.iter().map(|&c| rat_i64(c)).collect()),
            RatPoly::linear_root(&rat_i64(d2)),
        );
        let sf = TruncSeries::from_ratfunc(&cx, &f, k).unwrap();
        let sg = TruncSeries::from_ratfunc(&cx, &g, k).unwrap();
        let sfg = TruncSeries::from_ratfunc(&cx, &f.mul(&g), k).unwrap();
        assert_series_eq(&sfg, &sf.mul(&sg), k);
    }

    #[test]
    fn padic_val_additive_without_wraparound(
        a in 1i64..5000,
        b in 1i64..5000,
    ) {
        let cx = ctx(3, 16);
        let x = PadicApprox::from_i64(&cx, a);
        let y = PadicApprox::from_i64(&cx, b);
        let (Valuation::Finite(va), Valuation::Finite(vb)) = (x.val(), y.val()) else {
            return Ok(());
        };
        if va < 8 && vb < 8 {
            prop_assert_eq!(x.mul(&y).val(), Valuation::Finite(va + vb));
        }
    }

    #[test]
    fn acc_floor_after_divisions(
        a in 1i64..1000,
        divs in prop::collection::vec(0u32..2, 0..6),
    ) {
        // a sequence of operations containing d divide-by-p steps keeps
        // acc >= Mw - d
        let cx = ctx(5, 12);
        let mut x = PadicApprox::from_i64(&cx, a);
        let mut d_total = 0u32;
        for &d in &divs {
            // make the value divisible first, then divide; interleave adds
            x = x.mul_pow_p(d);
            if let Ok(q) = x.div_pow_p(d) {
                x = q.add(&PadicApprox::one(&cx));
                d_total += d;
            }
        }
        prop_assert!(x.acc() >= cx.mw() - d_total);
    }

    #[test]
    fn bound_scans_match_naive_oracle(
        p_idx in 0usize..3,
        r in 1usize..6,
        v_n in -3i64..4,
        v_phi in -3i64..4,
        v_phi_inv in -3i64..1,
        m in 1u32..30,
    ) {
        let p = [3u64, 5, 7][p_idx];
        prop_assume!(v_phi + v_phi_inv <= 0);
        let profile = BoundProfile::new(
            p, r, v_n, v_phi, v_phi_inv,
            vec![Rat::from_integer(0.into())],
            ZCase::GenericPole,
            false,
            None,
        ).unwrap();
        let scan_to = 10_000u64;
        prop_assert_eq!(c_value(&profile), naive_c(p, r, v_n, v_phi + v_phi_inv, scan_to));
        prop_assert_eq!(
            g_of_m(m, &profile).0,
            naive_g_general(p, r, v_n, v_phi, v_phi_inv, m, scan_to)
        );
    }

    #[test]
    fn g_monotone_c_nonpositive(
        p_idx in 0usize..3,
        r in 1usize..6,
        v_n in -3i64..4,
        v_phi in -2i64..3,
        v_phi_inv in -3i64..1,
    ) {
        let p = [3u64, 5, 7][p_idx];
        prop_assume!(v_phi + v_phi_inv <= 0);
        let profile = BoundProfile::new(
            p, r, v_n, v_phi, v_phi_inv,
            vec![Rat::from_integer(0.into())],
            ZCase::GenericPole,
            false,
            None,
        ).unwrap();
        prop_assert!(c_value(&profile) <= 0);
        let mut last = 0u64;
        for m in 1..=24u32 {
            let (g, _) = g_of_m(m, &profile);
            prop_assert!(g >= last);
            last = g;
        }
    }
}

#[test]
fn deep_naive_scan_agreement() {
    // one deep (10^6) naive-scan comparison on an extreme admissible
    // profile, complementing the shallow randomized cases above
    for (v_n, v_phi, v_phi_inv) in [(-3i64, 3i64, -3i64), (-3, 0, -3), (3, 2, -3)] {
        let profile = BoundProfile::new(
            3,
            6,
            v_n,
            v_phi,
            v_phi_inv,
            vec![Rat::from_integer(0.into())],
            ZCase::GenericPole,
            false,
            None,
        )
        .unwrap();
        let scan_to = 1_000_000u64;
        assert_eq!(c_value(&profile), naive_c(3, 6, v_n, v_phi + v_phi_inv, scan_to));
        for m in [1u32, 7, 29] {
            assert_eq!(
                g_of_m(m, &profile).0,
                naive_g_general(3, 6, v_n, v_phi, v_phi_inv, m, scan_to)
            );
        }
    }
}
