//! The closed-form bound calculus: the auxiliary functions `f`, `c`, `g`,
//! the local exponent term `alpha1`, and the pole-order bound with its
//! Teichmuller and diagonalizable-residue refinements.
//!
//! All logarithms are integer digit counts; no floating point anywhere.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::arith::{ceil_log, floor_log, rat_floor, rational_val_p, Rat, RatFuncMat, Valuation};
use crate::connection::Connection;
use crate::error::{Error, Result};

/// Which case of the `alpha2` trichotomy applies at `z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ZCase {
    NoPole,
    ZeroOrInfinity,
    GenericPole,
}

/// Everything the bound formulas consume at a fixed singular point.
#[derive(Clone, Debug)]
pub struct BoundProfile {
    pub p: u64,
    pub r: usize,
    /// `v_p(N)` under the sup norm.
    pub v_n: i64,
    /// `v_p(Phi)`.
    pub v_phi: i64,
    /// `v_p(Phi^-1)`.
    pub v_phi_inv: i64,
    pub exponents: Vec<Rat>,
    pub z_case: ZCase,
    /// Whether `z` is a Teichmuller point (`z^p = z`; over Q that means
    /// `z` is 0, 1 or -1).
    pub teichmuller: bool,
    /// `v_p(S) + v_p(S^-1)` for the canonical diagonalizer of the residue,
    /// when one exists.
    pub v_s_sum: Option<i64>,
    /// Include `i = 0` in the index sets defining `c` and `g` (both log
    /// terms are 0 there).  Default true.
    pub include_zero_index: bool,
}

impl BoundProfile {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p: u64,
        r: usize,
        v_n: i64,
        v_phi: i64,
        v_phi_inv: i64,
        exponents: Vec<Rat>,
        z_case: ZCase,
        teichmuller: bool,
        v_s_sum: Option<i64>,
    ) -> Result<Self> {
        if v_phi + v_phi_inv > 0 {
            return Err(Error::Invalid(format!(
                "v_p(Phi) + v_p(Phi^-1) = {} > 0 contradicts Phi Phi^-1 = I",
                v_phi + v_phi_inv
            )));
        }
        for l in &exponents {
            if !rational_val_p(l, p).ge(0) {
                return Err(Error::Unsupported(format!("exponent {l} is not p-integral")));
            }
        }
        Ok(BoundProfile {
            p,
            r,
            v_n,
            v_phi,
            v_phi_inv,
            exponents,
            z_case,
            teichmuller,
            v_s_sum,
            include_zero_index: true,
        })
    }

    /// Profile of the connection at a singular point `z`, with the
    /// Frobenius valuations supplied by the caller.
    pub fn for_connection(
        conn: &Connection,
        z: &Rat,
        v_n: i64,
        v_phi: i64,
        v_phi_inv: i64,
    ) -> Result<Self> {
        let p = conn.p();
        let has_pole = conn.matrix().entries().iter().any(|e| e.has_pole_at(z));
        let z_case = if !has_pole {
            ZCase::NoPole
        } else if z.is_zero() {
            ZCase::ZeroOrInfinity
        } else {
            ZCase::GenericPole
        };
        let (exponents, v_s_sum) = if has_pole {
            let rd = conn.residue_data(z)?;
            let v_s_sum = rd.diagonalizer.as_ref().and_then(|s| {
                let vs = s.min_val_p(p).lower_bound()?;
                let vsi = s.inverse().ok()?.min_val_p(p).lower_bound()?;
                Some(vs + vsi)
            });
            (rd.exponents, v_s_sum)
        } else {
            (vec![Rat::zero(); conn.dim()], None)
        };
        // over Q_p the only rational Teichmuller points are 0 and +-1
        let one = Rat::from_integer(BigInt::from(1));
        let teich = z.is_zero() || z == &one || z == &(-one);
        BoundProfile::new(p, conn.dim(), v_n, v_phi, v_phi_inv, exponents, z_case, teich, v_s_sum)
    }

    fn v_phi_sum(&self) -> i64 {
        self.v_phi + self.v_phi_inv
    }
}

/// `f(i) = max{(v_p(Phi)+v_p(Phi^-1)) ceil(log_p i),
///            (r-1) v_p(N) + (v_p(Phi)+v_p(Phi^-1)) floor(log_p i)}`,
/// with both log terms 0 at `i = 0`.
pub fn f_of_i(i: u64, profile: &BoundProfile) -> i64 {
    let s = profile.v_phi_sum();
    let rn = (profile.r as i64 - 1) * profile.v_n;
    if i == 0 {
        return 0.max(rn);
    }
    let cl = ceil_log(profile.p, i) as i64;
    let fl = floor_log(profile.p, i) as i64;
    (s * cl).max(rn + s * fl)
}

/// Scan cutoff: the first digit-block start `p^k` from which
/// `i + off + f(i) >= target` provably holds for all later `i`.  Uses the
/// lower envelope `f(i) >= v_phi_sum (floor(log_p i) + 1)` and certifies
/// monotonicity of the block minima by `p^k (p-1) >= |v_phi_sum|`.
fn certified_cutoff(profile: &BoundProfile, off: i64, target: i64) -> u64 {
    let p = profile.p;
    let s = profile.v_phi_sum(); // <= 0
    let mut k = 0u32;
    loop {
        let pk = (p as i64).checked_pow(k).expect("cutoff overflow");
        let envelope = pk + s * (k as i64 + 1) + off;
        let monotone = pk.checked_mul(p as i64 - 1).is_none_or(|v| v >= -s);
        if envelope >= target && monotone {
            return pk as u64;
        }
        k += 1;
    }
}

/// `c = 0` when `v_p(N) >= 0`, else `min{0, i + f(i)}` over the index
/// set, evaluated by upward scan to a certified cutoff.
pub fn c_value(profile: &BoundProfile) -> i64 {
    if profile.v_n >= 0 {
        return 0;
    }
    let cutoff = certified_cutoff(profile, 0, 1);
    let start = u64::from(!profile.include_zero_index);
    let mut best = 0i64;
    for i in start..=cutoff {
        best = best.min(i as i64 + f_of_i(i, profile));
    }
    best
}

/// `g(m) = max{i | i + v_p(Phi) + c + f(i) < m}`, by upward scan with a
/// certified cutoff.  When even the smallest admissible index fails the
/// inequality the set is empty; 0 is returned with the flag set.
pub fn g_of_m(m: u32, profile: &BoundProfile) -> (u64, bool) {
    assert!(m >= 1, "g(m) needs m >= 1");
    let c = c_value(profile);
    let off = profile.v_phi + c;
    let cutoff = certified_cutoff(profile, off, m as i64);
    let start = u64::from(!profile.include_zero_index);
    let mut best: Option<u64> = None;
    for i in start..=cutoff {
        if i as i64 + off + f_of_i(i, profile) < m as i64 {
            best = Some(i);
        }
    }
    match best {
        Some(v) => (v, false),
        None => (0, true),
    }
}

/// `alpha1 = floor(-p min(lambda) + max(lambda))`.
pub fn alpha1(exponents: &[Rat], p: u64) -> i64 {
    assert!(!exponents.is_empty());
    let min = exponents.iter().min().expect("nonempty");
    let max = exponents.iter().max().expect("nonempty");
    let v = -Rat::from_integer(BigInt::from(p)) * min + max;
    i64::try_from(rat_floor(&v)).expect("alpha1 fits i64")
}

/// Local vanishing threshold `p min(lambda) - max(lambda)`: Laurent
/// coefficients of the centred-lift Frobenius matrix vanish at orders
/// strictly below it.
pub fn coefficient_vanishing_threshold(exponents: &[Rat], p: u64) -> Rat {
    let min = exponents.iter().min().expect("nonempty");
    let max = exponents.iter().max().expect("nonempty");
    Rat::from_integer(BigInt::from(p)) * min - max
}

/// One row of a bound table.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BoundRow {
    pub m: u32,
    pub alpha1: i64,
    pub g: u64,
    pub g_empty: bool,
    pub alpha2: u64,
    pub order_bound: i64,
    pub teichmuller_applied: bool,
    pub remark_diag_applied: bool,
}

/// The pole-order bound for `Phi mod p^m` at the profiled point:
/// `-(alpha1 + p alpha2)`, with `alpha2 = 0` in the no-pole and
/// 0-or-infinity cases and `g(m)` otherwise.  A Teichmuller centre
/// improves the multiplier to `p - 1`; a diagonalizable residue with
/// `g(m) + v_p(Phi) + c + v_p(S) + v_p(S^-1) >= m` lowers `alpha2` by 1.
pub fn order_bound(m: u32, profile: &BoundProfile) -> Result<BoundRow> {
    if m < 1 {
        return Err(Error::Invalid("order_bound needs m >= 1".into()));
    }
    let a1 = alpha1(&profile.exponents, profile.p);
    let (g, g_empty) = g_of_m(m, profile);
    let mut alpha2 = match profile.z_case {
        ZCase::NoPole | ZCase::ZeroOrInfinity => 0,
        ZCase::GenericPole => g,
    };
    let mut remark_diag = false;
    if alpha2 > 0 {
        if let Some(vs) = profile.v_s_sum {
            let c = c_value(profile);
            if g as i64 + profile.v_phi + c + vs >= m as i64 {
                alpha2 -= 1;
                remark_diag = true;
            }
        }
    }
    let mult = if profile.teichmuller { profile.p - 1 } else { profile.p } as i64;
    let order_bound = -(a1 + mult * alpha2 as i64);
    Ok(BoundRow {
        m,
        alpha1: a1,
        g,
        g_empty,
        alpha2,
        order_bound,
        teichmuller_applied: profile.teichmuller && alpha2 > 0,
        remark_diag_applied: remark_diag,
    })
}

/// Effect of a basis change `W` on the congruence: the precision exponent
/// becomes `m + v_p(W) + v_p(W^-1)` and the order bound shifts by
/// `ord_z(W) + p ord_z(W^-1)`.
pub fn basis_change_bound(
    row: &BoundRow,
    m: u32,
    conn: &Connection,
    w: &RatFuncMat,
    z: &Rat,
    k_probe: usize,
) -> Result<(i64, i64)> {
    let w_inv = w.inverse()?;
    let vw = match conn.v_on_v(w, k_probe)? {
        Valuation::Finite(v) => v,
        other => return Err(Error::Unsupported(format!("v_p(W) not finite: {other}"))),
    };
    let vwi = match conn.v_on_v(&w_inv, k_probe)? {
        Valuation::Finite(v) => v,
        other => return Err(Error::Unsupported(format!("v_p(W^-1) not finite: {other}"))),
    };
    let ow = w.order_at(z).ok_or_else(|| Error::Invalid("zero W".into()))?;
    let owi = w_inv.order_at(z).ok_or_else(|| Error::Invalid("zero W^-1".into()))?;
    let precision = m as i64 + vw + vwi;
    let bound = row.order_bound + ow + conn.p() as i64 * owi;
    Ok((precision, bound))
}

/// Profile of the built-in family at a singular point, with the verified
/// Frobenius valuations `v_p(Phi) = 0`, `v_p(Phi^-1) = -1`, `v_p(N) = 0`.
pub fn elliptic_example_profile(conn: &Connection, z: &Rat) -> Result<BoundProfile> {
    BoundProfile::for_connection(conn, z, 0, 0, -1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_i64};

    fn example_profile(p: u64) -> BoundProfile {
        // the built-in family at z = 2
        BoundProfile::new(
            p,
            2,
            0,
            0,
            -1,
            vec![rat(-1, 4), rat(1, 4)],
            ZCase::GenericPole,
            false,
            Some(0),
        )
        .unwrap()
    }

    #[test]
    fn f_reduces_to_floor_log() {
        let pr = example_profile(3);
        assert_eq!(f_of_i(9, &pr), -2);
        assert_eq!(f_of_i(1, &pr), 0);
        assert_eq!(f_of_i(5, &pr), -1); // max{-ceil, -floor} = max{-2, -1}
        for i in 1..=10_000u64 {
            assert_eq!(f_of_i(i, &pr), -(floor_log(3, i) as i64));
        }
    }

    #[test]
    fn c_values() {
        assert_eq!(c_value(&example_profile(3)), 0);
        // v_n = -1, r = 2, v_phi_sum = 0: f(i) = max{0, -1} = 0 for all i,
        // so the scan of the definition floors at i = 0 and c = 0
        let pr = BoundProfile::new(
            3,
            2,
            -1,
            0,
            0,
            vec![rat_i64(0), rat_i64(0)],
            ZCase::GenericPole,
            false,
            None,
        )
        .unwrap();
        assert_eq!(c_value(&pr), 0);
        // a profile where c is genuinely negative: v_phi_sum = -4 makes
        // i + f(i) dip to 3 - 4 = -1 at i = 3
        let prn = BoundProfile::new(
            3,
            2,
            -1,
            0,
            -4,
            vec![rat_i64(0), rat_i64(0)],
            ZCase::GenericPole,
            false,
            None,
        )
        .unwrap();
        let naive = (0..100_000u64)
            .map(|i| i as i64 + f_of_i(i, &prn))
            .min()
            .unwrap()
            .min(0);
        assert_eq!(c_value(&prn), naive);
        assert!(c_value(&prn) < 0);
        let pr5 =
            BoundProfile::new(3, 2, 5, 0, 0, vec![rat_i64(0)], ZCase::GenericPole, false, None)
                .unwrap();
        assert_eq!(c_value(&pr5), 0);
    }

    #[test]
    fn g_scan_matches_definition() {
        let pr = example_profile(3);
        assert_eq!(g_of_m(3, &pr), (3, false));
        assert_eq!(g_of_m(1, &pr), (0, false));
        let pr5 = example_profile(5);
        assert_eq!(g_of_m(2, &pr5), (1, false));
    }

    #[test]
    fn g_naive_oracle_small() {
        for p in [3u64, 5, 7] {
            let pr = example_profile(p);
            for m in 1..=40u32 {
                let naive = (0..100_000u64)
                    .filter(|&i| {
                        let f = if i == 0 { 0 } else { -(floor_log(p, i) as i64) };
                        (i as i64) + f < m as i64
                    })
                    .max()
                    .unwrap();
                assert_eq!(g_of_m(m, &pr).0, naive, "p={p}, m={m}");
            }
        }
    }

    #[test]
    fn alpha1_values() {
        let exps = vec![rat(-1, 4), rat(1, 4)];
        for p in [3u64, 5, 7, 11, 13] {
            assert_eq!(alpha1(&exps, p), ((p + 1) / 4) as i64);
        }
        assert_eq!(alpha1(&[rat_i64(0), rat_i64(0)], 3), 0);
    }

    #[test]
    fn vanishing_threshold() {
        assert_eq!(coefficient_vanishing_threshold(&[rat_i64(0), rat_i64(0)], 5), rat_i64(0));
        assert_eq!(coefficient_vanishing_threshold(&[rat(-1, 4), rat(1, 4)], 3), rat_i64(-1));
        assert_eq!(coefficient_vanishing_threshold(&[rat_i64(1), rat_i64(2)], 5), rat_i64(3));
        // alpha1 = floor(-threshold) exactly
        for p in [3u64, 5, 7] {
            let exps = vec![rat(-1, 4), rat(1, 4)];
            let th = coefficient_vanishing_threshold(&exps, p);
            assert_eq!(alpha1(&exps, p), i64::try_from(rat_floor(&-th)).unwrap());
        }
    }

    #[test]
    fn order_bounds_for_example() {
        // z = -2: exponents {0,0}, nilpotent residue, bound -p g(m)
        let mk = |p: u64| {
            BoundProfile::new(
                p,
                2,
                0,
                0,
                -1,
                vec![rat_i64(0), rat_i64(0)],
                ZCase::GenericPole,
                false,
                None,
            )
            .unwrap()
        };
        let prm2 = mk(3);
        for m in 1..=10 {
            let row = order_bound(m, &prm2).unwrap();
            assert_eq!(row.order_bound, -3 * row.g as i64);
        }
        // z = 2, p = 5: with the canonical diagonalizer the refinement
        // fires when g(m) >= m, else the bound stays -(1+5g(m))
        let pr5 = example_profile(5);
        for m in 1..=10 {
            let row = order_bound(m, &pr5).unwrap();
            if row.remark_diag_applied {
                assert_eq!(row.order_bound, -(1 + 5 * (row.g as i64 - 1)));
            } else {
                assert_eq!(row.order_bound, -(1 + 5 * row.g as i64));
            }
        }
        // z = 2, p = 3, m = 3: g = 3 >= 3, improved to -(1 + 3(g-1)) = -7
        let pr3 = example_profile(3);
        let row = order_bound(3, &pr3).unwrap();
        assert!(row.remark_diag_applied);
        assert_eq!(row.order_bound, -7);
    }

    #[test]
    fn no_pole_bound_is_zero() {
        let pr = BoundProfile::new(
            7,
            2,
            0,
            0,
            -1,
            vec![rat_i64(0), rat_i64(0)],
            ZCase::NoPole,
            false,
            None,
        )
        .unwrap();
        for m in 1..=20 {
            assert_eq!(order_bound(m, &pr).unwrap().order_bound, 0);
        }
    }

    #[test]
    fn bound_nonpositive_with_nonpositive_exponent_and_pole() {
        // a pole plus some exponent <= 0 forces alpha1 >= 0, so the bound
        // cannot be positive for any m
        for p in [3u64, 5, 7] {
            for exps in [vec![rat_i64(0), rat_i64(0)], vec![rat(-1, 4), rat(1, 4)], vec![rat_i64(-1), rat_i64(2)]] {
                let pr = BoundProfile::new(
                    p, 2, 0, 0, -1, exps, ZCase::GenericPole, false, None,
                ).unwrap();
                for m in 1..=12 {
                    assert!(order_bound(m, &pr).unwrap().order_bound <= 0);
                }
            }
        }
    }

    #[test]
    fn monotonicity() {
        let pr = example_profile(3);
        let mut last = 0;
        for m in 1..=60 {
            let (g, _) = g_of_m(m, &pr);
            assert!(g >= last);
            last = g;
        }
        assert!(c_value(&pr) <= 0);
    }

    #[test]
    fn basis_change_shifts() {
        let conn = Connection::elliptic_example(3).unwrap();
        let z = rat_i64(2);
        let pr = elliptic_example_profile(&conn, &z).unwrap();
        let row = order_bound(2, &pr).unwrap();
        let w = RatFuncMat::identity(2);
        let (prec, bound) = basis_change_bound(&row, 2, &conn, &w, &z, 24).unwrap();
        assert_eq!(prec, 2);
        assert_eq!(bound, row.order_bound);
        // (t-z) I: bound shifts by 1 - p, precision unchanged
        let lin = crate::arith::RatFunc::from_poly(crate::arith::RatPoly::linear_root(&z));
        let w = RatFuncMat::identity(2).scale(&lin);
        let (prec, bound) = basis_change_bound(&row, 2, &conn, &w, &z, 24).unwrap();
        assert_eq!(prec, 2);
        assert_eq!(bound, row.order_bound + 1 - 3);
        // p I: valuations cancel, bound unchanged
        let w = RatFuncMat::identity(2).scale(&crate::arith::RatFunc::constant(rat_i64(3)));
        let (prec, bound) = basis_change_bound(&row, 2, &conn, &w, &z, 24).unwrap();
        assert_eq!(prec, 2);
        assert_eq!(bound, row.order_bound);
    }

    #[test]
    fn profile_invariant_rejects_positive_sum() {
        assert!(BoundProfile::new(
            3,
            2,
            0,
            1,
            0,
            vec![rat_i64(0)],
            ZCase::GenericPole,
            false,
            None
        )
        .is_err());
        // non-integral exponent at p = 2
        assert!(BoundProfile::new(
            2,
            2,
            0,
            0,
            -1,
            vec![rat(1, 4)],
            ZCase::GenericPole,
            false,
            None
        )
        .is_err());
    }
}
