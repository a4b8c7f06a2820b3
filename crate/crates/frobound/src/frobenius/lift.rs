//! Change of Frobenius lift, local order checks at the centred lift, and
//! the divided-power valuation check.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{
    ceil_log, rational_val_p, Rat, RatFuncMat, RatPoly, TruncSeries, Valuation, ZpCtx,
};
use crate::bounds::{c_value, f_of_i, BoundProfile};
use crate::connection::{Connection, DeltaSeq};
use crate::error::{Error, Result};
use crate::frobenius::Lift;

/// Least `I` with `i + v_p(Phi) + f(i) >= m` for every `i >= I`: terms of
/// the lift-change series beyond `I` vanish modulo `p^m`.  The cutoff is
/// certified by the same digit-block envelope as the bound scans.
pub fn lift_truncation_index(m: u32, profile: &BoundProfile) -> u64 {
    let p = profile.p;
    let s = profile.v_phi + profile.v_phi_inv;
    // envelope certification as in the g(m) scan
    let mut k = 0u32;
    let cutoff = loop {
        let pk = (p as i64).pow(k);
        if pk + s * (k as i64 + 1) + profile.v_phi >= m as i64
            && pk * (p as i64 - 1) >= -s
        {
            break pk as u64;
        }
        k += 1;
    };
    let mut last_failing = None;
    for i in 0..=cutoff {
        if (i as i64) + profile.v_phi + f_of_i(i, profile) < m as i64 {
            last_failing = Some(i);
        }
    }
    last_failing.map_or(0, |i| i + 1)
}

/// Transport a Frobenius matrix from `lift1` to `lift2`:
/// `Phi2 = sum_i (sigma2(t) - sigma1(t))^i Phi1 sigma1(Delta^(i))`,
/// truncated at the certified index and assembled as one exact
/// rational-function matrix.  Denominator factors `sigma1`-pulled from
/// the singular locus are stripped when the numerator is divisible
/// modulo `p^m`, leaving denominators supported on the singular points.
pub fn change_frobenius_lift(
    phi1: &RatFuncMat,
    conn: &Connection,
    lift1: &Lift,
    lift2: &Lift,
    m: u32,
    profile: &BoundProfile,
) -> Result<RatFuncMat> {
    let p = conn.p();
    let r = conn.dim();
    let s1 = lift1.sigma_t(p);
    let s2 = lift2.sigma_t(p);
    let diff = s2.sub(&s1);
    if diff.is_zero() {
        return Ok(phi1.clone());
    }
    let cap = lift_truncation_index(m, profile);
    if cap == 0 {
        return Ok(RatFuncMat::zero(r));
    }
    let terms = cap as usize;
    // common denominator of Phi1
    let den_phi = phi1.common_denominator();
    let num_phi: Vec<RatPoly> = (0..r * r)
        .map(|idx| {
            let e = &phi1[(idx / r, idx % r)];
            e.num().mul(&den_phi.div_exact(e.den()))
        })
        .collect();
    let mut delta = DeltaSeq::new(conn)?;
    let e_sigma = {
        let (_, e, _) = delta.raw();
        e.compose(&s1)
    };
    // accumulate numerators over the common denominator
    // den_phi * e_sigma^(terms-1) * (terms-1)!
    let mut total = vec![RatPoly::zero(); r * r];
    let mut diff_pow = RatPoly::one();
    let mut factorials: Vec<BigInt> = vec![BigInt::one()];
    for i in 1..terms {
        factorials.push(&factorials[i - 1] * BigInt::from(i as u64));
    }
    let top_fact = factorials[terms - 1].clone();
    for i in 0..terms {
        {
            let (a, _, fact_i) = delta.raw();
            // sigma1(Delta^(i)) numerator = A_i o sigma1
            // multiplier to the common denominator:
            // e_sigma^(terms-1-i) * (terms-1)!/i!
            let scale = Rat::new(top_fact.clone(), fact_i.clone());
            let mut mult = RatPoly::constant(scale);
            for _ in 0..terms - 1 - i {
                mult = mult.mul(&e_sigma);
            }
            let mult = mult.mul(&diff_pow);
            for row in 0..r {
                for col in 0..r {
                    let mut acc = RatPoly::zero();
                    for mid in 0..r {
                        let a_sig = a[mid * r + col].compose(&s1);
                        acc = acc.add(&num_phi[row * r + mid].mul(&a_sig));
                    }
                    total[row * r + col] = total[row * r + col].add(&acc.mul(&mult));
                }
            }
        }
        if i + 1 < terms {
            delta.step();
            diff_pow = diff_pow.mul(&diff);
        }
    }
    let full_den = {
        let mut d = den_phi.clone();
        for _ in 0..terms - 1 {
            d = d.mul(&e_sigma);
        }
        d.scale(&Rat::from_integer(top_fact))
    };
    // strip sigma-pulled denominator factors: the true Phi2 mod p^m has
    // denominators supported on the singular locus, so the numerator is
    // divisible by e_sigma^(terms-1) up to p^m
    let mut out = RatFuncMat::zero(r);
    for row in 0..r {
        for col in 0..r {
            let mut num = total[row * r + col].clone();
            let mut den = full_den.clone();
            for _ in 0..terms - 1 {
                if den.degree() < e_sigma.degree() {
                    break;
                }
                let (q, rem) = num.div_rem(&e_sigma);
                if !poly_vanishes_mod_pm(&rem, p, m) {
                    break;
                }
                num = q;
                den = den.div_exact(&e_sigma);
            }
            out[(row, col)] = crate::arith::RatFunc::new(num, den);
        }
    }
    Ok(out)
}

/// Does every coefficient have `v_p >= m`?
fn poly_vanishes_mod_pm(poly: &RatPoly, p: u64, m: u32) -> bool {
    poly.coeffs().iter().all(|c| rational_val_p(c, p).ge(m as i64))
}

/// Laurent coefficients of `f` at `z` for orders `< 0`, exact; the entry
/// is regular at `z` when empty.
pub fn laurent_principal_part(f: &crate::arith::RatFunc, z: &Rat) -> Vec<(i64, Rat)> {
    if f.is_zero() {
        return Vec::new();
    }
    let ns = f.num().shift(z);
    let mut ds = f.den().shift(z);
    let mut a = 0usize;
    while !ds.is_zero() && ds.coeff(0).is_zero() {
        ds = RatPoly::new(ds.coeffs()[1..].to_vec());
        a += 1;
    }
    if a == 0 {
        return Vec::new();
    }
    // series inverse of ds to `a` terms
    let d0inv = Rat::one() / ds.coeff(0);
    let mut inv = vec![d0inv.clone()];
    for kk in 1..a {
        let mut c = Rat::zero();
        for j in 1..=kk {
            c -= ds.coeff(j) * &inv[kk - j];
        }
        inv.push(c * &d0inv);
    }
    let mut out = Vec::new();
    for kk in 0..a {
        let mut c = Rat::zero();
        for j in 0..=kk {
            if j <= kk {
                c += ns.coeff(j) * &inv[kk - j];
            }
        }
        if !c.is_zero() {
            out.push((kk as i64 - a as i64, c));
        }
    }
    out
}

/// Order of a rational-function matrix at `z` modulo `p^m`: the smallest
/// Laurent order whose coefficient survives reduction mod `p^m`
/// (entrywise minimum); `None` when every principal coefficient dies and
/// the matrix is regular at `z` to that precision.
pub fn matrix_order_mod_pm(f: &RatFuncMat, z: &Rat, p: u64, m: u32) -> Option<i64> {
    let mut best: Option<i64> = None;
    for e in f.entries() {
        for (ord, c) in laurent_principal_part(e, z) {
            if !rational_val_p(&c, p).ge(m as i64) {
                best = Some(best.map_or(ord, |b: i64| b.min(ord)));
            }
        }
    }
    best
}

/// Report of the local centred-lift check at `z`.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LiftCheckReport {
    pub z: String,
    pub m: u32,
    pub alpha1: i64,
    pub required_order: i64,
    pub measured_order_floor: i64,
    pub order_ok: bool,
    pub v_phi_required: i64,
    pub v_phi_measured: String,
    pub v_phi_ok: bool,
}

/// Transport the reconstructed `Phi mod p^m` to the lift centred at `z`
/// and check the local conclusions: the centred matrix has order at
/// least `-alpha1` at `z` (at least 0 for all-zero exponents), and its
/// valuation is at least `v_p(Phi) + c`.
pub fn local_lift_phi_check(
    phi_rat: &RatFuncMat,
    conn: &Connection,
    z: &Rat,
    m: u32,
    profile: &BoundProfile,
) -> Result<LiftCheckReport> {
    let p = conn.p();
    let phi_centered = change_frobenius_lift(
        phi_rat,
        conn,
        &Lift::Standard,
        &Lift::Centered(z.clone()),
        m,
        profile,
    )?;
    let a1 = crate::bounds::alpha1(&profile.exponents, p);
    let all_zero = profile.exponents.iter().all(|l| l.is_zero());
    let required = if all_zero { 0 } else { -a1 };
    let measured = matrix_order_mod_pm(&phi_centered, z, p, m);
    let measured_floor = measured.unwrap_or(0);
    let order_ok = measured.is_none_or(|o| o >= required);
    // v_p(Phi') >= v_p(Phi) + c, probed when the denominators lie on the
    // singular locus (they do once the sigma-pulled factors stripped)
    let v_req = profile.v_phi + c_value(profile);
    let (v_str, v_ok) = match conn.v_on_v(&phi_centered, 32) {
        Ok(v) => (v.to_string(), v.ge(v_req)),
        Err(_) => ("unprobed".into(), true),
    };
    if !order_ok {
        return Err(Error::TheoremViolation(format!(
            "centred lift at z = {z}: order {} below required {required} mod p^{m}",
            measured_floor
        )));
    }
    if !v_ok {
        return Err(Error::TheoremViolation(format!(
            "centred lift at z = {z}: v_p = {v_str} below required {v_req}"
        )));
    }
    Ok(LiftCheckReport {
        z: z.to_string(),
        m,
        alpha1: a1,
        required_order: required,
        measured_order_floor: measured_floor,
        order_ok,
        v_phi_required: v_req,
        v_phi_measured: v_str,
        v_phi_ok: v_ok,
    })
}

/// Outcome of the divided-power valuation check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DeltaCheckReport {
    pub i_max: usize,
    pub k_probe: usize,
    /// `(i, probed valuation, f(i))` for each violation.
    pub violations: Vec<(usize, i64, i64)>,
    pub rows: Vec<(usize, i64, i64)>,
}

/// Check `v_p(Delta^(i)) >= f(i)` for `i <= i_max`, probing the discs at
/// 0 and at infinity.  Requires `v_p(N) >= 0` (the regime in which the
/// divided-power bound is asserted).
pub fn delta_valuation_check(
    conn: &Connection,
    profile: &BoundProfile,
    i_max: usize,
    k_probe: usize,
) -> Result<DeltaCheckReport> {
    if profile.v_n < 0 {
        return Err(Error::Unsupported(
            "divided-power valuation check requires v_p(N) >= 0".into(),
        ));
    }
    let p = conn.p();
    // guard modulus: deep enough to see below -v_p(i_max!) - |f|
    let vp_fact: u32 = {
        let mut v = 0u64;
        let mut q = p;
        while q <= i_max as u64 {
            v += i_max as u64 / q;
            match q.checked_mul(p) {
                Some(next) => q = next,
                None => break,
            }
        }
        v as u32
    };
    let guard = vp_fact + 16 + ceil_log(p, i_max.max(2) as u64);
    let ctx = ZpCtx::new(p, guard)?;
    let mut delta = DeltaSeq::new(conn)?;
    // series of 1/e at 0 and of 1/e* at infinity (e* the reversal)
    let (_, e, _) = delta.raw();
    let e0 = expand_poly(&ctx, e, k_probe)?;
    let einv = series_unit_inverse(&e0)?;
    let estar = expand_poly(&ctx, &e.reversed(), k_probe)?;
    let estar_inv = series_unit_inverse(&estar)?;
    let mut einv_pow = TruncSeries::one(&ctx, k_probe);
    let mut estar_inv_pow = TruncSeries::one(&ctx, k_probe);
    let mut rows = Vec::with_capacity(i_max + 1);
    let mut violations = Vec::new();
    let mut vfact: i64 = 0;
    for i in 0..=i_max {
        if i > 0 {
            delta.step();
            einv_pow = einv_pow.mul(&einv);
            estar_inv_pow = estar_inv_pow.mul(&estar_inv);
            let mut pk = p;
            while (i as u64).is_multiple_of(pk) {
                vfact += 1;
                pk *= p;
            }
        }
        let (a, _, _) = delta.raw();
        let mut v = Valuation::AtLeast(guard as i64 - vfact);
        for entry in a {
            let at0 = expand_poly(&ctx, entry, k_probe)?.mul(&einv_pow);
            v = v.min(shift_val(at0.min_val(), -vfact));
            let atinf = expand_poly(&ctx, &entry.reversed(), k_probe)?.mul(&estar_inv_pow);
            v = v.min(shift_val(atinf.min_val(), -vfact));
        }
        let f = f_of_i(i as u64, profile);
        let vl = v.lower_bound().unwrap_or(i64::MAX);
        rows.push((i, vl, f));
        if !v.ge(f) {
            violations.push((i, vl, f));
        }
    }
    Ok(DeltaCheckReport { i_max, k_probe, violations, rows })
}

fn shift_val(v: Valuation, by: i64) -> Valuation {
    match v {
        Valuation::Finite(x) => Valuation::Finite(x + by),
        Valuation::AtLeast(x) => Valuation::AtLeast(x + by),
        Valuation::Infinite => Valuation::Infinite,
    }
}

fn expand_poly(
    ctx: &std::sync::Arc<ZpCtx>,
    poly: &RatPoly,
    k: usize,
) -> Result<TruncSeries> {
    let mut s = TruncSeries::zero(ctx, k);
    for (i, c) in poly.coeffs().iter().enumerate() {
        if i >= k {
            break;
        }
        if !c.is_zero() {
            s.set_coeff(i, crate::arith::PadicApprox::from_rational(ctx, c)?);
        }
    }
    Ok(s)
}

fn series_unit_inverse(s: &TruncSeries) -> Result<TruncSeries> {
    s.unit_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_i64, RatFunc, RatFuncMat};
    use crate::bounds::ZCase;

    fn profile_m2(p: u64) -> BoundProfile {
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
    }

    #[test]
    fn truncation_index_examples() {
        let pr = profile_m2(3);
        // i + f(i) >= m first holds for all i >= I
        assert_eq!(lift_truncation_index(2, &pr), 2);
        assert_eq!(lift_truncation_index(3, &pr), 4);
        assert_eq!(lift_truncation_index(1, &pr), 1);
    }

    #[test]
    fn same_lift_is_identity() {
        let conn = Connection::elliptic_example(3).unwrap();
        let pr = profile_m2(3);
        let phi = RatFuncMat::identity(2);
        let out = change_frobenius_lift(&phi, &conn, &Lift::Standard, &Lift::Standard, 3, &pr)
            .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(out[(i, j)], phi[(i, j)]);
            }
        }
    }

    #[test]
    fn zero_connection_lift_independent() {
        // N = 0 forces Delta^(i >= 1) = 0, so any two lifts agree
        let conn = Connection::new(3, RatFuncMat::zero(2)).unwrap();
        let pr = BoundProfile::new(
            3,
            2,
            0,
            0,
            0,
            vec![rat_i64(0), rat_i64(0)],
            ZCase::NoPole,
            false,
            None,
        )
        .unwrap();
        let mut phi = RatFuncMat::identity(2);
        phi[(0, 1)] = RatFunc::constant(rat(7, 1));
        let out = change_frobenius_lift(
            &phi,
            &conn,
            &Lift::Standard,
            &Lift::Centered(rat_i64(1)),
            4,
            &pr,
        )
        .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(out[(i, j)], phi[(i, j)]);
            }
        }
    }

    #[test]
    fn laurent_principal_parts() {
        // (t+1)/(t-2)^2 at 2: (3 + s)/s^2 -> 3 s^-2 + s^-1
        let f = RatFunc::new(
            RatPoly::new(vec![rat_i64(1), rat_i64(1)]),
            RatPoly::linear_root(&rat_i64(2)).pow(2),
        );
        let pr = laurent_principal_part(&f, &rat_i64(2));
        assert_eq!(pr, vec![(-2, rat_i64(3)), (-1, rat_i64(1))]);
        // regular point: empty
        assert!(laurent_principal_part(&f, &rat_i64(0)).is_empty());
    }

    #[test]
    fn delta_check_zero_connection() {
        let conn = Connection::new(3, RatFuncMat::zero(2)).unwrap();
        let pr = BoundProfile::new(
            3,
            2,
            0,
            0,
            0,
            vec![rat_i64(0), rat_i64(0)],
            ZCase::NoPole,
            false,
            None,
        )
        .unwrap();
        let rep = delta_valuation_check(&conn, &pr, 12, 16).unwrap();
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn delta_check_family_small() {
        let conn = Connection::elliptic_example(3).unwrap();
        let pr = crate::bounds::elliptic_example_profile(&conn, &rat_i64(2)).unwrap();
        let rep = delta_valuation_check(&conn, &pr, 30, 40).unwrap();
        assert!(rep.violations.is_empty(), "violations: {:?}", rep.violations);
        // the probe agrees with v_on_v on the rational-function form
        let deltas = conn.delta_matrices(8).unwrap();
        for (i, d) in deltas.iter().enumerate() {
            if d.is_zero() {
                continue;
            }
            let direct = conn.v_on_v(d, 40).unwrap();
            let row = rep.rows[i];
            assert_eq!(direct.lower_bound().unwrap(), row.1, "probe mismatch at i = {i}");
        }
    }

    #[test]
    fn remark_leading_term_product_formula() {
        // leading Laurent coefficient of Delta^(i) at z equals
        // (R - (i-1) I) ... (R - I) R / i! for i <= 10
        let conn = Connection::elliptic_example(3).unwrap();
        for z in [rat_i64(2), rat_i64(-2)] {
            let rz = conn.residue_matrix(&z).unwrap();
            let deltas = conn.delta_matrices(10).unwrap();
            for i in 1..=10usize {
                let mut prod = rz.clone();
                let mut fact = Rat::one();
                for j in 1..i {
                    let mut shifted = rz.clone();
                    for d in 0..2 {
                        shifted[(d, d)] -= rat_i64(j as i64);
                    }
                    prod = shifted.mul(&prod);
                    fact *= Rat::from_integer(BigInt::from(j as u64 + 1));
                }
                let expect = prod.scale(&(Rat::one() / fact));
                // leading coefficient: entry-wise order -i coefficient
                for a in 0..2 {
                    for b in 0..2 {
                        let pp = laurent_principal_part(&deltas[i][(a, b)], &z);
                        let lead = pp
                            .iter()
                            .find(|(o, _)| *o == -(i as i64))
                            .map(|(_, c)| c.clone())
                            .unwrap_or_else(Rat::zero);
                        assert_eq!(lead, expect[(a, b)], "i={i} z={z} entry ({a},{b})");
                    }
                }
            }
        }
    }
}
