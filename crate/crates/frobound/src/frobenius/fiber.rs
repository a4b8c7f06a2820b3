//! Frobenius matrix of one elliptic fiber `y^2 = Q(x)`, `Q` a cubic, by
//! the cohomological reduction algorithm on the odd part of the
//! Monsky-Washnitzer cohomology with basis `[dx/y, x dx/y]`.
//!
//! All intermediate arithmetic is exact rational, so the only error
//! source is the truncation of the binomial expansion of
//! `sigma(1/y) = y^-p (1 + E)^(-1/2)`; the truncation index is derived
//! from the term valuations and the reduction-loss bound, and the last
//! discarded term is checked to be negligible at the working modulus.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use crate::arith::{floor_log, rat_i64, Rat, RatPoly, Valuation, ZpCtx, ZpMat};
use crate::error::{Error, Result};

/// One fiber `y^2 = Q(x)` with an odd prime of good reduction.
#[derive(Clone, Debug)]
pub struct FiberCurve {
    pub q: RatPoly,
    pub p: u64,
    /// Target congruence exponent for downstream consumers.
    pub m_target: u32,
}

impl FiberCurve {
    pub fn new(q: RatPoly, p: u64, m_target: u32) -> Result<Self> {
        if !crate::arith::is_prime_u64(p) || p == 2 {
            return Err(Error::Unsupported(format!("p = {p} must be an odd prime")));
        }
        if q.degree() != Some(3) {
            return Err(Error::Unsupported("fiber cubic must have degree 3".into()));
        }
        for c in q.coeffs() {
            if !c.denom().is_one() {
                return Err(Error::Unsupported("fiber cubic must have integer coefficients".into()));
            }
        }
        let lc = q.leading().expect("degree 3");
        if val_of(lc, p) > 0 {
            return Err(Error::Unsupported("p divides the leading coefficient".into()));
        }
        if !squarefree_mod_p(&q, p) {
            return Err(Error::Unsupported(format!(
                "fiber is singular: Q is not squarefree modulo {p}"
            )));
        }
        Ok(FiberCurve { q, p, m_target })
    }
}

fn val_of(c: &Rat, p: u64) -> i64 {
    match crate::arith::rational_val_p(c, p) {
        Valuation::Finite(v) => v,
        _ => i64::MAX,
    }
}

/// Squarefreeness of an integer cubic modulo p, by polynomial gcd over F_p.
fn squarefree_mod_p(q: &RatPoly, p: u64) -> bool {
    let to_fp = |poly: &RatPoly| -> Vec<u64> {
        let mut v: Vec<u64> = poly
            .coeffs()
            .iter()
            .map(|c| {
                let n = c.numer().mod_floor_u64(p);
                n
            })
            .collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    };
    let mut a = to_fp(q);
    let mut b = to_fp(&q.derivative());
    // Euclid over F_p
    let inv = |x: u64| -> u64 {
        // p is prime and x != 0
        let mut r = 1u64;
        let mut base = x % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * base % p;
            }
            base = base * base % p;
            e >>= 1;
        }
        r
    };
    while !b.is_empty() {
        // a mod b
        while a.len() >= b.len() && !a.is_empty() {
            let c = a.last().unwrap() * inv(*b.last().unwrap()) % p;
            let k = a.len() - b.len();
            for (i, bc) in b.iter().enumerate() {
                let sub = c * bc % p;
                let idx = k + i;
                a[idx] = (a[idx] + p - sub) % p;
            }
            while a.last() == Some(&0) {
                a.pop();
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len() == 1
}

trait ModFloorU64 {
    fn mod_floor_u64(&self, p: u64) -> u64;
}

impl ModFloorU64 for BigInt {
    fn mod_floor_u64(&self, p: u64) -> u64 {
        use num_integer::Integer;
        let m = self.mod_floor(&BigInt::from(p));
        u64::try_from(m).expect("reduced residue fits u64")
    }
}

/// Extended gcd for small rational polynomials: `(g, u, v)` with
/// `u a + v b = g`, `g` the monic gcd.
fn ext_gcd(a: &RatPoly, b: &RatPoly) -> (RatPoly, RatPoly, RatPoly) {
    let mut r0 = a.clone();
    let mut r1 = b.clone();
    let mut s0 = RatPoly::one();
    let mut s1 = RatPoly::zero();
    let mut t0 = RatPoly::zero();
    let mut t1 = RatPoly::one();
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        r0 = r1;
        r1 = r;
        let s2 = s0.sub(&q.mul(&s1));
        s0 = s1;
        s1 = s2;
        let t2 = t0.sub(&q.mul(&t1));
        t0 = t1;
        t1 = t2;
    }
    let lead = r0.leading().expect("nonzero gcd").clone();
    let inv = Rat::one() / lead;
    (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
}

/// `binomial(-1/2, k)` as an exact rational (denominator a power of 2).
fn binom_half(k: u32) -> Rat {
    let mut out = Rat::one();
    let half = crate::arith::rat(-1, 2);
    for j in 0..k {
        out *= (&half - Rat::from_integer(BigInt::from(j))) / Rat::from_integer(BigInt::from(j + 1));
    }
    out
}

/// Matrix of the p-power Frobenius on `[dx/y, x dx/y]`, to the full
/// working precision of `ctx`.  Columns are the images of the basis
/// differentials.
pub fn kedlaya_fiber_matrix(curve: &FiberCurve, ctx: &Arc<ZpCtx>) -> Result<ZpMat> {
    let p = curve.p;
    assert_eq!(ctx.p(), p, "context prime mismatch");
    let mw = ctx.mw();
    let q = &curve.q;
    let dq = q.derivative();
    let (g, u, v) = ext_gcd(q, &dq);
    debug_assert_eq!(g.degree(), Some(0));
    let _ = u;
    // F = (Q(x^p) - Q(x)^p)/p has integer coefficients (Fermat)
    let qxp = q.compose(&RatPoly::monomial(Rat::one(), p as usize));
    let qp = q.pow(p as u32);
    let f = qxp.sub(&qp).scale(&crate::arith::rat(1, p as i64));
    for c in f.coeffs() {
        debug_assert!(c.denom().is_one(), "Fermat quotient must be integral");
    }
    // truncation index: discarded terms have valuation at least
    // k + 1 - (reduction loss at pole order 2 s_k + 1)
    let loss = |k: u32| -> i64 {
        let s = p * k as u64 + (p - 1) / 2;
        floor_log(p, 2 * s + 1) as i64 + 1
    };
    let mut k_max = 0u32;
    while (k_max as i64 + 1) - loss(k_max) < mw as i64 {
        k_max += 1;
    }
    let mut out = ZpMat::zero(ctx, 2);
    for basis_i in 0..2usize {
        // terms[s] holds A_s(x) for A_s / y^(2s+1) dx
        let mut terms: BTreeMap<u64, RatPoly> = BTreeMap::new();
        let mut f_pow = RatPoly::one();
        for k in 0..=k_max {
            let s = p * k as u64 + (p - 1) / 2;
            let co = Rat::from_integer(BigInt::from(p))
                * binom_half(k)
                * Rat::from_integer(BigInt::from(p)).pow(k as i32);
            let shift = p as usize * basis_i + p as usize - 1;
            let poly = f_pow.scale(&co).mul(&RatPoly::monomial(Rat::one(), shift));
            let entry = terms.entry(s).or_insert_with(RatPoly::zero);
            *entry = entry.add(&poly);
            if k < k_max {
                f_pow = f_pow.mul(&f);
            }
        }
        // pole reduction: A/y^(2s+1) with A = U Q + V Q' descends to
        // (U + 2 V'/(2s-1)) / y^(2s-1)
        while let Some((&s, _)) = terms.iter().rev().find(|(&s, a)| s > 0 && !a.is_zero()) {
            let a = terms.remove(&s).expect("present");
            let (_, av_mod_q) = a.mul(&v).div_rem(q);
            let u_part = a.sub(&av_mod_q.mul(&dq)).div_exact(q);
            let down = u_part.add(
                &av_mod_q
                    .derivative()
                    .scale(&Rat::new(BigInt::from(2), BigInt::from(2 * s - 1))),
            );
            let entry = terms.entry(s - 1).or_insert_with(RatPoly::zero);
            *entry = entry.add(&down);
        }
        // degree reduction at the dx/y level using the relations
        // [a x^(a-1) Q + x^a Q'/2] dx/y = 0 in cohomology
        let mut a0 = terms.remove(&0).unwrap_or_else(RatPoly::zero);
        while a0.degree().unwrap_or(0) >= 2 {
            let d = a0.degree().expect("nonzero");
            let aa = d - 2;
            let c = a0.leading().expect("nonzero").clone();
            let lead = q.leading().expect("cubic").clone()
                * (Rat::from_integer(BigInt::from(aa as u64)) + crate::arith::rat(3, 2));
            let mut rel = RatPoly::zero();
            if aa >= 1 {
                rel = rel.add(
                    &RatPoly::monomial(rat_i64(aa as i64), aa - 1).mul(q),
                );
            }
            rel = rel.add(
                &RatPoly::monomial(crate::arith::rat(1, 2), aa).mul(&dq),
            );
            a0 = a0.sub(&rel.scale(&(c / lead)));
        }
        for row in 0..2usize {
            let coeff = a0.coeff(row);
            if val_of(&coeff, p) < 0 {
                return Err(Error::Precision {
                    msg: "fiber reduction produced a non-integral cohomology class".into(),
                    needed: mw + coeff.denom().bits() as u32,
                });
            }
            out[(row, basis_i)] =
                crate::arith::PadicApprox::from_rational(ctx, &coeff).map_err(|_| {
                    Error::Precision {
                        msg: "fiber matrix entry has p in its denominator".into(),
                        needed: mw + 1,
                    }
                })?;
        }
    }
    // Weil constraints: v_p(det) = 1 and the lifted trace is a valid a_p
    let det = out.det();
    if det.val() != Valuation::Finite(1) {
        return Err(Error::Precision {
            msg: format!("fiber matrix determinant has v_p = {} (expected 1)", det.val()),
            needed: mw + 2,
        });
    }
    if mw >= 2 {
        trace_of_frobenius(&out)?;
    }
    Ok(out)
}

/// Balanced lift of the trace as the Frobenius trace `a_p`, validated
/// against the Weil bound `|a_p| <= 2 sqrt(p)`.
pub fn trace_of_frobenius(phi0: &ZpMat) -> Result<i64> {
    let ctx = phi0.ctx();
    let tr = phi0.trace().balanced_lift(ctx.mw());
    let a = i64::try_from(tr).map_err(|_| Error::Precision {
        msg: "trace lift does not fit a machine integer".into(),
        needed: ctx.mw(),
    })?;
    if (a as i128) * (a as i128) > 4 * ctx.p() as i128 {
        return Err(Error::Precision {
            msg: format!("lifted trace {a} violates the Weil bound"),
            needed: ctx.mw() + 2,
        });
    }
    Ok(a)
}
