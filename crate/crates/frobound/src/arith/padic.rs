//! Truncated p-adic scalars.
//!
//! A [`PadicApprox`] is a residue mantissa in `[0, p^Mw)` together with a
//! guaranteed-accuracy exponent `acc`: the value it stands for is known
//! modulo `p^acc`, and `acc` never increases through arithmetic.  Division
//! by `p^k` requires the mantissa to be exactly divisible and costs `k`
//! digits of accuracy.  A mantissa of `0` with `acc = Mw` means "congruent
//! to 0 mod p^Mw", never "exactly zero"; exact zero lives in the rationals.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{val_p_bigint, Rat, Valuation};
use crate::error::{Error, Result};

/// Shared modulus data for a fixed `(p, Mw)`.
#[derive(Debug)]
pub struct ZpCtx {
    p: u64,
    mw: u32,
    modulus: BigUint,
}

impl ZpCtx {
    /// New context for working modulus `p^mw`.  `p` must be prime.
    pub fn new(p: u64, mw: u32) -> Result<Arc<ZpCtx>> {
        if !is_prime_u64(p) {
            return Err(Error::Unsupported(format!("p = {p} is not prime")));
        }
        if mw == 0 {
            return Err(Error::Invalid("working precision Mw must be positive".into()));
        }
        let modulus = BigUint::from(p).pow(mw);
        Ok(Arc::new(ZpCtx { p, mw, modulus }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn mw(&self) -> u32 {
        self.mw
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn p_pow(&self, k: u32) -> BigUint {
        BigUint::from(self.p).pow(k)
    }

    fn same(&self, other: &ZpCtx) -> bool {
        self.p == other.p && self.mw == other.mw
    }
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = 11u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// An element of `Z/p^Mw` known to accuracy `p^acc`.
#[derive(Clone)]
pub struct PadicApprox {
    ctx: Arc<ZpCtx>,
    mantissa: BigUint,
    acc: u32,
}

impl fmt::Debug for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (mod {}^{}, acc {})",
            self.mantissa,
            self.ctx.p(),
            self.ctx.mw(),
            self.acc
        )
    }
}

impl PadicApprox {
    pub fn zero(ctx: &Arc<ZpCtx>) -> Self {
        PadicApprox { ctx: ctx.clone(), mantissa: BigUint::zero(), acc: ctx.mw() }
    }

    pub fn one(ctx: &Arc<ZpCtx>) -> Self {
        PadicApprox { ctx: ctx.clone(), mantissa: BigUint::one(), acc: ctx.mw() }
    }

    pub fn from_biguint(ctx: &Arc<ZpCtx>, n: BigUint) -> Self {
        PadicApprox { ctx: ctx.clone(), mantissa: n % ctx.modulus(), acc: ctx.mw() }
    }

    pub fn from_bigint(ctx: &Arc<ZpCtx>, n: &BigInt) -> Self {
        let m = n.mod_floor(&BigInt::from(ctx.modulus().clone()));
        Self::from_biguint(ctx, m.to_biguint().expect("mod_floor result is nonnegative"))
    }

    pub fn from_i64(ctx: &Arc<ZpCtx>, n: i64) -> Self {
        Self::from_bigint(ctx, &BigInt::from(n))
    }

    /// Reduce an exact rational; the denominator must be coprime to p.
    pub fn from_rational(ctx: &Arc<ZpCtx>, q: &Rat) -> Result<Self> {
        let den = q.denom();
        if den.mod_floor(&BigInt::from(ctx.p())).is_zero() {
            return Err(Error::Unsupported(format!(
                "denominator of {q} is divisible by p = {}",
                ctx.p()
            )));
        }
        let num = Self::from_bigint(ctx, q.numer());
        let den = Self::from_bigint(ctx, den);
        den.unit_inv().map(|i| num.mul(&i))
    }

    pub fn ctx(&self) -> &Arc<ZpCtx> {
        &self.ctx
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    pub fn acc(&self) -> u32 {
        self.acc
    }

    /// Clamp the accuracy down to `acc` (no-op if already lower).
    pub fn with_acc_floor(&self, acc: u32) -> Self {
        PadicApprox { ctx: self.ctx.clone(), mantissa: self.mantissa.clone(), acc: self.acc.min(acc) }
    }

    /// True if the mantissa is 0, i.e. the value is `0 mod p^Mw`.
    pub fn is_zero_mantissa(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// Mantissa reduced modulo `p^m` for `m <= Mw`.
    pub fn mantissa_mod(&self, m: u32) -> BigUint {
        debug_assert!(m <= self.ctx.mw());
        &self.mantissa % self.ctx.p_pow(m)
    }

    /// Symmetric (balanced) integer lift modulo `p^m`.
    pub fn balanced_lift(&self, m: u32) -> BigInt {
        let pm = self.ctx.p_pow(m);
        let r = &self.mantissa % &pm;
        let half = &pm >> 1;
        if r > half {
            BigInt::from(r) - BigInt::from(pm)
        } else {
            BigInt::from(r)
        }
    }

    fn bin(&self, rhs: &Self) -> &Arc<ZpCtx> {
        assert!(self.ctx.same(&rhs.ctx), "mismatched p-adic contexts");
        &self.ctx
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let ctx = self.bin(rhs);
        PadicApprox {
            ctx: ctx.clone(),
            mantissa: (&self.mantissa + &rhs.mantissa) % ctx.modulus(),
            acc: self.acc.min(rhs.acc),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let ctx = self.bin(rhs);
        let m = ctx.modulus();
        let a = &self.mantissa;
        let b = &rhs.mantissa;
        let mantissa = if a >= b { a - b } else { m - b + a };
        PadicApprox { ctx: ctx.clone(), mantissa, acc: self.acc.min(rhs.acc) }
    }

    pub fn neg(&self) -> Self {
        let mantissa = if self.mantissa.is_zero() {
            BigUint::zero()
        } else {
            self.ctx.modulus() - &self.mantissa
        };
        PadicApprox { ctx: self.ctx.clone(), mantissa, acc: self.acc }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let ctx = self.bin(rhs);
        PadicApprox {
            ctx: ctx.clone(),
            mantissa: (&self.mantissa * &rhs.mantissa) % ctx.modulus(),
            acc: self.acc.min(rhs.acc),
        }
    }

    pub fn mul_i64(&self, n: i64) -> Self {
        self.mul(&Self::from_i64(&self.ctx, n))
    }

    /// Inverse of a unit (`v_p = 0`).
    pub fn unit_inv(&self) -> Result<Self> {
        if self.mantissa.is_zero() || (&self.mantissa % self.ctx.p()).is_zero() {
            return Err(Error::Precision {
                msg: format!("attempted inverse of non-unit {:?}", self),
                needed: self.ctx.mw() + 1,
            });
        }
        let m = BigInt::from(self.ctx.modulus().clone());
        let a = BigInt::from(self.mantissa.clone());
        let e = a.extended_gcd(&m);
        debug_assert!(e.gcd.is_one());
        let inv = e.x.mod_floor(&m).to_biguint().expect("nonnegative");
        Ok(PadicApprox { ctx: self.ctx.clone(), mantissa: inv, acc: self.acc })
    }

    /// Exact division by `p^k`.  The mantissa must be divisible by `p^k`
    /// (a failure signals a precision-structure bug upstream) and the
    /// accuracy drops by exactly `k`.
    pub fn div_pow_p(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Ok(self.clone());
        }
        if k > self.acc {
            return Err(Error::Precision {
                msg: format!("division by p^{k} exhausts accuracy {}", self.acc),
                needed: self.ctx.mw() + k,
            });
        }
        let pk = self.ctx.p_pow(k);
        let (q, r) = self.mantissa.div_rem(&pk);
        if !r.is_zero() {
            return Err(Error::Precision {
                msg: format!("mantissa {} not divisible by p^{k}", self.mantissa),
                needed: self.ctx.mw() + k,
            });
        }
        Ok(PadicApprox { ctx: self.ctx.clone(), mantissa: q, acc: self.acc - k })
    }

    pub fn mul_pow_p(&self, k: u32) -> Self {
        let ctx = &self.ctx;
        PadicApprox {
            ctx: ctx.clone(),
            mantissa: (&self.mantissa * ctx.p_pow(k)) % ctx.modulus(),
            acc: (self.acc + k).min(ctx.mw()),
        }
    }

    /// `min(v_p(mantissa), Mw)`, flagged `AtLeast(Mw)` when the mantissa is 0.
    pub fn val(&self) -> Valuation {
        if self.mantissa.is_zero() {
            return Valuation::AtLeast(self.ctx.mw() as i64);
        }
        let v = val_p_bigint(&BigInt::from(self.mantissa.clone()), self.ctx.p());
        Valuation::Finite((v as i64).min(self.ctx.mw() as i64))
    }

    /// `v_p` of the residue modulo `p^m` (`AtLeast(m)` if it vanishes there).
    pub fn val_mod(&self, m: u32) -> Valuation {
        let r = self.mantissa_mod(m);
        if r.is_zero() {
            return Valuation::AtLeast(m as i64);
        }
        Valuation::Finite(val_p_bigint(&BigInt::from(r), self.ctx.p()) as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, mw: u32) -> Arc<ZpCtx> {
        ZpCtx::new(p, mw).unwrap()
    }

    #[test]
    fn modular_product() {
        // 5 * 17 = 85 = 4 mod 81
        let c = ctx(3, 4);
        let a = PadicApprox::from_i64(&c, 5);
        let b = PadicApprox::from_i64(&c, 17);
        assert_eq!(a.mul(&b).mantissa(), &BigUint::from(4u32));
    }

    #[test]
    fn unit_inverse() {
        // 2 * 41 = 82 = 1 mod 81
        let c = ctx(3, 4);
        let two = PadicApprox::from_i64(&c, 2);
        assert_eq!(two.unit_inv().unwrap().mantissa(), &BigUint::from(41u32));
        let three = PadicApprox::from_i64(&c, 3);
        assert!(three.unit_inv().is_err());
    }

    #[test]
    fn divide_by_p() {
        let c = ctx(5, 3);
        let a = PadicApprox::from_i64(&c, 25);
        let q = a.div_pow_p(1).unwrap();
        assert_eq!(q.mantissa(), &BigUint::from(5u32));
        assert_eq!(q.acc(), 2);
        // 26 is not divisible by 5
        let b = PadicApprox::from_i64(&c, 26);
        assert!(b.div_pow_p(1).is_err());
    }

    #[test]
    fn valuations() {
        let c = ctx(3, 4);
        assert_eq!(PadicApprox::from_i64(&c, 18).val(), Valuation::Finite(2));
        assert_eq!(PadicApprox::from_i64(&c, 0).val(), Valuation::AtLeast(4));
        let c7 = ctx(7, 2);
        assert_eq!(PadicApprox::from_i64(&c7, 14).val(), Valuation::Finite(1));
    }

    #[test]
    fn rational_reduction() {
        // -1/2 = 4 mod 9
        let c = ctx(3, 2);
        let q = Rat::new(BigInt::from(-1), BigInt::from(2));
        assert_eq!(PadicApprox::from_rational(&c, &q).unwrap().mantissa(), &BigUint::from(4u32));
        let bad = Rat::new(BigInt::from(1), BigInt::from(3));
        assert!(PadicApprox::from_rational(&c, &bad).is_err());
    }

    #[test]
    fn acc_bookkeeping() {
        let c = ctx(3, 6);
        let a = PadicApprox::from_i64(&c, 9);
        let b = a.div_pow_p(2).unwrap();
        assert_eq!(b.acc(), 4);
        let s = b.add(&PadicApprox::one(&c));
        assert_eq!(s.acc(), 4);
        assert_eq!(s.mul(&PadicApprox::from_i64(&c, 7)).acc(), 4);
    }
}
