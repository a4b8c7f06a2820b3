//! Power series in `t` truncated at order `K`, with truncated p-adic
//! coefficients: elements of `(Z/p^Mw)[[t]] / t^K`.

use std::sync::Arc;

use num_traits::Zero;

use crate::arith::padic::{PadicApprox, ZpCtx};
use crate::arith::poly::RatPoly;
use crate::arith::ratfunc::RatFunc;
use crate::arith::{rational_val_p, Valuation};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct TruncSeries {
    ctx: Arc<ZpCtx>,
    coeffs: Vec<PadicApprox>,
}

impl TruncSeries {
    pub fn zero(ctx: &Arc<ZpCtx>, k: usize) -> Self {
        TruncSeries { ctx: ctx.clone(), coeffs: vec![PadicApprox::zero(ctx); k] }
    }

    pub fn one(ctx: &Arc<ZpCtx>, k: usize) -> Self {
        let mut s = Self::zero(ctx, k);
        s.coeffs[0] = PadicApprox::one(ctx);
        s
    }

    pub fn from_coeffs(ctx: &Arc<ZpCtx>, mut coeffs: Vec<PadicApprox>, k: usize) -> Self {
        coeffs.resize(k, PadicApprox::zero(ctx));
        TruncSeries { ctx: ctx.clone(), coeffs }
    }

    /// The truncated expansion at `t = 0` of an exact rational-function.
    ///
    /// The input must have no pole inside the closed unit disc in the
    /// p-adic sense: after clearing powers of p common to numerator and
    /// denominator, the denominator's constant term must be a p-adic unit,
    /// and the overall p-power scale must be nonnegative.  Otherwise some
    /// Taylor coefficient has p in its denominator and the operation
    /// errors.
    pub fn from_ratfunc(ctx: &Arc<ZpCtx>, f: &RatFunc, k: usize) -> Result<Self> {
        if f.is_zero() {
            return Ok(Self::zero(ctx, k));
        }
        let p = ctx.p();
        if f.den().coeff(0).is_zero() {
            return Err(Error::Unsupported(format!("{f} has a pole at t = 0")));
        }
        // p-power scales of numerator and denominator
        let vnum = f.num().min_val_p(p).lower_bound().expect("nonzero");
        let vden = f.den().min_val_p(p).lower_bound().expect("nonzero");
        let scale = vnum - vden;
        if scale < 0 {
            return Err(Error::Unsupported(format!(
                "expansion of {f} has coefficients with denominator divisible by p = {p}"
            )));
        }
        // normalize: num1 = num / p^vnum, den1 = den / p^vden are p-integral
        let num1 = scale_by_p_power(f.num(), p, -vnum);
        let den1 = scale_by_p_power(f.den(), p, -vden);
        match rational_val_p(&den1.coeff(0), p) {
            Valuation::Finite(0) => {}
            _ => {
                return Err(Error::Unsupported(format!(
                    "expansion of {f} has coefficients with denominator divisible by p = {p} \
                     (denominator constant term is not a unit)"
                )))
            }
        }
        let nm = reduce_poly(ctx, &num1, k)?;
        let dm = reduce_poly(ctx, &den1, k)?;
        let inv0 = dm[0].unit_inv()?;
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let mut acc = nm[i].clone();
            for j in 1..=i {
                if !dm[j].is_zero_mantissa() {
                    acc = acc.sub(&dm[j].mul(&out[i - j]));
                }
            }
            out.push(acc.mul(&inv0));
        }
        let mut s = TruncSeries { ctx: ctx.clone(), coeffs: out };
        if scale > 0 {
            s = s.mul_pow_p(scale as u32);
        }
        Ok(s)
    }

    pub fn ctx(&self) -> &Arc<ZpCtx> {
        &self.ctx
    }

    pub fn trunc_order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, i: usize) -> &PadicApprox {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[PadicApprox] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, i: usize, c: PadicApprox) {
        self.coeffs[i] = c;
    }

    fn bin(&self, rhs: &Self) -> usize {
        assert_eq!(self.ctx.p(), rhs.ctx.p(), "mismatched p");
        assert_eq!(self.ctx.mw(), rhs.ctx.mw(), "mismatched Mw");
        assert_eq!(self.coeffs.len(), rhs.coeffs.len(), "mismatched truncation order");
        self.coeffs.len()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let k = self.bin(rhs);
        let coeffs = (0..k).map(|i| self.coeffs[i].add(&rhs.coeffs[i])).collect();
        TruncSeries { ctx: self.ctx.clone(), coeffs }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let k = self.bin(rhs);
        let coeffs = (0..k).map(|i| self.coeffs[i].sub(&rhs.coeffs[i])).collect();
        TruncSeries { ctx: self.ctx.clone(), coeffs }
    }

    pub fn neg(&self) -> Self {
        TruncSeries { ctx: self.ctx.clone(), coeffs: self.coeffs.iter().map(|c| c.neg()).collect() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let k = self.bin(rhs);
        let mut out = Self::zero(&self.ctx, k);
        for i in 0..k {
            if self.coeffs[i].is_zero_mantissa() {
                continue;
            }
            for j in 0..k - i {
                if !rhs.coeffs[j].is_zero_mantissa() {
                    out.coeffs[i + j] = out.coeffs[i + j].add(&self.coeffs[i].mul(&rhs.coeffs[j]));
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &PadicApprox) -> Self {
        TruncSeries { ctx: self.ctx.clone(), coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect() }
    }

    pub fn mul_pow_p(&self, e: u32) -> Self {
        TruncSeries {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|x| x.mul_pow_p(e)).collect(),
        }
    }

    /// Multiply by the linear polynomial `t - z` (cheap, no truncation
    /// artifacts below `K`).
    pub fn mul_linear_root(&self, z: &PadicApprox) -> Self {
        let k = self.coeffs.len();
        let mz = z.neg();
        let mut out = Vec::with_capacity(k);
        out.push(self.coeffs[0].mul(&mz));
        for i in 1..k {
            out.push(self.coeffs[i].mul(&mz).add(&self.coeffs[i - 1]));
        }
        TruncSeries { ctx: self.ctx.clone(), coeffs: out }
    }

    /// Exact division by `t - z` in the truncated ring; requires the
    /// constant term of `t - z` to be a unit, i.e. `v_p(z) = 0`.
    pub fn div_linear_root(&self, z: &PadicApprox) -> Result<Self> {
        let zinv = z.neg().unit_inv()?;
        let k = self.coeffs.len();
        let mut out: Vec<PadicApprox> = Vec::with_capacity(k);
        // (t - z) X = S  =>  X_i = (X_{i-1} - S_i) * z^{-1} with X_{-1} = 0
        let mut prev = PadicApprox::zero(&self.ctx);
        for i in 0..k {
            let x = prev.sub(&self.coeffs[i]).mul(&zinv).neg();
            // X_i = (S_i - X_{i-1}) * (-z)^{-1}
            prev = x.clone();
            out.push(x);
        }
        Ok(TruncSeries { ctx: self.ctx.clone(), coeffs: out })
    }

    pub fn derivative(&self) -> Self {
        let k = self.coeffs.len();
        let mut out = Self::zero(&self.ctx, k);
        for i in 1..k {
            out.coeffs[i - 1] = self.coeffs[i].mul_i64(i as i64);
        }
        out
    }

    /// Inverse of a series whose constant term is a unit.
    pub fn unit_inverse(&self) -> Result<Self> {
        let inv0 = self.coeffs[0].unit_inv()?;
        let k = self.coeffs.len();
        let mut out = Vec::with_capacity(k);
        out.push(inv0.clone());
        for i in 1..k {
            let mut acc = PadicApprox::zero(&self.ctx);
            for j in 1..=i {
                if !self.coeffs[j].is_zero_mantissa() {
                    acc = acc.add(&self.coeffs[j].mul(&out[i - j]));
                }
            }
            out.push(acc.mul(&inv0).neg());
        }
        Ok(TruncSeries { ctx: self.ctx.clone(), coeffs: out })
    }

    /// `sigma(t) = t^p` substitution: `sum a_i t^i -> sum a_i t^(p i)`,
    /// truncated at `K`.
    pub fn frobenius_substitute(&self) -> Self {
        let k = self.coeffs.len();
        let p = self.ctx.p() as usize;
        let mut out = Self::zero(&self.ctx, k);
        let mut idx = 0usize;
        let mut i = 0usize;
        while idx < k {
            out.coeffs[idx] = self.coeffs[i].clone();
            i += 1;
            idx = i.checked_mul(p).unwrap_or(k);
        }
        out
    }

    /// Evaluate at an exact rational point by reducing it into the ring.
    pub fn eval_rational(&self, z: &crate::arith::Rat) -> Result<PadicApprox> {
        let zr = PadicApprox::from_rational(&self.ctx, z)?;
        let mut v = PadicApprox::zero(&self.ctx);
        for c in self.coeffs.iter().rev() {
            v = v.mul(&zr).add(c);
        }
        Ok(v)
    }

    /// Minimum valuation over the coefficients.
    pub fn min_val(&self) -> Valuation {
        let mut out = Valuation::AtLeast(self.ctx.mw() as i64);
        for c in &self.coeffs {
            out = out.min(c.val());
        }
        out
    }

    /// Minimum coefficient accuracy.
    pub fn min_acc(&self) -> u32 {
        self.coeffs.iter().map(|c| c.acc()).min().unwrap_or(self.ctx.mw())
    }

    pub fn with_acc_floor(&self, acc: u32) -> Self {
        TruncSeries {
            ctx: self.ctx.clone(),
            coeffs: self.coeffs.iter().map(|c| c.with_acc_floor(acc)).collect(),
        }
    }
}

fn scale_by_p_power(poly: &RatPoly, p: u64, e: i64) -> RatPoly {
    if e == 0 {
        return poly.clone();
    }
    let base = crate::arith::Rat::from_integer(num_bigint::BigInt::from(p));
    poly.scale(&base.pow(e as i32))
}

fn reduce_poly(ctx: &Arc<ZpCtx>, poly: &RatPoly, k: usize) -> Result<Vec<PadicApprox>> {
    let mut out = vec![PadicApprox::zero(ctx); k];
    for (i, c) in poly.coeffs().iter().enumerate() {
        if i >= k {
            break;
        }
        if !c.is_zero() {
            out[i] = PadicApprox::from_rational(ctx, c)?;
        }
    }
    Ok(out)
}
