//! Rational functions in one variable over the rationals.

use num_traits::Zero;

use crate::arith::poly::RatPoly;
use crate::arith::Rat;
use crate::error::{Error, Result};

/// `numerator / denominator` with the denominator monic and coprime to the
/// numerator, so "has a pole at z" is decidable by denominator evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    num: RatPoly,
    den: RatPoly,
}

impl RatFunc {
    pub fn new(num: RatPoly, den: RatPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let g = num.gcd(&den);
        let (num, den) = if g.degree() == Some(0) {
            (num, den)
        } else {
            (num.div_exact(&g), den.div_exact(&g))
        };
        let lead = den.leading().expect("nonzero").clone();
        let inv = Rat::new(lead.denom().clone(), lead.numer().clone());
        RatFunc { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn from_poly(p: RatPoly) -> Self {
        RatFunc { num: p, den: RatPoly::one() }
    }

    pub fn zero() -> Self {
        Self::from_poly(RatPoly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(RatPoly::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_poly(RatPoly::constant(c))
    }

    pub fn num(&self) -> &RatPoly {
        &self.num
    }

    pub fn den(&self) -> &RatPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::new(
            self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den)),
            self.den.mul(&rhs.den),
        )
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self::new(self.num.mul(&rhs.num), self.den.mul(&rhs.den))
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::Invalid("inverse of zero rational function".into()));
        }
        Ok(Self::new(self.den.clone(), self.num.clone()))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative())),
            self.den.mul(&self.den),
        )
    }

    pub fn has_pole_at(&self, z: &Rat) -> bool {
        self.den.eval(z).is_zero()
    }

    pub fn eval(&self, z: &Rat) -> Result<Rat> {
        let d = self.den.eval(z);
        if d.is_zero() {
            return Err(Error::Invalid(format!("pole at t = {z}")));
        }
        Ok(self.num.eval(z) / d)
    }

    /// Order of vanishing at `z` (negative at a pole); `None` for zero.
    pub fn order_at(&self, z: &Rat) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let up = self.num.root_multiplicity(z) as i64;
        let down = self.den.root_multiplicity(z) as i64;
        Some(up - down)
    }

    /// Order of vanishing at infinity: `deg den - deg num` (negative when
    /// the function grows); `None` for zero.
    pub fn order_at_infinity(&self) -> Option<i64> {
        let dn = self.num.degree()? as i64;
        let dd = self.den.degree().expect("nonzero denominator") as i64;
        Some(dd - dn)
    }

    /// Substitute a polynomial for the variable.
    pub fn compose_poly(&self, inner: &RatPoly) -> Self {
        Self::new(self.num.compose(inner), self.den.compose(inner))
    }
}

impl std::fmt::Display for RatFunc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_i64};

    fn poly(v: &[i64]) -> RatPoly {
        RatPoly::new(v.iter().map(|&n| rat_i64(n)).collect())
    }

    #[test]
    fn normalization() {
        // (t+1)/(t^2-1) = 1/(t-1)
        let f = RatFunc::new(poly(&[1, 1]), poly(&[-1, 0, 1]));
        assert_eq!(f.num(), &RatPoly::one());
        assert_eq!(f.den(), &poly(&[-1, 1]));
        // denominator made monic
        let g = RatFunc::new(poly(&[1]), poly(&[2, 2]));
        assert_eq!(g.den(), &poly(&[1, 1]));
        assert_eq!(g.num(), &RatPoly::constant(rat(1, 2)));
    }

    #[test]
    fn orders() {
        let f = RatFunc::new(poly(&[0, 0, 1]), poly(&[-2, 1])); // t^2/(t-2)
        assert_eq!(f.order_at(&rat_i64(0)), Some(2));
        assert_eq!(f.order_at(&rat_i64(2)), Some(-1));
        assert_eq!(f.order_at_infinity(), Some(-1));
    }

    #[test]
    fn field_ops() {
        let f = RatFunc::new(poly(&[1]), poly(&[-2, 1]));
        let g = f.inv().unwrap();
        assert_eq!(g.num(), &poly(&[-2, 1]));
        assert!(f.mul(&g).sub(&RatFunc::one()).is_zero());
        let d = f.derivative(); // -1/(t-2)^2
        assert_eq!(d.num(), &poly(&[-1]));
        assert_eq!(d.den(), &poly(&[-2, 1]).mul(&poly(&[-2, 1])));
    }
}
