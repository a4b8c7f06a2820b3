//! Dense univariate polynomials with exact rational coefficients.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{rational_val_p, Rat, Valuation};

/// Polynomial in one variable over the rationals, coefficient of `t^i` at
/// index `i`, trailing zeros trimmed (the zero polynomial is empty).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatPoly(Vec<Rat>);

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly(coeffs)
    }

    pub fn zero() -> Self {
        RatPoly(Vec::new())
    }

    pub fn one() -> Self {
        RatPoly(vec![Rat::one()])
    }

    pub fn constant(c: Rat) -> Self {
        Self::new(vec![c])
    }

    /// `c * t^k`
    pub fn monomial(c: Rat, k: usize) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let mut v = vec![Rat::zero(); k + 1];
        v[k] = c;
        RatPoly(v)
    }

    /// `t - z`
    pub fn linear_root(z: &Rat) -> Self {
        RatPoly(vec![-z.clone(), Rat::one()])
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.0.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.0.is_empty() {
            None
        } else {
            Some(self.0.len() - 1)
        }
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.0.last()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.0.len().max(rhs.0.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + rhs.coeff(i));
        }
        Self::new(out)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        RatPoly(self.0.iter().map(|c| -c.clone()).collect())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RatPoly(self.0.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rat::zero(); self.0.len() + rhs.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.0.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut out = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    pub fn derivative(&self) -> Self {
        if self.0.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * Rat::from_integer(BigInt::from(i as u64 + 1)))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut v = Rat::zero();
        for c in self.0.iter().rev() {
            v = v * x + c;
        }
        v
    }

    /// Substitute another polynomial for the variable.
    pub fn compose(&self, inner: &Self) -> Self {
        let mut v = Self::zero();
        for c in self.0.iter().rev() {
            v = v.mul(inner).add(&Self::constant(c.clone()));
        }
        v
    }

    /// `self(s + z)` as a polynomial in `s`.
    pub fn shift(&self, z: &Rat) -> Self {
        self.compose(&RatPoly(vec![z.clone(), Rat::one()]))
    }

    /// Coefficient reversal `s^deg * self(1/s)`.
    pub fn reversed(&self) -> Self {
        let mut v = self.0.clone();
        v.reverse();
        Self::new(v)
    }

    /// Euclidean division; the divisor must be nonzero.
    pub fn div_rem(&self, div: &Self) -> (Self, Self) {
        assert!(!div.is_zero(), "division by zero polynomial");
        let dd = div.0.len();
        if self.0.len() < dd {
            return (Self::zero(), self.clone());
        }
        let lead_inv = Rat::one() / div.0.last().unwrap().clone();
        let mut rem = self.0.clone();
        let mut quo = vec![Rat::zero(); self.0.len() - dd + 1];
        let mut top = rem.len();
        while top >= dd {
            let c = &rem[top - 1] * &lead_inv;
            let k = top - dd;
            if !c.is_zero() {
                quo[k] = c.clone();
                for (i, b) in div.0.iter().enumerate() {
                    let t = b * &c;
                    rem[k + i] -= t;
                }
            }
            top -= 1;
            while top >= dd && rem[top - 1].is_zero() {
                top -= 1;
            }
        }
        rem.truncate(top);
        (Self::new(quo), Self::new(rem))
    }

    /// Exact division; panics if the remainder is nonzero.
    pub fn div_exact(&self, div: &Self) -> Self {
        let (q, r) = self.div_rem(div);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(l) => self.scale(&(Rat::one() / l.clone())),
        }
    }

    /// Monic gcd via a primitive polynomial-remainder sequence over the
    /// integers (keeps coefficient growth in check).
    pub fn gcd(&self, rhs: &Self) -> Self {
        if self.is_zero() {
            return rhs.monic();
        }
        if rhs.is_zero() {
            return self.monic();
        }
        let mut a = to_primitive_int(self);
        let mut b = to_primitive_int(rhs);
        if a.len() < b.len() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            if b.is_empty() {
                return RatPoly::new(a.into_iter().map(Rat::from_integer).collect()).monic();
            }
            let r = int_pseudo_rem(&a, &b);
            a = b;
            b = primitive_part(r);
        }
    }

    /// Largest `k` with `(t - z)^k` dividing `self` (0 for the zero poly by
    /// convention of the caller).
    pub fn root_multiplicity(&self, z: &Rat) -> usize {
        if self.is_zero() {
            return 0;
        }
        let lin = Self::linear_root(z);
        let mut k = 0;
        let mut cur = self.clone();
        loop {
            let (q, r) = cur.div_rem(&lin);
            if !r.is_zero() {
                return k;
            }
            k += 1;
            cur = q;
        }
    }

    /// Minimum `v_p` over the coefficients (`Infinite` for the zero poly).
    pub fn min_val_p(&self, p: u64) -> Valuation {
        let mut out = Valuation::Infinite;
        for c in &self.0 {
            out = out.min(rational_val_p(c, p));
        }
        out
    }

    /// All rational roots with multiplicity, plus the (root-free) cofactor.
    pub fn rational_roots(&self) -> (Vec<(Rat, usize)>, Self) {
        if self.is_zero() {
            return (Vec::new(), Self::zero());
        }
        let prim = to_primitive_int(self);
        let mut roots = Vec::new();
        let mut cur = RatPoly::new(prim.into_iter().map(Rat::from_integer).collect());
        // strip t^k
        let mut k0 = 0;
        while !cur.0.is_empty() && cur.0[0].is_zero() {
            cur.0.remove(0);
            k0 += 1;
        }
        if k0 > 0 {
            roots.push((Rat::zero(), k0));
        }
        if cur.degree() == Some(0) {
            return (roots, Self::one());
        }
        let prim = to_primitive_int(&cur);
        let c0 = prim.first().cloned().unwrap_or_else(BigInt::zero);
        let cl = prim.last().cloned().unwrap_or_else(BigInt::one);
        let mut candidates: Vec<Rat> = Vec::new();
        for n in divisors(&c0) {
            for d in divisors(&cl) {
                let q = Rat::new(n.clone(), d.clone());
                if !candidates.contains(&q) {
                    candidates.push(q.clone());
                }
                let qn = -q;
                if !candidates.contains(&qn) {
                    candidates.push(qn);
                }
            }
        }
        for cand in candidates {
            let mut mult = 0;
            let lin = Self::linear_root(&cand);
            loop {
                if cur.degree().is_none() || cur.degree() == Some(0) {
                    break;
                }
                if !cur.eval(&cand).is_zero() {
                    break;
                }
                cur = cur.div_exact(&lin);
                mult += 1;
            }
            if mult > 0 {
                roots.push((cand, mult));
            }
        }
        (roots, cur)
    }
}

impl std::fmt::Display for RatPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            if i >= 1 {
                if show_coeff {
                    write!(f, "*")?;
                }
                write!(f, "t")?;
                if i > 1 {
                    write!(f, "^{i}")?;
                }
            }
        }
        Ok(())
    }
}

/// Scale to integer coefficients with content 1 and positive leading term.
fn to_primitive_int(p: &RatPoly) -> Vec<BigInt> {
    if p.is_zero() {
        return Vec::new();
    }
    let mut l = BigInt::one();
    for c in p.coeffs() {
        l = l.lcm(c.denom());
    }
    let ints: Vec<BigInt> = p.coeffs().iter().map(|c| c.numer() * (&l / c.denom())).collect();
    primitive_part(ints)
}

fn primitive_part(mut v: Vec<BigInt>) -> Vec<BigInt> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    if v.is_empty() {
        return v;
    }
    let mut g = BigInt::zero();
    for c in &v {
        g = g.gcd(c);
    }
    if v.last().unwrap().is_negative() {
        g = -g;
    }
    for c in v.iter_mut() {
        *c = &*c / &g;
    }
    v
}

/// Pseudo-remainder of integer polynomials.
fn int_pseudo_rem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r: Vec<BigInt> = a.to_vec();
    let db = b.len() - 1;
    let lb = b.last().unwrap();
    while r.len() > db {
        let lr = r.last().unwrap().clone();
        let k = r.len() - 1 - db;
        for c in r.iter_mut() {
            *c = &*c * lb;
        }
        for (i, bc) in b.iter().enumerate() {
            r[k + i] -= &lr * bc;
        }
        while r.last().is_some_and(|c| c.is_zero()) {
            r.pop();
        }
        if r.len() <= db {
            break;
        }
    }
    r
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        // 0 only has the trivial candidate, handled by the t^k strip
        return vec![BigInt::one()];
    }
    let mut out = Vec::new();
    let mut d = BigInt::one();
    // height-bounded inputs only; bail out rather than loop forever
    let limit = BigInt::from(10_000_000u64);
    while &d * &d <= n {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            out.push(&n / &d);
        }
        d += 1;
        if d > limit {
            break;
        }
    }
    out
}
