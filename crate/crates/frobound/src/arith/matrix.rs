//! Square matrices over the kernel's scalar rings.
//!
//! Four concrete types rather than one generic container: exact rational
//! matrices (`RatMat`), rational-function matrices (`RatFuncMat`),
//! truncated-series matrices (`SeriesMat`) and truncated p-adic matrices
//! (`ZpMat`).  Dimensions here are tiny (r = 2 for the built-in family),
//! so clarity wins over genericity.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::arith::padic::{PadicApprox, ZpCtx};
use crate::arith::poly::RatPoly;
use crate::arith::ratfunc::RatFunc;
use crate::arith::series::TruncSeries;
use crate::arith::{rational_val_p, Rat, Valuation};
use crate::error::{Error, Result};

// ---------------------------------------------------------------- RatMat

/// `r x r` matrix of exact rationals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMat {
    r: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn zero(r: usize) -> Self {
        RatMat { r, data: vec![Rat::zero(); r * r] }
    }

    pub fn identity(r: usize) -> Self {
        let mut m = Self::zero(r);
        for i in 0..r {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        assert!(rows.iter().all(|row| row.len() == r), "not square");
        RatMat { r, data: rows.into_iter().flatten().collect() }
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        RatMat {
            r: self.r,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        RatMat {
            r: self.r,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        RatMat { r: self.r, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        let r = self.r;
        let mut out = Self::zero(r);
        for i in 0..r {
            for k in 0..r {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..r {
                    let t = a * &rhs[(k, j)];
                    out[(i, j)] += t;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Rat {
        (0..self.r).map(|i| self[(i, i)].clone()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Self> {
        let r = self.r;
        let mut a = self.clone();
        let mut inv = Self::identity(r);
        for col in 0..r {
            let piv = (col..r)
                .find(|&i| !a[(i, col)].is_zero())
                .ok_or_else(|| Error::Invalid("singular matrix".into()))?;
            if piv != col {
                for j in 0..r {
                    a.data.swap(col * r + j, piv * r + j);
                    inv.data.swap(col * r + j, piv * r + j);
                }
            }
            let d = a[(col, col)].clone();
            for j in 0..r {
                a[(col, j)] = &a[(col, j)] / &d;
                inv[(col, j)] = &inv[(col, j)] / &d;
            }
            for i in 0..r {
                if i == col || a[(i, col)].is_zero() {
                    continue;
                }
                let f = a[(i, col)].clone();
                for j in 0..r {
                    let t = &a[(col, j)] * &f;
                    a[(i, j)] -= t;
                    let t = &inv[(col, j)] * &f;
                    inv[(i, j)] -= t;
                }
            }
        }
        Ok(inv)
    }

    /// Characteristic polynomial by the Faddeev-LeVerrier recurrence.
    pub fn char_poly(&self) -> RatPoly {
        let r = self.r;
        let mut coeffs = vec![Rat::zero(); r + 1];
        coeffs[r] = Rat::one();
        let mut m = Self::identity(r);
        for k in 1..=r {
            m = self.mul(&m);
            let c = -m.trace() / Rat::from_integer(num_bigint::BigInt::from(k as u64));
            coeffs[r - k] = c.clone();
            for i in 0..r {
                m[(i, i)] += c.clone();
            }
        }
        RatPoly::new(coeffs)
    }

    /// Basis of the kernel, columns in a canonical form: reduced row
    /// echelon with free variables set to 1, then each vector scaled to
    /// integer entries with content 1.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        let r = self.r;
        let mut a = self.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut row = 0;
        for col in 0..r {
            let Some(piv) = (row..r).find(|&i| !a[(i, col)].is_zero()) else {
                continue;
            };
            if piv != row {
                for j in 0..r {
                    a.data.swap(row * r + j, piv * r + j);
                }
            }
            let d = a[(row, col)].clone();
            for j in 0..r {
                a[(row, j)] = &a[(row, j)] / &d;
            }
            for i in 0..r {
                if i != row && !a[(i, col)].is_zero() {
                    let f = a[(i, col)].clone();
                    for j in 0..r {
                        let t = &a[(row, j)] * &f;
                        a[(i, j)] -= t;
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..r {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![Rat::zero(); r];
            v[free] = Rat::one();
            for &(prow, pcol) in &pivots {
                v[pcol] = -a[(prow, free)].clone();
            }
            // scale to primitive integer vector
            let mut l = num_bigint::BigInt::one();
            for c in &v {
                l = num_integer::Integer::lcm(&l, c.denom());
            }
            let mut ints: Vec<num_bigint::BigInt> =
                v.iter().map(|c| c.numer() * (&l / c.denom())).collect();
            let mut g = num_bigint::BigInt::zero();
            for c in &ints {
                g = num_integer::Integer::gcd(&g, c);
            }
            if !g.is_zero() {
                for c in ints.iter_mut() {
                    *c = &*c / &g;
                }
            }
            basis.push(ints.into_iter().map(Rat::from_integer).collect());
        }
        basis
    }

    /// Minimum `v_p` over the entries.
    pub fn min_val_p(&self, p: u64) -> Valuation {
        let mut out = Valuation::Infinite;
        for c in &self.data {
            out = out.min(rational_val_p(c, p));
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.r + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.r + j]
    }
}

// ------------------------------------------------------------ RatFuncMat

/// `r x r` matrix of rational functions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFuncMat {
    r: usize,
    data: Vec<RatFunc>,
}

impl RatFuncMat {
    pub fn zero(r: usize) -> Self {
        RatFuncMat { r, data: vec![RatFunc::zero(); r * r] }
    }

    pub fn identity(r: usize) -> Self {
        let mut m = Self::zero(r);
        for i in 0..r {
            m[(i, i)] = RatFunc::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<RatFunc>>) -> Self {
        let r = rows.len();
        assert!(rows.iter().all(|row| row.len() == r), "not square");
        RatFuncMat { r, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_scalar_matrix(m: &RatMat) -> Self {
        let r = m.dim();
        let mut out = Self::zero(r);
        for i in 0..r {
            for j in 0..r {
                out[(i, j)] = RatFunc::constant(m[(i, j)].clone());
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn entries(&self) -> &[RatFunc] {
        &self.data
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        RatFuncMat {
            r: self.r,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        RatFuncMat {
            r: self.r,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        let r = self.r;
        let mut out = Self::zero(r);
        for i in 0..r {
            for k in 0..r {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..r {
                    if rhs[(k, j)].is_zero() {
                        continue;
                    }
                    out[(i, j)] = out[(i, j)].add(&self[(i, k)].mul(&rhs[(k, j)]));
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &RatFunc) -> Self {
        RatFuncMat { r: self.r, data: self.data.iter().map(|a| a.mul(c)).collect() }
    }

    pub fn map(&self, f: impl Fn(&RatFunc) -> RatFunc) -> Self {
        RatFuncMat { r: self.r, data: self.data.iter().map(f).collect() }
    }

    pub fn derivative(&self) -> Self {
        self.map(|e| e.derivative())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }

    /// Exact inverse over the rational-function field.
    pub fn inverse(&self) -> Result<Self> {
        let r = self.r;
        let mut a = self.clone();
        let mut inv = Self::identity(r);
        for col in 0..r {
            let piv = (col..r)
                .find(|&i| !a[(i, col)].is_zero())
                .ok_or_else(|| Error::Invalid("singular rational-function matrix".into()))?;
            if piv != col {
                for j in 0..r {
                    a.data.swap(col * r + j, piv * r + j);
                    inv.data.swap(col * r + j, piv * r + j);
                }
            }
            let d = a[(col, col)].inv()?;
            for j in 0..r {
                a[(col, j)] = a[(col, j)].mul(&d);
                inv[(col, j)] = inv[(col, j)].mul(&d);
            }
            for i in 0..r {
                if i == col || a[(i, col)].is_zero() {
                    continue;
                }
                let f = a[(i, col)].clone();
                for j in 0..r {
                    let t = a[(col, j)].mul(&f);
                    a[(i, j)] = a[(i, j)].sub(&t);
                    let t = inv[(col, j)].mul(&f);
                    inv[(i, j)] = inv[(i, j)].sub(&t);
                }
            }
        }
        Ok(inv)
    }

    /// Exact evaluation at a rational point; errors at a pole.
    pub fn eval(&self, z: &Rat) -> Result<RatMat> {
        let r = self.r;
        let mut out = RatMat::zero(r);
        for i in 0..r {
            for j in 0..r {
                out[(i, j)] = self[(i, j)].eval(z)?;
            }
        }
        Ok(out)
    }

    /// Minimum order of vanishing at `z` over the entries, ignoring zero
    /// entries; `None` when the whole matrix is zero.
    pub fn order_at(&self, z: &Rat) -> Option<i64> {
        self.data.iter().filter_map(|e| e.order_at(z)).min()
    }

    /// Monic least common denominator of the entries.
    pub fn common_denominator(&self) -> RatPoly {
        let mut den = RatPoly::one();
        for e in &self.data {
            let g = den.gcd(e.den());
            den = den.mul(&e.den().div_exact(&g));
        }
        den.monic()
    }
}

impl std::ops::Index<(usize, usize)> for RatFuncMat {
    type Output = RatFunc;
    fn index(&self, (i, j): (usize, usize)) -> &RatFunc {
        &self.data[i * self.r + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatFuncMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut RatFunc {
        &mut self.data[i * self.r + j]
    }
}

// ----------------------------------------------------------------- ZpMat

/// `r x r` matrix of truncated p-adic scalars.
#[derive(Clone, Debug)]
pub struct ZpMat {
    r: usize,
    data: Vec<PadicApprox>,
}

impl ZpMat {
    pub fn zero(ctx: &Arc<ZpCtx>, r: usize) -> Self {
        ZpMat { r, data: vec![PadicApprox::zero(ctx); r * r] }
    }

    pub fn identity(ctx: &Arc<ZpCtx>, r: usize) -> Self {
        let mut m = Self::zero(ctx, r);
        for i in 0..r {
            m[(i, i)] = PadicApprox::one(ctx);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn ctx(&self) -> &Arc<ZpCtx> {
        self.data[0].ctx()
    }

    pub fn from_rational_matrix(ctx: &Arc<ZpCtx>, m: &RatMat) -> Result<Self> {
        let r = m.dim();
        let mut out = Self::zero(ctx, r);
        for i in 0..r {
            for j in 0..r {
                out[(i, j)] = PadicApprox::from_rational(ctx, &m[(i, j)])?;
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        ZpMat {
            r: self.r,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        ZpMat {
            r: self.r,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        let r = self.r;
        let mut out = Self::zero(self.ctx(), r);
        for i in 0..r {
            for k in 0..r {
                if self[(i, k)].is_zero_mantissa() {
                    continue;
                }
                for j in 0..r {
                    out[(i, j)] = out[(i, j)].add(&self[(i, k)].mul(&rhs[(k, j)]));
                }
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        ZpMat { r: self.r, data: self.data.iter().map(|c| c.neg()).collect() }
    }

    pub fn trace(&self) -> PadicApprox {
        let mut t = PadicApprox::zero(self.ctx());
        for i in 0..self.r {
            t = t.add(&self[(i, i)]);
        }
        t
    }

    /// Determinant by Laplace expansion (dimensions are tiny).
    pub fn det(&self) -> PadicApprox {
        let r = self.r;
        if r == 1 {
            return self[(0, 0)].clone();
        }
        if r == 2 {
            return self[(0, 0)].mul(&self[(1, 1)]).sub(&self[(0, 1)].mul(&self[(1, 0)]));
        }
        let mut acc = PadicApprox::zero(self.ctx());
        for j in 0..r {
            if self[(0, j)].is_zero_mantissa() {
                continue;
            }
            let minor = self.minor(0, j);
            let term = self[(0, j)].mul(&minor.det());
            acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }

    fn minor(&self, row: usize, col: usize) -> ZpMat {
        let r = self.r;
        let mut out = ZpMat::zero(self.ctx(), r - 1);
        let mut ii = 0;
        for i in 0..r {
            if i == row {
                continue;
            }
            let mut jj = 0;
            for j in 0..r {
                if j == col {
                    continue;
                }
                out[(ii, jj)] = self[(i, j)].clone();
                jj += 1;
            }
            ii += 1;
        }
        out
    }

    /// Adjugate matrix (`adj(A) A = det(A) I`), by cofactor expansion.
    pub fn adjugate(&self) -> Self {
        let r = self.r;
        let ctx = self.ctx().clone();
        if r == 1 {
            return Self::identity(&ctx, 1);
        }
        let mut out = Self::zero(&ctx, r);
        for i in 0..r {
            for j in 0..r {
                let c = self.minor(i, j).det();
                out[(j, i)] = if (i + j) % 2 == 0 { c } else { c.neg() };
            }
        }
        out
    }

    /// Valuation of the inverse, via the adjugate: `v_p(A^-1) =
    /// v_p(adj A) - v_p(det A)`.  Works when the inverse itself is not
    /// representable integrally.
    pub fn inverse_valuation(&self) -> Result<Valuation> {
        let det = self.det();
        let vd = match det.val() {
            Valuation::Finite(v) => v,
            other => {
                return Err(Error::Precision {
                    msg: format!("determinant valuation {other} is not finite"),
                    needed: self.ctx().mw() + 1,
                })
            }
        };
        Ok(match self.adjugate().min_val() {
            Valuation::Finite(v) => Valuation::Finite(v - vd),
            Valuation::AtLeast(v) => Valuation::AtLeast(v - vd),
            Valuation::Infinite => Valuation::Infinite,
        })
    }

    /// Inverse modulo `p^Mw`; requires the reduction mod p to be invertible.
    pub fn inverse(&self) -> Result<Self> {
        let r = self.r;
        let ctx = self.ctx().clone();
        let mut a = self.clone();
        let mut inv = Self::identity(&ctx, r);
        for col in 0..r {
            let piv = (col..r)
                .find(|&i| a[(i, col)].val() == Valuation::Finite(0))
                .ok_or_else(|| Error::Precision {
                    msg: "matrix is singular modulo p".into(),
                    needed: ctx.mw() + 1,
                })?;
            if piv != col {
                for j in 0..r {
                    a.data.swap(col * r + j, piv * r + j);
                    inv.data.swap(col * r + j, piv * r + j);
                }
            }
            let d = a[(col, col)].unit_inv()?;
            for j in 0..r {
                a[(col, j)] = a[(col, j)].mul(&d);
                inv[(col, j)] = inv[(col, j)].mul(&d);
            }
            for i in 0..r {
                if i == col || a[(i, col)].is_zero_mantissa() {
                    continue;
                }
                let f = a[(i, col)].clone();
                for j in 0..r {
                    let t = a[(col, j)].mul(&f);
                    a[(i, j)] = a[(i, j)].sub(&t);
                    let t = inv[(col, j)].mul(&f);
                    inv[(i, j)] = inv[(i, j)].sub(&t);
                }
            }
        }
        Ok(inv)
    }

    pub fn min_val(&self) -> Valuation {
        let mut out = Valuation::AtLeast(self.ctx().mw() as i64);
        for c in &self.data {
            out = out.min(c.val());
        }
        out
    }

    pub fn min_acc(&self) -> u32 {
        self.data.iter().map(|c| c.acc()).min().unwrap_or_else(|| self.ctx().mw())
    }
}

impl std::ops::Index<(usize, usize)> for ZpMat {
    type Output = PadicApprox;
    fn index(&self, (i, j): (usize, usize)) -> &PadicApprox {
        &self.data[i * self.r + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ZpMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut PadicApprox {
        &mut self.data[i * self.r + j]
    }
}

// -------------------------------------------------------------- SeriesMat

/// `r x r` matrix of truncated power series with uniform `(p, Mw, K)`.
#[derive(Clone, Debug)]
pub struct SeriesMat {
    r: usize,
    data: Vec<TruncSeries>,
}

impl SeriesMat {
    pub fn zero(ctx: &Arc<ZpCtx>, r: usize, k: usize) -> Self {
        SeriesMat { r, data: vec![TruncSeries::zero(ctx, k); r * r] }
    }

    pub fn identity(ctx: &Arc<ZpCtx>, r: usize, k: usize) -> Self {
        let mut m = Self::zero(ctx, r, k);
        for i in 0..r {
            m[(i, i)] = TruncSeries::one(ctx, k);
        }
        m
    }

    /// Entrywise truncated expansion of a rational-function matrix at 0.
    pub fn from_ratfunc_matrix(ctx: &Arc<ZpCtx>, m: &RatFuncMat, k: usize) -> Result<Self> {
        let r = m.dim();
        let mut out = Self::zero(ctx, r, k);
        for i in 0..r {
            for j in 0..r {
                out[(i, j)] = TruncSeries::from_ratfunc(ctx, &m[(i, j)], k)?;
            }
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn ctx(&self) -> &Arc<ZpCtx> {
        self.data[0].ctx()
    }

    pub fn trunc_order(&self) -> usize {
        self.data[0].trunc_order()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        SeriesMat {
            r: self.r,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        SeriesMat {
            r: self.r,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.r, rhs.r);
        let r = self.r;
        let k = self.trunc_order();
        let mut out = Self::zero(self.ctx(), r, k);
        for i in 0..r {
            for kk in 0..r {
                for j in 0..r {
                    out[(i, j)] = out[(i, j)].add(&self[(i, kk)].mul(&rhs[(kk, j)]));
                }
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(&TruncSeries) -> TruncSeries) -> Self {
        SeriesMat { r: self.r, data: self.data.iter().map(f).collect() }
    }

    pub fn derivative(&self) -> Self {
        self.map(|s| s.derivative())
    }

    pub fn frobenius_substitute(&self) -> Self {
        self.map(|s| s.frobenius_substitute())
    }

    /// The coefficient matrix of `t^i`.
    pub fn coeff_matrix(&self, i: usize) -> ZpMat {
        let mut out = ZpMat::zero(self.ctx(), self.r);
        for a in 0..self.r {
            for b in 0..self.r {
                out[(a, b)] = self[(a, b)].coeff(i).clone();
            }
        }
        out
    }

    pub fn set_coeff_matrix(&mut self, i: usize, m: &ZpMat) {
        for a in 0..self.r {
            for b in 0..self.r {
                let c = m[(a, b)].clone();
                self[(a, b)].set_coeff(i, c);
            }
        }
    }

    /// Inverse, solved coefficient by coefficient; the constant-term
    /// matrix must be invertible modulo p.
    pub fn inverse(&self) -> Result<Self> {
        let r = self.r;
        let k = self.trunc_order();
        let a0inv = self.coeff_matrix(0).inverse()?;
        let mut out = Self::zero(self.ctx(), r, k);
        let coeffs: Vec<ZpMat> = (0..k).map(|i| self.coeff_matrix(i)).collect();
        let mut xs: Vec<ZpMat> = Vec::with_capacity(k);
        xs.push(a0inv.clone());
        for n in 1..k {
            let mut acc = ZpMat::zero(self.ctx(), r);
            for j in 1..=n {
                acc = acc.add(&coeffs[j].mul(&xs[n - j]));
            }
            xs.push(a0inv.mul(&acc).neg());
        }
        for (i, x) in xs.iter().enumerate() {
            out.set_coeff_matrix(i, x);
        }
        Ok(out)
    }

    /// Determinant (via permutation expansion on the 2x2 case and Laplace
    /// in general; sizes are tiny).
    pub fn det(&self) -> TruncSeries {
        let k = self.trunc_order();
        match self.r {
            1 => self[(0, 0)].clone(),
            2 => self[(0, 0)].mul(&self[(1, 1)]).sub(&self[(0, 1)].mul(&self[(1, 0)])),
            _ => {
                let mut acc = TruncSeries::zero(self.ctx(), k);
                for j in 0..self.r {
                    let minor = self.minor(0, j);
                    let term = self[(0, j)].mul(&minor.det());
                    acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
                }
                acc
            }
        }
    }

    fn minor(&self, row: usize, col: usize) -> SeriesMat {
        let r = self.r;
        let k = self.trunc_order();
        let mut out = SeriesMat::zero(self.ctx(), r - 1, k);
        let mut ii = 0;
        for i in 0..r {
            if i == row {
                continue;
            }
            let mut jj = 0;
            for j in 0..r {
                if j == col {
                    continue;
                }
                out[(ii, jj)] = self[(i, j)].clone();
                jj += 1;
            }
            ii += 1;
        }
        out
    }

    pub fn min_val(&self) -> Valuation {
        let mut out = Valuation::AtLeast(self.ctx().mw() as i64);
        for s in &self.data {
            out = out.min(s.min_val());
        }
        out
    }

    pub fn min_acc(&self) -> u32 {
        self.data.iter().map(|s| s.min_acc()).min().unwrap_or_else(|| self.ctx().mw())
    }

    pub fn with_acc_floor(&self, acc: u32) -> Self {
        self.map(|s| s.with_acc_floor(acc))
    }

    pub fn eval_rational(&self, z: &Rat) -> Result<ZpMat> {
        let mut out = ZpMat::zero(self.ctx(), self.r);
        for i in 0..self.r {
            for j in 0..self.r {
                out[(i, j)] = self[(i, j)].eval_rational(z)?;
            }
        }
        Ok(out)
    }
}

impl std::ops::Index<(usize, usize)> for SeriesMat {
    type Output = TruncSeries;
    fn index(&self, (i, j): (usize, usize)) -> &TruncSeries {
        &self.data[i * self.r + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SeriesMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut TruncSeries {
        &mut self.data[i * self.r + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{rat, rat_i64};

    #[test]
    fn rational_inverse_and_charpoly() {
        let m = RatMat::from_rows(vec![
            vec![rat_i64(1), rat_i64(2)],
            vec![rat_i64(3), rat_i64(4)],
        ]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RatMat::identity(2));
        // char poly x^2 - 5x - 2
        let cp = m.char_poly();
        assert_eq!(cp.coeff(0), rat_i64(-2));
        assert_eq!(cp.coeff(1), rat_i64(-5));
        assert_eq!(cp.coeff(2), rat_i64(1));
        assert!(RatMat::zero(2).inverse().is_err());
    }

    #[test]
    fn min_valuation_over_entries() {
        let m = RatMat::from_rows(vec![
            vec![rat(1, 5), rat_i64(1)],
            vec![rat_i64(5), rat_i64(25)],
        ]);
        assert_eq!(m.min_val_p(5), Valuation::Finite(-1));
    }

    #[test]
    fn kernel_of_nilpotent() {
        let m = RatMat::from_rows(vec![
            vec![rat_i64(0), rat_i64(1)],
            vec![rat_i64(0), rat_i64(0)],
        ]);
        let k = m.kernel_basis();
        assert_eq!(k, vec![vec![rat_i64(1), rat_i64(0)]]);
    }

    #[test]
    fn series_matrix_inverse() {
        let ctx = ZpCtx::new(3, 5).unwrap();
        let k = 8;
        let mut m = SeriesMat::identity(&ctx, 2, k);
        // I + t * [[0,1],[1,0]]
        let mut t01 = TruncSeries::zero(&ctx, k);
        t01.set_coeff(1, PadicApprox::one(&ctx));
        m[(0, 1)] = t01.clone();
        m[(1, 0)] = t01;
        let inv = m.inverse().unwrap();
        let prod = m.mul(&inv);
        let id = SeriesMat::identity(&ctx, 2, k);
        assert!(prod.sub(&id).min_val().ge(5));
        // identity inverts to identity
        let id_inv = id.inverse().unwrap();
        assert!(id_inv.sub(&id).min_val().ge(5));
    }
}
