//! Connections on the projective line: singular loci, residue matrices,
//! exponents, hypothesis validation, shearing transformations, and the
//! matrices of the divided-power differential operators.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{
    ceil_log, rational_val_p, Rat, RatFunc, RatFuncMat, RatMat, RatPoly, TruncSeries, Valuation,
    ZpCtx,
};
use crate::error::{Error, Result};

/// A point of the singular locus `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SingularPoint {
    Finite(Rat),
    Infinity,
}

impl fmt::Display for SingularPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularPoint::Finite(z) => write!(f, "{z}"),
            SingularPoint::Infinity => write!(f, "inf"),
        }
    }
}

/// A connection `d + N dt` on the projective line in a fixed basis:
/// `nabla v_j = sum_i N_ij v_i (x) dt`.
#[derive(Clone, Debug)]
pub struct Connection {
    p: u64,
    r: usize,
    n: RatFuncMat,
    singular: Vec<SingularPoint>,
}

/// Exact residue data of a connection at a finite singular point.
#[derive(Clone, Debug)]
pub struct ResidueData {
    pub z: Rat,
    pub residue: RatMat,
    pub exponents: Vec<Rat>,
    /// Canonical diagonalizer `S` with `S^-1 R S` diagonal, when the
    /// residue is diagonalizable over Q.  Columns are primitive integer
    /// eigenvectors in eigenvalue order.
    pub diagonalizer: Option<RatMat>,
}

/// Per-hypothesis validation outcome at `z`.  Reports, does not throw.
#[derive(Clone, Debug, serde::Serialize)]
pub struct HypothesisReport {
    pub z: String,
    pub has_pole: bool,
    pub simple_pole: bool,
    pub exponents_rational: bool,
    pub exponents_p_integral: bool,
    pub distinct_residue_discs: bool,
    pub z_p_integral: bool,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.simple_pole
            && self.exponents_rational
            && self.exponents_p_integral
            && self.distinct_residue_discs
            && self.z_p_integral
    }
}

impl Connection {
    /// Build a connection from its matrix, deriving the singular locus.
    /// Only rational singular points are supported.
    pub fn new(p: u64, n: RatFuncMat) -> Result<Self> {
        if !crate::arith::is_prime_u64(p) {
            return Err(Error::Unsupported(format!("p = {p} is not prime")));
        }
        let r = n.dim();
        let den = n.common_denominator();
        let (roots, rest) = den.rational_roots();
        if rest.degree().unwrap_or(0) > 0 {
            return Err(Error::Unsupported(format!(
                "singular locus contains irrational points (denominator factor {rest})"
            )));
        }
        let mut singular: Vec<SingularPoint> =
            roots.into_iter().map(|(z, _)| SingularPoint::Finite(z)).collect();
        singular.sort_by(|a, b| match (a, b) {
            (SingularPoint::Finite(x), SingularPoint::Finite(y)) => x.cmp(y),
            _ => std::cmp::Ordering::Equal,
        });
        // N dt has a pole at infinity iff some entry of -N(1/s)/s^2 does at
        // s = 0, iff some entry of N has order < 2 at infinity.
        let pole_at_inf =
            n.entries().iter().filter_map(|e| e.order_at_infinity()).any(|o| o < 2);
        if pole_at_inf {
            singular.push(SingularPoint::Infinity);
        }
        Ok(Connection { p, r, n, singular })
    }

    /// The built-in elliptic-curve family
    /// `y^2 = x^3 + 1 + (t+1)(x^2+x)` in the basis `[dx/y, x dx/y]`:
    /// `N = (1/(t^2-4)) [[-t/2-1/2, t/2+3/2], [-1/2, t/2+1/2]]`.
    pub fn elliptic_example(p: u64) -> Result<Self> {
        let den = RatPoly::new(vec![crate::arith::rat_i64(-4), Rat::zero(), Rat::one()]);
        let e = |coeffs: &[(i64, i64)]| {
            RatFunc::new(
                RatPoly::new(coeffs.iter().map(|&(n, d)| crate::arith::rat(n, d)).collect()),
                den.clone(),
            )
        };
        let n = RatFuncMat::from_rows(vec![
            vec![e(&[(-1, 2), (-1, 2)]), e(&[(3, 2), (1, 2)])],
            vec![e(&[(-1, 2)]), e(&[(1, 2), (1, 2)])],
        ]);
        Connection::new(p, n)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn matrix(&self) -> &RatFuncMat {
        &self.n
    }

    pub fn singular_points(&self) -> &[SingularPoint] {
        &self.singular
    }

    pub fn finite_singular_points(&self) -> Vec<Rat> {
        self.singular
            .iter()
            .filter_map(|s| match s {
                SingularPoint::Finite(z) => Some(z.clone()),
                SingularPoint::Infinity => None,
            })
            .collect()
    }

    pub fn is_singular(&self, z: &Rat) -> bool {
        self.singular.iter().any(|s| matches!(s, SingularPoint::Finite(w) if w == z))
    }

    /// `(t-z) N` evaluated at `z`; errors on a pole of order >= 2.
    pub fn residue_matrix(&self, z: &Rat) -> Result<RatMat> {
        let lin = RatFunc::from_poly(RatPoly::linear_root(z));
        let scaled = self.n.scale(&lin);
        scaled.eval(z).map_err(|_| {
            Error::Unsupported(format!("connection has a pole of order >= 2 at t = {z}"))
        })
    }

    /// Exponents at `z`: the eigenvalue multiset of the residue matrix,
    /// which must split over Q.
    pub fn exponents(&self, z: &Rat) -> Result<Vec<Rat>> {
        let res = self.residue_matrix(z)?;
        eigenvalues_rational(&res)
    }

    /// Residue, exponents and canonical diagonalizer at `z`.
    pub fn residue_data(&self, z: &Rat) -> Result<ResidueData> {
        let residue = self.residue_matrix(z)?;
        let exponents = eigenvalues_rational(&residue)?;
        let diagonalizer = diagonalizer(&residue, &exponents);
        Ok(ResidueData { z: z.clone(), residue, exponents, diagonalizer })
    }

    /// Check the hypotheses needed by the bound calculus at `z`: simple
    /// pole, rational p-integral exponents, distinct residue discs,
    /// p-integral `z`.
    pub fn validate_theorem_hypotheses(&self, z: &Rat) -> HypothesisReport {
        let p = self.p;
        let mut notes = Vec::new();
        let has_pole = self.n.entries().iter().any(|e| e.has_pole_at(z));
        let simple = self.residue_matrix(z).is_ok();
        if !has_pole {
            notes.push("no pole at z".into());
        }
        let (rational, integral) = match self.exponents(z) {
            Ok(exps) => {
                let ok = exps.iter().all(|l| rational_val_p(l, p).ge(0));
                if !ok {
                    notes.push(format!(
                        "exponents {} are not p-integral",
                        exps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
                    ));
                }
                (true, ok)
            }
            Err(e) => {
                notes.push(format!("exponents not computable over Q: {e}"));
                (false, false)
            }
        };
        let mut discs = true;
        for s in &self.singular {
            match s {
                SingularPoint::Finite(w) if w != z => {
                    let d = z - w;
                    if !matches!(rational_val_p(&d, p), Valuation::Finite(0)) {
                        discs = false;
                        notes.push(format!("v_p(z - ({w})) != 0: same residue disc"));
                    }
                }
                SingularPoint::Infinity
                    // distinct from the disc at infinity iff |z| <= 1
                    if !rational_val_p(z, p).ge(0) => {
                        discs = false;
                        notes.push("|z| > 1: z reduces into the disc at infinity".into());
                    }
                _ => {}
            }
        }
        let z_int = rational_val_p(z, p).ge(0);
        if !z_int {
            notes.push("z is not p-integral".into());
        }
        HypothesisReport {
            z: z.to_string(),
            has_pole,
            simple_pole: simple,
            exponents_rational: rational,
            exponents_p_integral: integral,
            distinct_residue_discs: discs,
            z_p_integral: z_int,
            notes,
        }
    }

    /// Shearing transformation at `z` for integer exponents: returns
    /// `(W, N')` with `N' = W^-1 N W + W^-1 dW/dt` having all exponents 0
    /// at `z`, and `(t-z)^b W`, `(t-z)^-a W^-1` pole-free at `z` for
    /// `a = min` and `b = max` exponent.
    pub fn shearing_transform(&self, z: &Rat) -> Result<(RatFuncMat, RatFuncMat)> {
        let exps = self.exponents(z)?;
        for l in &exps {
            if !l.denom().is_one() {
                return Err(Error::Unsupported(format!(
                    "shearing requires integer exponents, found {l}"
                )));
            }
        }
        let r = self.r;
        let mut w = RatFuncMat::identity(r);
        let mut n = self.n.clone();
        let lin = RatFunc::from_poly(RatPoly::linear_root(z));
        let lin_inv = lin.inv().expect("t - z is nonzero");
        loop {
            let res = residue_of(&n, z)?;
            let eigs = eigenvalues_rational(&res)?;
            let Some(target) = eigs
                .iter()
                .filter(|l| !l.is_zero())
                .max_by(|a, b| a.abs().cmp(&b.abs()))
                .cloned()
            else {
                return Ok((w, n));
            };
            // multiplying the generalized eigenspace directions by
            // (t-z)^{-1} lowers the eigenvalue by 1, by (t-z) raises it
            let down = target.is_positive();
            let s = generalized_eigenbasis(&res, &eigs, &target)?;
            let s_rf = RatFuncMat::from_scalar_matrix(&s);
            let k = generalized_multiplicity(&res, &target);
            let mut d = RatFuncMat::identity(r);
            for i in 0..k {
                d[(i, i)] = if down { lin_inv.clone() } else { lin.clone() };
            }
            let step = s_rf.mul(&d);
            let step_inv = step.inverse()?;
            n = step_inv.mul(&n.mul(&step)).add(&step_inv.mul(&step.derivative()));
            w = w.mul(&step);
        }
    }

    /// The matrices `Delta^(i)` of `D^i / i!` for `i = 0..=i_max`, as
    /// reduced rational-function matrices.
    pub fn delta_matrices(&self, i_max: usize) -> Result<Vec<RatFuncMat>> {
        let gen = DeltaSeq::new(self)?;
        Ok(gen.take(i_max + 1))
    }

    /// Estimate of `v_p` under the sup norm on `V`, probed on the residue
    /// discs at 0 and at infinity.  Poles of `f` must lie in the singular
    /// locus, at points of p-adic valuation 0 (then both probed discs are
    /// free of poles away from their own centre).
    pub fn v_on_v(&self, f: &RatFuncMat, k_probe: usize) -> Result<Valuation> {
        let p = self.p;
        for e in f.entries() {
            let (roots, rest) = e.den().rational_roots();
            if rest.degree().unwrap_or(0) > 0 {
                return Err(Error::Unsupported(
                    "matrix has poles at irrational points; sup-norm probe unsupported".into(),
                ));
            }
            for (z, _) in roots {
                if !self.is_singular(&z) {
                    return Err(Error::Unsupported(format!(
                        "pole at t = {z} off the singular locus"
                    )));
                }
                if !matches!(rational_val_p(&z, p), Valuation::Finite(0)) {
                    return Err(Error::Unsupported(format!(
                        "pole at t = {z} with v_p(z) != 0; probe discs are not pole-free"
                    )));
                }
            }
        }
        let mut out = Valuation::Infinite;
        for e in f.entries() {
            out = out.min(probe_val_at_zero(e, p, k_probe)?);
            out = out.min(probe_val_at_infinity(e, p, k_probe)?);
        }
        Ok(out)
    }
}

/// Residue of an arbitrary rational-function matrix at `z`.
fn residue_of(n: &RatFuncMat, z: &Rat) -> Result<RatMat> {
    let lin = RatFunc::from_poly(RatPoly::linear_root(z));
    n.scale(&lin)
        .eval(z)
        .map_err(|_| Error::Unsupported(format!("pole of order >= 2 at t = {z}")))
}

/// Eigenvalues of an exact rational matrix, which must split over Q:
/// rational-root extraction on the characteristic polynomial, plus the
/// exact discriminant for a leftover quadratic factor.
pub fn eigenvalues_rational(m: &RatMat) -> Result<Vec<Rat>> {
    let cp = m.char_poly();
    let (roots, mut rest) = cp.rational_roots();
    let mut eigs: Vec<Rat> = Vec::new();
    for (z, k) in roots {
        for _ in 0..k {
            eigs.push(z.clone());
        }
    }
    if rest.degree() == Some(2) {
        let a = rest.coeff(2);
        let b = rest.coeff(1);
        let c = rest.coeff(0);
        let disc = &b * &b - Rat::from_integer(BigInt::from(4)) * &a * &c;
        if let Some(s) = rat_sqrt(&disc) {
            let two_a = Rat::from_integer(BigInt::from(2)) * &a;
            eigs.push((-&b + &s) / &two_a);
            eigs.push((-&b - &s) / &two_a);
            rest = RatPoly::one();
        }
    }
    if rest.degree().unwrap_or(0) > 0 {
        return Err(Error::Unsupported(format!(
            "characteristic polynomial does not split over Q (factor {rest})"
        )));
    }
    eigs.sort();
    Ok(eigs)
}

/// Exact square root of a nonnegative rational, if it is a perfect square.
fn rat_sqrt(q: &Rat) -> Option<Rat> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// Canonical diagonalizer: primitive integer eigenvector columns in
/// sorted eigenvalue order; `None` when some eigenspace is deficient.
fn diagonalizer(m: &RatMat, eigenvalues: &[Rat]) -> Option<RatMat> {
    let r = m.dim();
    let mut distinct: Vec<(Rat, usize)> = Vec::new();
    for l in eigenvalues {
        match distinct.last_mut() {
            Some((v, k)) if v == l => *k += 1,
            _ => distinct.push((l.clone(), 1)),
        }
    }
    let mut cols: Vec<Vec<Rat>> = Vec::new();
    for (l, mult) in &distinct {
        let mut shifted = m.clone();
        for i in 0..r {
            shifted[(i, i)] -= l.clone();
        }
        let basis = shifted.kernel_basis();
        if basis.len() != *mult {
            return None;
        }
        cols.extend(basis);
    }
    let mut s = RatMat::zero(r);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..r {
            s[(i, j)] = col[i].clone();
        }
    }
    Some(s)
}

fn shift_power(m: &RatMat, l: &Rat) -> RatMat {
    let r = m.dim();
    let mut shifted = m.clone();
    for i in 0..r {
        shifted[(i, i)] -= l.clone();
    }
    let mut power = RatMat::identity(r);
    for _ in 0..r {
        power = power.mul(&shifted);
    }
    power
}

fn generalized_multiplicity(m: &RatMat, l: &Rat) -> usize {
    shift_power(m, l).kernel_basis().len()
}

/// Basis matrix whose first columns span the generalized eigenspace of
/// `target` and whose remaining columns span the sum of the other
/// generalized eigenspaces (both invariant subspaces).
fn generalized_eigenbasis(m: &RatMat, eigenvalues: &[Rat], target: &Rat) -> Result<RatMat> {
    let r = m.dim();
    let mut cols: Vec<Vec<Rat>> = shift_power(m, target).kernel_basis();
    let mut others: Vec<Rat> = Vec::new();
    for l in eigenvalues {
        if l != target && !others.contains(l) {
            others.push(l.clone());
        }
    }
    if !others.is_empty() {
        // the product over the other eigenvalues kills their generalized
        // eigenspaces, whose direct sum is the invariant complement
        let mut prod = RatMat::identity(r);
        for l in &others {
            prod = prod.mul(&shift_power(m, l));
        }
        cols.extend(prod.kernel_basis());
    }
    if cols.len() != r {
        return Err(Error::Internal("generalized eigenspaces do not sum to full space".into()));
    }
    let mut s = RatMat::zero(r);
    for (j, col) in cols.iter().enumerate() {
        for i in 0..r {
            s[(i, j)] = col[i].clone();
        }
    }
    Ok(s)
}

fn probe_val_at_zero(e: &RatFunc, p: u64, k_probe: usize) -> Result<Valuation> {
    if e.is_zero() {
        return Ok(Valuation::Infinite);
    }
    if e.den().root_multiplicity(&Rat::zero()) > 0 {
        return Err(Error::Unsupported("pole at the probe centre t = 0".into()));
    }
    laurent_min_val(e.num(), e.den(), p, k_probe)
}

fn probe_val_at_infinity(e: &RatFunc, p: u64, k_probe: usize) -> Result<Valuation> {
    if e.is_zero() {
        return Ok(Valuation::Infinite);
    }
    // t = 1/s: num(1/s)/den(1/s) = s^(dd-dn) num*(s)/den*(s), and the
    // s-power shift does not change coefficient valuations
    let nums = e.num().reversed();
    let dens = e.den().reversed();
    laurent_min_val(&nums, &dens, p, k_probe)
}

/// Minimum `v_p` over the first `k_probe` series coefficients of
/// `num/den` at 0.  The coefficients may carry bounded p-denominators;
/// these are cleared by a p-power shift and restored afterwards, so the
/// probe is exact down to the shifted floor.
fn laurent_min_val(num: &RatPoly, den: &RatPoly, p: u64, k_probe: usize) -> Result<Valuation> {
    let vnum = num.min_val_p(p).lower_bound().unwrap_or(0).min(0);
    let vden = den.min_val_p(p).lower_bound().unwrap_or(0).min(0);
    let shift = vnum - vden;
    let num1 = scale_p(num, p, -vnum);
    let den1 = scale_p(den, p, -vden);
    match rational_val_p(&den1.coeff(0), p) {
        Valuation::Finite(0) => {}
        _ => {
            return Err(Error::Unsupported(
                "probe denominator constant term is not a p-adic unit".into(),
            ))
        }
    }
    let guard = 24 + shift.unsigned_abs() as u32 + ceil_log(p, k_probe.max(2) as u64);
    let ctx = ZpCtx::new(p, guard)?;
    let f = RatFunc::new(num1, den1);
    let series = TruncSeries::from_ratfunc(&ctx, &f, k_probe)?;
    Ok(match series.min_val() {
        Valuation::Finite(x) => Valuation::Finite(x + shift),
        Valuation::AtLeast(x) => Valuation::AtLeast(x + shift),
        Valuation::Infinite => Valuation::Infinite,
    })
}

fn scale_p(poly: &RatPoly, p: u64, e: i64) -> RatPoly {
    if e == 0 {
        return poly.clone();
    }
    poly.scale(&Rat::from_integer(BigInt::from(p)).pow(e as i32))
}

/// Incremental generator of the `Delta^(i)`: keeps the polynomial matrix
/// `A_i` with `Delta^(i) = A_i / (e^i i!)`, where `e` is the reduced
/// common denominator of `N`.  The recurrence
/// `A_(i+1) = e A_i' - i e' A_i + N0 A_i` (with `N0 = e N`) is exact
/// rational linear algebra; cost grows quadratically in `i_max`.
pub struct DeltaSeq {
    e: RatPoly,
    e_prime: RatPoly,
    n0: Vec<RatPoly>,
    e_roots: Vec<Rat>,
    r: usize,
    i: usize,
    a: Vec<RatPoly>,
    factorial: BigInt,
}

impl DeltaSeq {
    pub fn new(conn: &Connection) -> Result<Self> {
        let r = conn.dim();
        let e = conn.n.common_denominator();
        let e_prime = e.derivative();
        let mut n0 = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                let entry = &conn.n[(i, j)];
                let cof = e.div_exact(entry.den());
                n0.push(entry.num().mul(&cof));
            }
        }
        let (roots, rest) = e.rational_roots();
        if rest.degree().unwrap_or(0) > 0 {
            return Err(Error::Unsupported("irrational singular points".into()));
        }
        let mut a = vec![RatPoly::zero(); r * r];
        for i in 0..r {
            a[i * r + i] = RatPoly::one();
        }
        Ok(DeltaSeq {
            e,
            e_prime,
            n0,
            e_roots: roots.into_iter().map(|(z, _)| z).collect(),
            r,
            i: 0,
            a,
            factorial: BigInt::one(),
        })
    }

    pub fn index(&self) -> usize {
        self.i
    }

    /// Advance from `A_i` to `A_(i+1)`.
    pub fn step(&mut self) {
        let r = self.r;
        let mut next = vec![RatPoly::zero(); r * r];
        for row in 0..r {
            for col in 0..r {
                let cur = &self.a[row * r + col];
                let mut v = cur.derivative().mul(&self.e);
                if self.i > 0 && !cur.is_zero() {
                    v = v.sub(
                        &self
                            .e_prime
                            .mul(cur)
                            .scale(&Rat::from_integer(BigInt::from(self.i as u64))),
                    );
                }
                for mid in 0..r {
                    v = v.add(&self.n0[row * r + mid].mul(&self.a[mid * r + col]));
                }
                next[row * r + col] = v;
            }
        }
        self.a = next;
        self.i += 1;
        self.factorial *= BigInt::from(self.i as u64);
    }

    /// The current `Delta^(i)` as a reduced rational-function matrix
    /// (reduction by trial division at the known denominator roots).
    pub fn current(&self) -> RatFuncMat {
        let r = self.r;
        let den_full = self.e.pow(self.i as u32);
        let fact = Rat::from_integer(self.factorial.clone());
        let mut out = RatFuncMat::zero(r);
        for row in 0..r {
            for col in 0..r {
                let mut num = self.a[row * r + col].clone();
                if num.is_zero() {
                    continue;
                }
                let mut den = den_full.clone();
                for z in &self.e_roots {
                    let lin = RatPoly::linear_root(z);
                    while den.degree().unwrap_or(0) > 0
                        && num.eval(z).is_zero()
                        && den.eval(z).is_zero()
                    {
                        num = num.div_exact(&lin);
                        den = den.div_exact(&lin);
                    }
                }
                out[(row, col)] = RatFunc::new(num.scale(&(Rat::one() / &fact)), den);
            }
        }
        out
    }

    /// Numerator matrix `A_i`, the denominator base `e` and `i!`, for
    /// callers that avoid the rational-function form.
    pub fn raw(&self) -> (&[RatPoly], &RatPoly, &BigInt) {
        (&self.a, &self.e, &self.factorial)
    }

    fn take(mut self, count: usize) -> Vec<RatFuncMat> {
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            if i > 0 {
                self.step();
            }
            out.push(self.current());
        }
        out
    }
}

/// Parse a connection from the text format: first line `r`, second line
/// `p`, then `r*r` entries row-major as `P(t)/Q(t)` with integer
/// coefficients.
pub fn parse_connection(text: &str) -> Result<Connection> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let r: usize = lines
        .next()
        .ok_or_else(|| Error::Invalid("missing dimension line".into()))?
        .parse()
        .map_err(|_| Error::Invalid("bad dimension".into()))?;
    let p: u64 = lines
        .next()
        .ok_or_else(|| Error::Invalid("missing prime line".into()))?
        .parse()
        .map_err(|_| Error::Invalid("bad prime".into()))?;
    let mut rows = Vec::with_capacity(r);
    for _ in 0..r {
        let mut row = Vec::with_capacity(r);
        for _ in 0..r {
            let entry = lines.next().ok_or_else(|| Error::Invalid("missing entries".into()))?;
            row.push(parse_ratfunc(entry)?);
        }
        rows.push(row);
    }
    Connection::new(p, RatFuncMat::from_rows(rows))
}

/// `P(t)/Q(t)` or a bare polynomial, integer coefficients.
pub fn parse_ratfunc(s: &str) -> Result<RatFunc> {
    let s = s.trim();
    let mut depth = 0i32;
    let mut split = None;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '/' if depth == 0 => {
                if split.is_some() {
                    return Err(Error::Invalid(format!("multiple '/' in entry '{s}'")));
                }
                split = Some(i);
            }
            _ => {}
        }
    }
    let (num, den) = match split {
        Some(i) => (parse_poly(&s[..i])?, parse_poly(&s[i + 1..])?),
        None => (parse_poly(s)?, RatPoly::one()),
    };
    if den.is_zero() {
        return Err(Error::Invalid(format!("zero denominator in '{s}'")));
    }
    Ok(RatFunc::new(num, den))
}

/// Integer-coefficient polynomial in `t`: terms like `3*t^2`, `-t`, `+7`.
fn parse_poly(s: &str) -> Result<RatPoly> {
    let mut s = s.trim();
    while s.starts_with('(') && s.ends_with(')') {
        let inner = &s[1..s.len() - 1];
        let mut depth = 0i32;
        let mut balanced = true;
        for c in inner.chars() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth < 0 {
                        balanced = false;
                        break;
                    }
                }
                _ => {}
            }
        }
        if balanced && depth == 0 {
            s = inner.trim();
        } else {
            break;
        }
    }
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Invalid("empty polynomial".into()));
    }
    let mut terms: Vec<(BigInt, usize)> = Vec::new();
    let bytes = compact.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let mut sign = BigInt::one();
        while i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            if bytes[i] == b'-' {
                sign = -sign;
            }
            i += 1;
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let coeff: BigInt = if start == i {
            BigInt::one()
        } else {
            compact[start..i].parse().map_err(|_| Error::Invalid("bad coefficient".into()))?
        };
        let had_digits = start != i;
        let mut exp = 0usize;
        if i < bytes.len() && bytes[i] == b'*' {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b't' {
            i += 1;
            exp = 1;
            if i < bytes.len() && bytes[i] == b'^' {
                i += 1;
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                exp = compact[start..i]
                    .parse()
                    .map_err(|_| Error::Invalid("bad exponent".into()))?;
            }
        } else if !had_digits {
            return Err(Error::Invalid(format!("cannot parse polynomial '{compact}'")));
        }
        terms.push((sign * coeff, exp));
    }
    let deg = terms.iter().map(|&(_, e)| e).max().unwrap_or(0);
    let mut coeffs = vec![Rat::zero(); deg + 1];
    for (c, e) in terms {
        coeffs[e] += Rat::from_integer(c);
    }
    Ok(RatPoly::new(coeffs))
}
