//! Exact arithmetic kernel: rationals, truncated p-adic scalars, truncated
//! power series, polynomials, rational functions, and matrices over each.

pub mod matrix;
pub mod padic;
pub mod poly;
pub mod ratfunc;
pub mod series;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

pub use matrix::{RatFuncMat, RatMat, SeriesMat, ZpMat};
pub use padic::{is_prime_u64, PadicApprox, ZpCtx};
pub use poly::RatPoly;
pub use ratfunc::RatFunc;
pub use series::TruncSeries;

/// Exact rational scalar; always stored in lowest terms with positive
/// denominator (enforced by the underlying representation).
pub type Rat = num_rational::BigRational;

pub fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// A p-adic valuation, possibly only known as a lower bound.
///
/// `AtLeast(b)` records that every probed digit below `b` vanished (used
/// for zero mantissas, empty minima and truncated probes).  `Infinite` is
/// the valuation of exact rational zero.  The ordering compares lower
/// bounds, which is unambiguous in this kernel because finite valuations
/// are always reported below the working precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Valuation {
    Finite(i64),
    AtLeast(i64),
    Infinite,
}

impl Valuation {
    pub fn lower_bound(&self) -> Option<i64> {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => Some(*v),
            Valuation::Infinite => None,
        }
    }

    pub fn ge(&self, bound: i64) -> bool {
        match self {
            Valuation::Finite(v) | Valuation::AtLeast(v) => *v >= bound,
            Valuation::Infinite => true,
        }
    }

    pub fn min(self, other: Valuation) -> Valuation {
        use Valuation::*;
        match (self, other) {
            (Infinite, x) | (x, Infinite) => x,
            (Finite(a), Finite(b)) => Finite(a.min(b)),
            (AtLeast(a), AtLeast(b)) => AtLeast(a.min(b)),
            (Finite(a), AtLeast(b)) | (AtLeast(b), Finite(a)) => {
                if a <= b {
                    Finite(a)
                } else {
                    AtLeast(b)
                }
            }
        }
    }
}

impl std::fmt::Display for Valuation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// `v_p` of a nonzero big integer.
pub fn val_p_bigint(n: &BigInt, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let p = BigInt::from(p);
    let mut v = 0u32;
    let mut m = n.abs();
    loop {
        let (q, r) = num_integer::Integer::div_rem(&m, &p);
        if !r.is_zero() {
            return v;
        }
        v += 1;
        m = q;
    }
}

/// Exact p-adic valuation of a rational (negative when p divides the
/// denominator); `Infinite` for zero.
pub fn rational_val_p(q: &Rat, p: u64) -> Valuation {
    if q.is_zero() {
        return Valuation::Infinite;
    }
    let vn = val_p_bigint(q.numer(), p) as i64;
    let vd = val_p_bigint(q.denom(), p) as i64;
    Valuation::Finite(vn - vd)
}

/// Floor of an exact rational.
pub fn rat_floor(q: &Rat) -> BigInt {
    num_integer::Integer::div_floor(q.numer(), q.denom())
}

/// `floor(log_p i)` for `i >= 1`, by digit counting.
pub fn floor_log(p: u64, i: u64) -> u32 {
    assert!(i >= 1 && p >= 2);
    let mut v = 0;
    let mut m = i;
    while m >= p {
        m /= p;
        v += 1;
    }
    v
}

/// `ceil(log_p i)` for `i >= 1`, by digit counting.
pub fn ceil_log(p: u64, i: u64) -> u32 {
    assert!(i >= 1 && p >= 2);
    if i == 1 {
        0
    } else {
        floor_log(p, i - 1) + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_valuation() {
        assert_eq!(rational_val_p(&rat(5, 4), 5), Valuation::Finite(1));
        assert_eq!(rational_val_p(&rat(1, 4), 2), Valuation::Finite(-2));
        assert_eq!(rational_val_p(&rat(-3, 8), 3), Valuation::Finite(1));
        assert_eq!(rational_val_p(&rat(0, 1), 7), Valuation::Infinite);
    }

    #[test]
    fn logs_by_digit_counting() {
        assert_eq!(floor_log(3, 1), 0);
        assert_eq!(floor_log(3, 2), 0);
        assert_eq!(floor_log(3, 3), 1);
        assert_eq!(floor_log(3, 26), 2);
        assert_eq!(floor_log(3, 27), 3);
        assert_eq!(ceil_log(3, 1), 0);
        assert_eq!(ceil_log(3, 3), 1);
        assert_eq!(ceil_log(3, 4), 2);
        assert_eq!(ceil_log(3, 9), 2);
        assert_eq!(ceil_log(3, 10), 3);
        assert_eq!(ceil_log(5, 5), 1);
    }

    #[test]
    fn valuation_ordering() {
        let f = Valuation::Finite(2);
        let a = Valuation::AtLeast(5);
        assert_eq!(f.min(a), f);
        assert_eq!(a.min(Valuation::Infinite), a);
        assert!(a.ge(3));
        assert!(!f.ge(3));
    }
}
