//! Construction of the Frobenius matrix: initial fiber matrix on one
//! elliptic fiber, deformation along `t` via the horizontal-section ODE,
//! residual checking, and change of Frobenius lift.

pub mod cache;
pub mod deform;
pub mod fiber;
pub mod lift;

use std::fmt;
use std::sync::Arc;

use crate::arith::{ceil_log, Rat, RatPoly, SeriesMat, ZpCtx, ZpMat};
use crate::error::{Error, Result};

pub use deform::{deformation_phi, frobeq_residual, fundamental_solution, FundamentalSolution};
pub use fiber::{kedlaya_fiber_matrix, FiberCurve};
pub use lift::{change_frobenius_lift, delta_valuation_check, local_lift_phi_check};

/// A Frobenius lift, described by its action on the coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Lift {
    /// `t -> t^p`.
    Standard,
    /// `t -> (t - z)^p + z` (uses `sigma(z) = z` over Q_p).
    Centered(Rat),
}

impl Lift {
    /// The image polynomial `sigma(t)`.
    pub fn sigma_t(&self, p: u64) -> RatPoly {
        match self {
            Lift::Standard => RatPoly::monomial(Rat::from_integer(1.into()), p as usize),
            Lift::Centered(z) => {
                RatPoly::linear_root(z).pow(p as u32).add(&RatPoly::constant(z.clone()))
            }
        }
    }
}

impl fmt::Display for Lift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lift::Standard => write!(f, "standard"),
            Lift::Centered(z) => write!(f, "centered:{z}"),
        }
    }
}

/// Accuracy lost by the deformation solve at truncation `k`: the
/// divisions by `i + 1` amplify input reductions through the solution
/// operator, whose norm grows like two factors of `p^ceil(log_p K)`.
/// Measured against high-precision reference runs the loss is
/// `2 ceil(log_p K)` plus one digit; budget one more.
pub fn solver_loss_budget(p: u64, k: usize) -> u32 {
    2 * ceil_log(p, k.max(2) as u64) + 2
}

/// Working precision for a target congruence exponent `m` and truncation
/// `k`: `Mw = M + loss_budget + B`, so the accuracy floor is `M + B`.
pub fn working_precision(p: u64, m_target: u32, k: usize, buffer: u32) -> u32 {
    m_target + solver_loss_budget(p, k) + buffer
}

/// The computed Frobenius matrix of a family, `Phi(t) mod (p^Mw, t^K)`,
/// together with its fiber initial condition and accuracy floor.
#[derive(Clone, Debug)]
pub struct FrobeniusData {
    pub family: String,
    pub p: u64,
    /// Target congruence exponent the run was sized for.
    pub m_target: u32,
    /// Working modulus exponent.
    pub mw: u32,
    pub k: usize,
    pub lift: Lift,
    pub phi: SeriesMat,
    pub phi0: ZpMat,
    /// Guaranteed accuracy of the series coefficients:
    /// `Mw - solver_loss_budget(p, K)`.
    pub acc: u32,
}

impl FrobeniusData {
    pub fn ctx(&self) -> &Arc<ZpCtx> {
        self.phi.ctx()
    }
}

/// The fiber cubic of the built-in family at a rational parameter value:
/// `x^3 + 1 + (tau+1)(x^2 + x)`.
pub fn elliptic_example_fiber(tau: &Rat) -> Result<RatPoly> {
    let c = tau + Rat::from_integer(1.into());
    if !num_traits::One::is_one(c.denom()) {
        return Err(Error::Unsupported(format!(
            "fiber parameter {tau} does not give integer coefficients"
        )));
    }
    Ok(RatPoly::new(vec![
        Rat::from_integer(1.into()),
        c.clone(),
        c,
        Rat::from_integer(1.into()),
    ]))
}
