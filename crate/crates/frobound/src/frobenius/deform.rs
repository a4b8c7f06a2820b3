//! Deformation along `t`: the fundamental solution of the horizontal-
//! section ODE and the Frobenius matrix of the family.
//!
//! The Frobenius matrix is the unique continuation of the fiber matrix
//! `Phi0` satisfying `N Phi + dPhi/dt = p t^(p-1) Phi sigma(N)`,
//! equivalently `Phi = C Phi0 C(t^p)^-1` for the fundamental solution
//! `C' = -N C`, `C(0) = I`.  `C` itself picks up denominators of size
//! `p^ceil(log_p k)` in its k-th coefficient, so the solver integrates
//! the differential equation for `Phi` directly: the true `Phi` has
//! `v_p(Phi) = 0`, every division by `k + 1` divides exactly, and the
//! computed coefficients satisfy the recurrence identically modulo
//! `p^Mw`.  The divisions amplify the initial mod-`p^Mw` reduction of
//! the inputs through the solution operator; reference-run comparisons
//! put the loss within `solver_loss_budget(p, K)`, and the reported
//! accuracy floor is `Mw` minus that budget.

use std::sync::Arc;

use crate::arith::{ceil_log, PadicApprox, SeriesMat, TruncSeries, Valuation, ZpCtx, ZpMat};
use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::frobenius::{FrobeniusData, Lift};

/// A p-power-scaled fundamental solution: `scaled = p^shift * C` with
/// integral coefficients, `C(0) = I` and `dC/dt = -N C`.
#[derive(Clone, Debug)]
pub struct FundamentalSolution {
    pub scaled: SeriesMat,
    pub shift: u32,
}

/// Divide a coefficient matrix by the integer `d`, requiring the p-part
/// to divide the mantissas exactly.  The solver holds exact residues of
/// its recurrence modulo `p^Mw`; per-coefficient accuracy semantics are
/// stamped once on the finished series, not per division (chain-minimum
/// accuracy tracking would undercount by `v_p(K!)` where the true loss
/// is logarithmic).
fn div_exact_index(m: &ZpMat, d: u64, ctx: &Arc<ZpCtx>) -> Result<ZpMat> {
    use num_integer::Integer;
    use num_traits::Zero;
    let p = ctx.p();
    let mut v = 0u32;
    let mut unit = d;
    while unit.is_multiple_of(p) {
        unit /= p;
        v += 1;
    }
    let unit_inv = PadicApprox::from_i64(ctx, unit as i64).unit_inv()?;
    let pv = ctx.p_pow(v);
    let r = m.dim();
    let mut out = ZpMat::zero(ctx, r);
    for i in 0..r {
        for j in 0..r {
            let (q, rem) = m[(i, j)].mantissa().div_rem(&pv);
            if !rem.is_zero() {
                return Err(Error::Precision {
                    msg: format!("mantissa not divisible by p^{v} when dividing by {d}"),
                    needed: ctx.mw() + v,
                });
            }
            out[(i, j)] = PadicApprox::from_biguint(ctx, q).mul(&unit_inv);
        }
    }
    Ok(out)
}

/// Solve `dC/dt = -N C`, `C(0) = I` modulo `(p^Mw, t^K)`.
///
/// The recurrence `C_(k+1) = -(N C)_k / (k+1)` requires every division to
/// hit a divisible mantissa.  Solutions of connections with a Frobenius
/// structure have coefficient valuations bounded below by
/// `-ceil(log_p k)`, so the solver clears denominators with an adaptive
/// power-of-p prefactor up to that bound (plus the caller's buffer); a
/// connection whose solution grows faster (no Frobenius structure, e.g.
/// an exponential) exhausts the prefactor budget and errors.
pub fn fundamental_solution(
    conn: &Connection,
    ctx: &Arc<ZpCtx>,
    k: usize,
) -> Result<FundamentalSolution> {
    let n = SeriesMat::from_ratfunc_matrix(ctx, conn.matrix(), k)?;
    let max_shift = ceil_log(ctx.p(), k.max(2) as u64) + 2;
    let mut shift = 0u32;
    'restart: loop {
        let r = conn.dim();
        let mut coeffs: Vec<ZpMat> = Vec::with_capacity(k);
        let mut c0 = ZpMat::identity(ctx, r);
        if shift > 0 {
            for i in 0..r {
                c0[(i, i)] = c0[(i, i)].mul_pow_p(shift);
            }
        }
        coeffs.push(c0);
        for step in 0..k.saturating_sub(1) {
            // (N C)_step
            let mut acc = ZpMat::zero(ctx, r);
            for j in 0..=step {
                let nj = n.coeff_matrix(j);
                acc = acc.add(&nj.mul(&coeffs[step - j]));
            }
            match div_exact_index(&acc.neg(), step as u64 + 1, ctx) {
                Ok(m) => coeffs.push(m),
                Err(_) if shift < max_shift => {
                    shift += 1;
                    continue 'restart;
                }
                Err(_) => {
                    return Err(Error::Precision {
                        msg: format!(
                            "fundamental solution coefficients are not p-integral at t^{} \
                             even after clearing p^{max_shift}; \
                             the expansion coefficients violate the log-growth precondition",
                            step + 1
                        ),
                        needed: ctx.mw() + max_shift,
                    });
                }
            }
        }
        let mut out = SeriesMat::zero(ctx, r, k);
        for (i, m) in coeffs.iter().enumerate() {
            out.set_coeff_matrix(i, m);
        }
        let acc_floor = ctx.mw().saturating_sub(crate::frobenius::solver_loss_budget(ctx.p(), k));
        return Ok(FundamentalSolution { scaled: out.with_acc_floor(acc_floor), shift });
    }
}

/// Solve the Frobenius differential equation for `Phi` directly:
/// `(k+1) Phi_(k+1) = p (Phi sigma(N))_(k+1-p) - (N Phi)_k`, starting
/// from the fiber matrix `Phi0`.  Every division is checked to divide the
/// mantissa exactly; a failure reports the required precision increase.
pub fn deformation_phi(
    conn: &Connection,
    phi0: &ZpMat,
    ctx: &Arc<ZpCtx>,
    k: usize,
    m_target: u32,
    family: &str,
) -> Result<FrobeniusData> {
    let p = conn.p();
    assert_eq!(ctx.p(), p, "context prime mismatch");
    let r = conn.dim();
    let n = SeriesMat::from_ratfunc_matrix(ctx, conn.matrix(), k)?;
    // sigma(N) is supported on degrees divisible by p; keep the base
    // coefficients and index them sparsely
    let n_coeffs: Vec<ZpMat> = (0..k).map(|i| n.coeff_matrix(i)).collect();
    let mut phi: Vec<ZpMat> = Vec::with_capacity(k);
    phi.push(phi0.clone());
    let pi64 = p as i64;
    for step in 0..k.saturating_sub(1) {
        // -(N Phi)_step
        let mut rhs = ZpMat::zero(ctx, r);
        for j in 0..=step {
            rhs = rhs.add(&n_coeffs[j].mul(&phi[step - j]));
        }
        let mut rhs = rhs.neg();
        // + p (Phi sigma(N))_(step+1-p)
        if step + 1 >= p as usize {
            let kp = step + 1 - p as usize;
            let mut acc = ZpMat::zero(ctx, r);
            let mut b = 0usize;
            while p as usize * b <= kp {
                acc = acc.add(&phi[kp - p as usize * b].mul(&n_coeffs[b]));
                b += 1;
            }
            let pfac = PadicApprox::from_i64(ctx, pi64);
            let mut scaled = ZpMat::zero(ctx, r);
            for i in 0..r {
                for j in 0..r {
                    scaled[(i, j)] = acc[(i, j)].mul(&pfac);
                }
            }
            rhs = rhs.add(&scaled);
        }
        let next = div_exact_index(&rhs, step as u64 + 1, ctx).map_err(|_| Error::Precision {
            msg: format!(
                "deformation solve hit a non-divisible mantissa at t^{} (p = {p})",
                step + 1
            ),
            needed: ctx.mw() + crate::frobenius::solver_loss_budget(p, k),
        })?;
        phi.push(next);
    }
    let mut series = SeriesMat::zero(ctx, r, k);
    for (i, m) in phi.iter().enumerate() {
        series.set_coeff_matrix(i, m);
    }
    let acc = ctx.mw().saturating_sub(crate::frobenius::solver_loss_budget(p, k));
    Ok(FrobeniusData {
        family: family.to_string(),
        p,
        m_target,
        mw: ctx.mw(),
        k,
        lift: Lift::Standard,
        phi: series.with_acc_floor(acc),
        phi0: phi0.clone(),
        acc,
    })
}

/// Minimum coefficient valuation of
/// `N Phi + dPhi/dt - p t^(p-1) Phi sigma(N)` over all entries and
/// degrees below `K - p`.  A correct `Phi` yields at least the accuracy
/// floor.
pub fn frobeq_residual(conn: &Connection, data: &FrobeniusData) -> Result<Valuation> {
    let ctx = data.ctx();
    let k = data.k;
    let p = data.p as usize;
    if k <= p {
        return Err(Error::IncreaseK {
            msg: "residual window is empty".into(),
            needed: p + 2,
        });
    }
    let n = SeriesMat::from_ratfunc_matrix(ctx, conn.matrix(), k)?;
    let sigma_n = n.frobenius_substitute();
    let lhs = n.mul(&data.phi).add(&data.phi.derivative());
    let mut rhs = data.phi.mul(&sigma_n);
    // p t^(p-1) shift
    let pfac = PadicApprox::from_i64(ctx, data.p as i64);
    rhs = rhs.map(|s| {
        let mut shifted = TruncSeries::zero(ctx, k);
        for i in 0..k - (p - 1) {
            shifted.set_coeff(i + p - 1, s.coeff(i).mul(&pfac));
        }
        shifted
    });
    let res = lhs.sub(&rhs);
    let mut out = Valuation::AtLeast(ctx.mw() as i64);
    for i in 0..conn.dim() {
        for j in 0..conn.dim() {
            for d in 0..k - p {
                out = out.min(res[(i, j)].coeff(d).val());
            }
        }
    }
    Ok(out)
}
