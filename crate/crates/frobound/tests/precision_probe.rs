//! Regression probe for the solver loss budget: a run at the standard
//! working precision must agree with a high-precision reference to the
//! claimed accuracy floor.

mod common;

use common::shared_run;
use frobound::arith::val_p_bigint;
use num_traits::Zero;

#[test]
fn loss_stays_within_budget() {
    let p = 3u64;
    let m_target = 6u32;
    let k = 243usize;
    let lo = shared_run(p, m_target, k, 0);
    let hi = shared_run(p, m_target, k, 12);
    let mut worst = lo.mw as i64;
    for i in 0..2 {
        for j in 0..2 {
            for d in 0..k {
                let a = lo.phi[(i, j)].coeff(d).mantissa_mod(lo.mw);
                let b = hi.phi[(i, j)].coeff(d).mantissa_mod(lo.mw);
                let diff = if a >= b { &a - &b } else { &b - &a };
                if !diff.is_zero() {
                    worst = worst.min(val_p_bigint(&num_bigint::BigInt::from(diff), p) as i64);
                }
            }
        }
    }
    // agreement down to the accuracy floor of the low run
    assert!(
        worst >= lo.acc as i64,
        "true accuracy {worst} below the claimed floor {}",
        lo.acc
    );
}
