#![allow(dead_code)]

//! Shared oracles and fixtures for the integration suites.
//!
//! Everything here is independent of the implementation paths it checks:
//! point counts are brute force over F_p, and the bound-function oracles
//! are naive scans of the defining formulas.

use std::collections::BTreeMap;
use std::sync::{LazyLock, Mutex};

use frobound::arith::{rat_i64, Rat, RatPoly, ZpCtx};
use frobound::bounds::BoundProfile;
use frobound::connection::Connection;
use frobound::frobenius::{
    deformation_phi, elliptic_example_fiber, kedlaya_fiber_matrix, working_precision, FiberCurve,
    FrobeniusData,
};

/// Brute-force number of points of `y^2 = Q(x)` over F_p, affine plus
/// the point at infinity.
pub fn count_points(p: u64, q: &RatPoly) -> u64 {
    let mut n = 1;
    for x in 0..p {
        let mut val = 0i128;
        for c in q.coeffs().iter().rev() {
            let ci = i128::try_from(c.numer().clone()).expect("small coefficient");
            val = (val * x as i128 + ci).rem_euclid(p as i128);
        }
        if val == 0 {
            n += 1;
        } else if euler_is_square(val as u64 % p, p) {
            n += 2;
        }
    }
    n
}

fn euler_is_square(a: u64, p: u64) -> bool {
    let mut pow = 1u64;
    let mut base = a % p;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            pow = pow * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    pow == 1
}

/// `a_p` of a fiber by brute force.
pub fn brute_force_ap(p: u64, q: &RatPoly) -> i64 {
    p as i64 + 1 - count_points(p, q) as i64
}

/// Naive scan of the definition of `g(m)` for the built-in family's
/// profile, where `f(i) = -floor(log_p i)`.
pub fn naive_g(p: u64, m: u32, scan_to: u64) -> u64 {
    (0..=scan_to)
        .filter(|&i| {
            let f = if i == 0 {
                0
            } else {
                let mut l = 0i64;
                let mut q = i;
                while q >= p {
                    q /= p;
                    l += 1;
                }
                -l
            };
            (i as i64) + f < m as i64
        })
        .max()
        .expect("i = 0 always qualifies")
}

/// Naive scan of `f`, `c` and `g` for an arbitrary profile, straight
/// from the definitions.
pub fn naive_f(p: u64, r: usize, v_n: i64, v_phi_sum: i64, i: u64) -> i64 {
    if i == 0 {
        return 0.max((r as i64 - 1) * v_n);
    }
    let mut fl = 0i64;
    let mut q = i;
    while q >= p {
        q /= p;
        fl += 1;
    }
    let cl = if i == 1 {
        0
    } else {
        let mut l = 0i64;
        let mut q = i - 1;
        while q >= p {
            q /= p;
            l += 1;
        }
        l + 1
    };
    (v_phi_sum * cl).max((r as i64 - 1) * v_n + v_phi_sum * fl)
}

pub fn naive_c(p: u64, r: usize, v_n: i64, v_phi_sum: i64, scan_to: u64) -> i64 {
    if v_n >= 0 {
        return 0;
    }
    let mut best = 0i64;
    for i in 0..=scan_to {
        best = best.min(i as i64 + naive_f(p, r, v_n, v_phi_sum, i));
    }
    best
}

pub fn naive_g_general(
    p: u64,
    r: usize,
    v_n: i64,
    v_phi: i64,
    v_phi_inv: i64,
    m: u32,
    scan_to: u64,
) -> u64 {
    let c = naive_c(p, r, v_n, v_phi + v_phi_inv, scan_to);
    (0..=scan_to)
        .filter(|&i| i as i64 + v_phi + c + naive_f(p, r, v_n, v_phi + v_phi_inv, i) < m as i64)
        .max()
        .unwrap_or(0)
}

/// Deformation runs shared across the suite, keyed by `(p, M, K, buffer)`.
static RUNS: LazyLock<Mutex<BTreeMap<(u64, u32, usize, u32), &'static FrobeniusData>>> =
    LazyLock::new(|| Mutex::new(BTreeMap::new()));

pub fn shared_run(p: u64, m_target: u32, k: usize, buffer: u32) -> &'static FrobeniusData {
    let mut runs = RUNS.lock().expect("runs lock");
    if let Some(d) = runs.get(&(p, m_target, k, buffer)) {
        return d;
    }
    let conn = Connection::elliptic_example(p).expect("builtin family");
    let mw = working_precision(p, m_target, k, buffer);
    let ctx = ZpCtx::new(p, mw).expect("context");
    let fiber = elliptic_example_fiber(&rat_i64(0)).expect("fiber");
    let curve = FiberCurve::new(fiber, p, m_target).expect("curve");
    let phi0 = kedlaya_fiber_matrix(&curve, &ctx).expect("fiber matrix");
    let data = deformation_phi(&conn, &phi0, &ctx, k, m_target, "elliptic-example")
        .expect("deformation");
    let leaked: &'static FrobeniusData = Box::leak(Box::new(data));
    runs.insert((p, m_target, k, buffer), leaked);
    leaked
}

pub fn family(p: u64) -> Connection {
    Connection::elliptic_example(p).expect("builtin family")
}

pub fn family_profiles(conn: &Connection) -> Vec<(Rat, BoundProfile)> {
    conn.finite_singular_points()
        .into_iter()
        .map(|z| {
            let pr = frobound::bounds::elliptic_example_profile(conn, &z).expect("profile");
            (z, pr)
        })
        .collect()
}

/// One pass/fail line per acceptance criterion.
pub fn report(criterion: u32, ok: bool, desc: &str) {
    println!(
        "ACCEPTANCE {criterion:>2} {}: {desc}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance criterion {criterion} failed: {desc}");
}
