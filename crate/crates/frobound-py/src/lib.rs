//! Python bindings: the connection/bound calculus and the deformation
//! pipeline, exposed as plain functions returning dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use frobound::arith::{rat_i64, Rat, ZpCtx};
use frobound::bounds::{alpha1 as alpha1_impl, g_of_m, order_bound};
use frobound::connection::Connection;
use frobound::error::Error;
use frobound::frobenius::{
    deformation_phi, elliptic_example_fiber, fiber::trace_of_frobenius, frobeq_residual,
    kedlaya_fiber_matrix, working_precision, FiberCurve,
};
use frobound::reconstruct::{measured_order_at, MeasureParams};

fn err(e: Error) -> PyErr {
    match e {
        Error::Unsupported(_) | Error::Invalid(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_rat(s: &str) -> PyResult<Rat> {
    frobound::cli::parse_rational(s).map_err(err)
}

fn family(name: &str, p: u64) -> PyResult<Connection> {
    if name == "elliptic-example" {
        Connection::elliptic_example(p).map_err(err)
    } else {
        let text = std::fs::read_to_string(name)
            .map_err(|e| PyValueError::new_err(format!("{name}: {e}")))?;
        frobound::connection::parse_connection(&text).map_err(err)
    }
}

/// Exponents and hypothesis validation at every finite singular point.
#[pyfunction]
#[pyo3(signature = (p, family_id = "elliptic-example"))]
fn exponents<'py>(py: Python<'py>, p: u64, family_id: &str) -> PyResult<Bound<'py, PyList>> {
    let conn = family(family_id, p)?;
    let out = PyList::empty(py);
    for z in conn.finite_singular_points() {
        let d = PyDict::new(py);
        d.set_item("z", z.to_string())?;
        let exps = conn.exponents(&z).map_err(err)?;
        d.set_item("exponents", exps.iter().map(|e| e.to_string()).collect::<Vec<_>>())?;
        let rep = conn.validate_theorem_hypotheses(&z);
        d.set_item("hypotheses_pass", rep.all_pass())?;
        out.append(d)?;
    }
    Ok(out)
}

/// Bound table rows `(z, m, alpha1, g, alpha2, bound, variant)` for the
/// given family.
#[pyfunction]
#[pyo3(signature = (p, m_max, family_id = "elliptic-example", v_phi = 0, v_phi_inv = -1))]
fn bounds<'py>(
    py: Python<'py>,
    p: u64,
    m_max: u32,
    family_id: &str,
    v_phi: i64,
    v_phi_inv: i64,
) -> PyResult<Bound<'py, PyList>> {
    let conn = family(family_id, p)?;
    let v_n = match conn.v_on_v(conn.matrix(), 32).map_err(err)? {
        frobound::arith::Valuation::Finite(v) => v,
        _ => return Err(PyValueError::new_err("v_p(N) is not finite")),
    };
    let out = PyList::empty(py);
    for z in conn.finite_singular_points() {
        let profile = frobound::bounds::BoundProfile::for_connection(&conn, &z, v_n, v_phi, v_phi_inv)
            .map_err(err)?;
        for m in 1..=m_max {
            let row = order_bound(m, &profile).map_err(err)?;
            let d = PyDict::new(py);
            d.set_item("z", z.to_string())?;
            d.set_item("m", m)?;
            d.set_item("alpha1", row.alpha1)?;
            d.set_item("g", row.g)?;
            d.set_item("alpha2", row.alpha2)?;
            d.set_item("bound", row.order_bound)?;
            d.set_item("variant", frobound::reconstruct::variant_label(&row))?;
            out.append(d)?;
        }
    }
    Ok(out)
}

/// `g(m)` for the built-in family's profile.
#[pyfunction]
fn g_value(p: u64, m: u32) -> PyResult<u64> {
    let conn = Connection::elliptic_example(p).map_err(err)?;
    let profile =
        frobound::bounds::elliptic_example_profile(&conn, &rat_i64(2)).map_err(err)?;
    Ok(g_of_m(m, &profile).0)
}

/// `alpha1` for a list of exponents given as strings.
#[pyfunction]
fn alpha1(exponents: Vec<String>, p: u64) -> PyResult<i64> {
    let exps: Vec<Rat> =
        exponents.iter().map(|s| parse_rat(s)).collect::<PyResult<_>>()?;
    if exps.is_empty() {
        return Err(PyValueError::new_err("exponent list is empty"));
    }
    Ok(alpha1_impl(&exps, p))
}

/// Fiber Frobenius matrix of the built-in family at integer `tau`:
/// returns `(a_p, entries, v_phi0, v_phi0_inv)` with mantissas as
/// decimal strings.
#[pyfunction]
#[pyo3(signature = (p, m = 6, tau = 0))]
fn fiber<'py>(py: Python<'py>, p: u64, m: u32, tau: i64) -> PyResult<Bound<'py, PyDict>> {
    let ctx = ZpCtx::new(p, m).map_err(err)?;
    let q = elliptic_example_fiber(&rat_i64(tau)).map_err(err)?;
    let curve = FiberCurve::new(q, p, m).map_err(err)?;
    let phi0 = kedlaya_fiber_matrix(&curve, &ctx).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("p", p)?;
    d.set_item("tau", tau)?;
    d.set_item("a_p", trace_of_frobenius(&phi0).map_err(err)?)?;
    let entries: Vec<Vec<String>> = (0..2)
        .map(|i| (0..2).map(|j| phi0[(i, j)].mantissa().to_string()).collect())
        .collect();
    d.set_item("entries", entries)?;
    d.set_item("v_phi0", phi0.min_val().to_string())?;
    d.set_item("v_phi0_inv", phi0.inverse_valuation().map_err(err)?.to_string())?;
    Ok(d)
}

/// Run the deformation for the built-in family and measure pole orders:
/// returns rows `(z, m, measured_order, bound, sharp)`.
#[pyfunction]
#[pyo3(signature = (p, m_target, k, m_max = 0, window = 24))]
fn deform_and_measure<'py>(
    py: Python<'py>,
    p: u64,
    m_target: u32,
    k: usize,
    m_max: u32,
    window: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let m_max = if m_max == 0 { m_target } else { m_max };
    let conn = Connection::elliptic_example(p).map_err(err)?;
    let mw = working_precision(p, m_target, k, 5);
    let ctx = ZpCtx::new(p, mw).map_err(err)?;
    let q = elliptic_example_fiber(&rat_i64(0)).map_err(err)?;
    let curve = FiberCurve::new(q, p, m_target).map_err(err)?;
    let phi0 = kedlaya_fiber_matrix(&curve, &ctx).map_err(err)?;
    let data =
        deformation_phi(&conn, &phi0, &ctx, k, m_target, "elliptic-example").map_err(err)?;
    let residual = frobeq_residual(&conn, &data).map_err(err)?;
    let profiles: Vec<(Rat, frobound::bounds::BoundProfile)> = conn
        .finite_singular_points()
        .into_iter()
        .map(|z| {
            let pr = frobound::bounds::elliptic_example_profile(&conn, &z).map_err(err)?;
            Ok((z, pr))
        })
        .collect::<PyResult<_>>()?;
    let params = MeasureParams { window, d_max: None };
    let rows = PyList::empty(py);
    for (z, profile) in &profiles {
        for m in 1..=m_max {
            let row = order_bound(m, profile).map_err(err)?;
            let got = measured_order_at(&data, &conn, &profiles, z, m, &params)
                .map_err(err)?
                .floor();
            let d = PyDict::new(py);
            d.set_item("z", z.to_string())?;
            d.set_item("m", m)?;
            d.set_item("measured_order", got)?;
            d.set_item("bound", row.order_bound)?;
            d.set_item("sharp", got == row.order_bound)?;
            rows.append(d)?;
        }
    }
    let out = PyDict::new(py);
    out.set_item("p", p)?;
    out.set_item("mw", mw)?;
    out.set_item("acc", data.acc)?;
    out.set_item("residual_valuation", residual.to_string())?;
    out.set_item("rows", rows)?;
    Ok(out)
}

#[pymodule]
fn frobound_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(exponents, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(g_value, m)?)?;
    m.add_function(wrap_pyfunction!(alpha1, m)?)?;
    m.add_function(wrap_pyfunction!(fiber, m)?)?;
    m.add_function(wrap_pyfunction!(deform_and_measure, m)?)?;
    Ok(())
}
