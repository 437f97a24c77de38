//! Python module `twopatch`: growth rates of two coupled patches in
//! switching environments.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use twopatch::analytic;
use twopatch::applications::{self, HoltParams, SwitchingMode, Verdict};
use twopatch::matrix;
use twopatch::pdmp::{self, InvariantDensity};
use twopatch::switched;
use twopatch::GrowthReport;

fn py_err(e: twopatch::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

fn report<'py>(py: Python<'py>, r: &GrowthReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("method", format!("{:?}", r.method))?;
    d.set_item("stderr", r.stderr)?;
    d.set_item("horizon", r.horizon)?;
    d.set_item("samples", r.samples)?;
    d.set_item("seed", r.seed)?;
    Ok(d)
}

/// Δ(ε, m, T) in closed form.
#[pyfunction]
fn delta_closed(epsilon: f64, m: f64, t: f64) -> PyResult<f64> {
    analytic::delta_closed(epsilon, m, t).map_err(py_err)
}

/// Δ from the spectral radius of the period map.
#[pyfunction]
fn delta_spectral(epsilon: f64, m: f64, t: f64) -> PyResult<f64> {
    Ok(matrix::delta_spectral(epsilon, m, t).map_err(py_err)?.value)
}

/// Δ by Gauss–Legendre quadrature along the periodic orbit.
#[pyfunction]
#[pyo3(signature = (epsilon, m, t, n_nodes = 64))]
fn delta_quadrature(epsilon: f64, m: f64, t: f64, n_nodes: usize) -> PyResult<f64> {
    Ok(switched::delta_quadrature(epsilon, m, t, n_nodes)
        .map_err(py_err)?
        .value)
}

/// Growth rate under Markov switching with mean sojourn `t`, from the
/// invariant density.
#[pyfunction]
fn delta_pdmp(epsilon: f64, m: f64, t: f64) -> PyResult<f64> {
    Ok(pdmp::delta_pdmp_quadrature(epsilon, m, t).map_err(py_err)?.value)
}

#[pyfunction]
fn v_star(m: f64) -> PyResult<f64> {
    analytic::v_star(m).map_err(py_err)
}

#[pyfunction]
fn p_plus(m: f64, t: f64) -> PyResult<f64> {
    analytic::p_plus(m, t).map_err(py_err)
}

#[pyfunction]
fn critical_migration(epsilon: f64) -> PyResult<f64> {
    analytic::critical_migration(epsilon).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (epsilon, m, t_max = analytic::DEFAULT_T_MAX))]
fn threshold_t_star(epsilon: f64, m: f64, t_max: f64) -> PyResult<f64> {
    analytic::threshold_t_star(epsilon, m, t_max).map_err(py_err)
}

/// Smallest migration rate giving inflation at half-period `t`.
#[pyfunction]
fn threshold_m_star(py: Python<'_>, epsilon: f64, t: f64) -> PyResult<Bound<'_, PyDict>> {
    let r = analytic::threshold_m_star(epsilon, t).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("m_star", r.m_star)?;
    d.set_item("asymptote", r.asymptote)?;
    d.set_item("log_slope", r.log_slope)?;
    Ok(d)
}

/// Extremes of the periodic V-orbit.
#[pyfunction]
fn periodic_orbit(py: Python<'_>, m: f64, t: f64) -> PyResult<Bound<'_, PyDict>> {
    let o = switched::periodic_orbit(m, t).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("p_plus", o.p_plus)?;
    d.set_item("p_minus", o.p_minus)?;
    d.set_item("iterations", o.iterations)?;
    Ok(d)
}

/// Period map e^{TM⁻}e^{TM⁺} as nested lists.
#[pyfunction]
fn period_map(epsilon: f64, m: f64, t: f64) -> PyResult<[[f64; 2]; 2]> {
    let a = matrix::period_map(epsilon, m, t).map_err(py_err)?.matrix;
    Ok([[a.a11, a.a12], [a.a21, a.a22]])
}

/// Monte-Carlo growth rate under Markov switching at `rate`.
#[pyfunction]
#[pyo3(signature = (epsilon, m, rate, horizon, seed = 0))]
fn simulate_pdmp(
    py: Python<'_>,
    epsilon: f64,
    m: f64,
    rate: f64,
    horizon: f64,
    seed: u64,
) -> PyResult<Bound<'_, PyDict>> {
    let (_, r) = py
        .detach(|| pdmp::simulate_pdmp(epsilon, m, rate, horizon, seed))
        .map_err(py_err)?;
    report(py, &r)
}

/// Monte-Carlo growth rate with uniform sojourns on [t − eta, t + eta].
#[pyfunction]
#[pyo3(signature = (epsilon, m, t, eta, horizon, seed = 0))]
fn simulate_sape(
    py: Python<'_>,
    epsilon: f64,
    m: f64,
    t: f64,
    eta: f64,
    horizon: f64,
    seed: u64,
) -> PyResult<Bound<'_, PyDict>> {
    let r = py
        .detach(|| pdmp::simulate_sape(epsilon, m, t, eta, horizon, seed))
        .map_err(py_err)?;
    report(py, &r)
}

/// Invariant density ρ(v) under Markov switching, evaluated at `vs`.
#[pyfunction]
fn invariant_density(m: f64, t: f64, vs: Vec<f64>) -> PyResult<Vec<f64>> {
    let d = InvariantDensity::new(m, t).map_err(py_err)?;
    Ok(vs.into_iter().map(|v| d.rho(v)).collect())
}

/// "persistent" or "extinct" from the sign of the growth rate at 0.
#[pyfunction]
#[pyo3(signature = (epsilon, m, t, markov = false))]
fn predict_persistence(epsilon: f64, m: f64, t: f64, markov: bool) -> PyResult<(&'static str, f64)> {
    let mode = if markov {
        SwitchingMode::Markov
    } else {
        SwitchingMode::Periodic
    };
    let p = applications::predict_persistence(epsilon, m, t, mode).map_err(py_err)?;
    let v = match p.verdict {
        Verdict::Persistent => "persistent",
        Verdict::Extinct => "extinct",
        Verdict::Inconclusive => "inconclusive",
    };
    Ok((v, p.delta))
}

/// Linearized per-day growth of the default two-patch SIR model.
#[pyfunction]
fn sir_linearized_growth(m: f64) -> PyResult<f64> {
    applications::sir_linearized_growth(&HoltParams::default(), m).map_err(py_err)
}

/// Total cumulative cases of the default SIR model for each m.
#[pyfunction]
#[pyo3(signature = (ms, horizon = 1500.0, dt = 0.05))]
fn sir_cumulative_cases(py: Python<'_>, ms: Vec<f64>, horizon: f64, dt: f64) -> PyResult<Vec<f64>> {
    let out = py
        .detach(|| applications::cumulative_cases_sweep(&HoltParams::default(), &ms, horizon, dt))
        .map_err(py_err)?;
    Ok(out.into_iter().map(|(_, total)| total).collect())
}

#[pymodule]
#[pyo3(name = "twopatch")]
fn twopatch_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(delta_closed, m)?)?;
    m.add_function(wrap_pyfunction!(delta_spectral, m)?)?;
    m.add_function(wrap_pyfunction!(delta_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(delta_pdmp, m)?)?;
    m.add_function(wrap_pyfunction!(v_star, m)?)?;
    m.add_function(wrap_pyfunction!(p_plus, m)?)?;
    m.add_function(wrap_pyfunction!(critical_migration, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_t_star, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_m_star, m)?)?;
    m.add_function(wrap_pyfunction!(periodic_orbit, m)?)?;
    m.add_function(wrap_pyfunction!(period_map, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_pdmp, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_sape, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_density, m)?)?;
    m.add_function(wrap_pyfunction!(predict_persistence, m)?)?;
    m.add_function(wrap_pyfunction!(sir_linearized_growth, m)?)?;
    m.add_function(wrap_pyfunction!(sir_cumulative_cases, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
