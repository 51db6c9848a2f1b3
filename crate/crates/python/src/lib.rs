//! Python bindings. Invalid input raises `ValueError`; a numerical procedure
//! that does not converge raises `ArithmeticError`.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use ::quantum_resolvent as qr;
use qr::antenna::{self, FarZonePhase, FockState, SMatrix4};
use qr::cylinder2d::{self, CylinderConfig, PolarPoint};
use qr::layer1d::{self, LayerConfig};
use qr::verify::{self, Tolerances, VerifyConfig};

fn py_err(e: qr::Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn point(p: (f64, f64)) -> PyResult<PolarPoint> {
    PolarPoint::new(p.0, p.1).map_err(py_err)
}

fn smatrix(r: Complex64, t1: Complex64, t2: Complex64, t3: Complex64) -> PyResult<SMatrix4> {
    antenna::make_smatrix(r, t1, t2, t3).map_err(py_err)
}

fn phase(name: &str) -> PyResult<FarZonePhase> {
    match name {
        "quarter" => Ok(FarZonePhase::Quarter),
        "half" => Ok(FarZonePhase::Half),
        other => Err(PyValueError::new_err(format!(
            "phase must be 'quarter' or 'half', got {other:?}"
        ))),
    }
}

/// Resolvent kernel Γ(x, x′) of the dielectric layer.
#[pyfunction]
fn layer_resolvent(epsilon: f64, length: f64, k: f64, x: f64, xp: f64) -> PyResult<Complex64> {
    let cfg = LayerConfig::new(epsilon, length, k).map_err(py_err)?;
    layer1d::layer_resolvent_kernel(&cfg, x, xp).map_err(py_err)
}

/// Complex poles as (n, k_n, residual) for n_min..=n_max.
#[pyfunction]
fn layer_poles(
    epsilon: f64,
    length: f64,
    n_min: i64,
    n_max: i64,
) -> PyResult<Vec<(i64, Complex64, f64)>> {
    let cfg = LayerConfig::new(epsilon, length, 1.0).map_err(py_err)?;
    let set = layer1d::layer_poles(&cfg, n_min, n_max).map_err(py_err)?;
    Ok(set.poles.iter().map(|p| (p.n, p.k, p.residual)).collect())
}

/// Damped noise integral of the layer as (value, reference, error_estimate).
#[pyfunction]
fn layer_noise_integral(
    epsilon: f64,
    length: f64,
    x: f64,
    xp: f64,
    cutoff: f64,
    eta: f64,
) -> PyResult<(Complex64, f64, f64)> {
    let cfg = LayerConfig::new(epsilon, length, 1.0).map_err(py_err)?;
    let v = layer1d::layer_noise_integral(&cfg, x, xp, cutoff, eta).map_err(py_err)?;
    Ok((v.value, v.reference, v.error_estimate))
}

/// Mode weight W_n of the cylinder.
#[pyfunction]
fn cylinder_wn(epsilon: f64, radius: f64, k: f64, n: i32) -> PyResult<Complex64> {
    let cfg = CylinderConfig::new(epsilon, radius, k, None).map_err(py_err)?;
    cylinder2d::wn(n, &cfg).map_err(py_err)
}

/// Resolvent kernel of the cylinder between two interior polar points (ρ, φ).
#[pyfunction]
#[pyo3(signature = (epsilon, radius, k, p, pp, modes=None))]
fn cylinder_resolvent(
    epsilon: f64,
    radius: f64,
    k: f64,
    p: (f64, f64),
    pp: (f64, f64),
    modes: Option<usize>,
) -> PyResult<Complex64> {
    let cfg = CylinderConfig::new(epsilon, radius, k, modes).map_err(py_err)?;
    cylinder2d::cylinder_resolvent(&point(p)?, &point(pp)?, &cfg).map_err(py_err)
}

/// Names of the scattering-matrix relations violated beyond `tol`.
#[pyfunction]
#[pyo3(signature = (r, t1, t2, t3, tol=antenna::UNITARITY_TOL))]
fn smatrix_violations(
    r: Complex64,
    t1: Complex64,
    t2: Complex64,
    t3: Complex64,
    tol: f64,
) -> Vec<String> {
    antenna::check_smatrix(r, t1, t2, t3).violations(tol)
}

/// Output state for a basis input over (x1, x2, y1, y2), as a list of
/// (occupation, amplitude).
#[pyfunction]
#[pyo3(signature = (r, t1, t2, t3, occupation, n_max=antenna::DEFAULT_N_MAX))]
fn transform_state(
    r: Complex64,
    t1: Complex64,
    t2: Complex64,
    t3: Complex64,
    occupation: Vec<usize>,
    n_max: usize,
) -> PyResult<Vec<(Vec<usize>, Complex64)>> {
    let s = smatrix(r, t1, t2, t3)?;
    let input = FockState::basis(&occupation, n_max).map_err(py_err)?;
    let out = antenna::transform_state(&s, &input).map_err(py_err)?;
    Ok(out.terms().collect())
}

/// Angular correlation patterns (theta, g1, g2) of the emission state
/// produced from a basis input.
#[pyfunction]
#[pyo3(signature = (r, t1, t2, t3, occupation, kd, beta=0.0, theta_points=antenna::DEFAULT_THETA_POINTS, phase_rule="quarter"))]
#[allow(clippy::too_many_arguments)]
fn angular_pattern(
    r: Complex64,
    t1: Complex64,
    t2: Complex64,
    t3: Complex64,
    occupation: Vec<usize>,
    kd: f64,
    beta: f64,
    theta_points: usize,
    phase_rule: &str,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let s = smatrix(r, t1, t2, t3)?;
    let input = FockState::basis(&occupation, antenna::DEFAULT_N_MAX).map_err(py_err)?;
    let state = antenna::transform_state(&s, &input).map_err(py_err)?;
    let thetas = antenna::theta_grid(theta_points);
    let p = antenna::angular_pattern(&state, &thetas, kd, beta, phase(phase_rule)?)
        .map_err(py_err)?;
    Ok((p.theta, p.g1, p.g2))
}

/// Runs the invariant suites and returns the report as JSON text.
#[pyfunction]
#[pyo3(signature = (tolerance=None))]
fn run_verify(tolerance: Option<f64>) -> PyResult<String> {
    let mut cfg = VerifyConfig::default();
    if let Some(t) = tolerance {
        cfg.tolerances = Tolerances::uniform(t);
    }
    verify::run_verify(&cfg).map(|r| r.to_json()).map_err(py_err)
}

#[pymodule]
fn quantum_resolvent(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(layer_resolvent, m)?)?;
    m.add_function(wrap_pyfunction!(layer_poles, m)?)?;
    m.add_function(wrap_pyfunction!(layer_noise_integral, m)?)?;
    m.add_function(wrap_pyfunction!(cylinder_wn, m)?)?;
    m.add_function(wrap_pyfunction!(cylinder_resolvent, m)?)?;
    m.add_function(wrap_pyfunction!(smatrix_violations, m)?)?;
    m.add_function(wrap_pyfunction!(transform_state, m)?)?;
    m.add_function(wrap_pyfunction!(angular_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}
