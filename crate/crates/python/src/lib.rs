//! Python bindings: moment generation, fitting, evaluation and assessment.
//!
//! Structured values cross the boundary as JSON strings in the same formats
//! the command-line tool reads and writes (moment files, fit reports,
//! certificates, error reports), so they can be passed back unchanged.

use momentfit::assess::{error_metrics, EvaluationGrid, DEFAULT_INTERIOR_MARGIN};
use momentfit::catalog::{Builtin, MomentRepr};
use momentfit::confit::{fit_localizing, fit_putinar, ConstrainedOptions};
use momentfit::l2fit::{fit_with, FitOptions, FitReport, ReferenceMeasure};
use momentfit::maxent::{maxent_fit, MaxentOptions};
use momentfit::moments::{perturb_relative, MomentFile};
use momentfit::{Basis, BoxDomain, Error, MomentBasis, MomentVector, SemialgebraicDomain};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::SolverFailed { .. }
        | Error::LineSearchFailure
        | Error::Diverged
        | Error::SingularMomentMatrix { .. }
        | Error::NotPositiveDefinite { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

fn bbox(bounds: Vec<(f64, f64)>) -> PyResult<BoxDomain> {
    BoxDomain::new(bounds).map_err(to_py)
}

fn moment_vector(moments_json: &str) -> PyResult<MomentVector> {
    let file: MomentFile = serde_json::from_str(moments_json).map_err(json_err)?;
    MomentVector::try_from(file).map_err(to_py)
}

fn report(report_json: &str) -> PyResult<FitReport> {
    serde_json::from_str(report_json).map_err(json_err)
}

/// Moment file (JSON) of a builtin density.
#[pyfunction]
#[pyo3(signature = (name, degree, basis = "monomial", nodes = 200))]
fn builtin_moments(name: &str, degree: usize, basis: &str, nodes: usize) -> PyResult<String> {
    let builtin: Builtin = parse(name)?;
    let repr: MomentRepr = parse(basis)?;
    let y = builtin.moments(degree, repr, None, nodes).map_err(to_py)?;
    serde_json::to_string(&MomentFile::from(y)).map_err(json_err)
}

/// Density of a builtin at the point `x`.
#[pyfunction]
fn builtin_truth(name: &str, x: Vec<f64>) -> PyResult<f64> {
    let builtin: Builtin = parse(name)?;
    if x.len() != builtin.dim() {
        return Err(to_py(Error::DimensionMismatch {
            expected: builtin.dim(),
            found: x.len(),
        }));
    }
    Ok(builtin.truth(&x))
}

/// Seeded uniform relative noise of the given amplitude on a moment file.
#[pyfunction]
fn perturb(moments_json: &str, amplitude: f64, seed: u64) -> PyResult<String> {
    let y = perturb_relative(&moment_vector(moments_json)?, amplitude, seed).map_err(to_py)?;
    serde_json::to_string(&MomentFile::from(y)).map_err(json_err)
}

/// Polynomial fit of a moment file against Lebesgue measure on `box`
/// (defaults to the frame of Legendre moments).
///
/// `method` is one of `l2`, `l2reg`, `localizing`, `putinar`. Returns the
/// fit report as JSON; Putinar fits return `(report, certificate)`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (moments_json, method, degree = None, r#box = None, basis = "legendre", eps = 0.0, domain_json = None))]
fn fit(
    py: Python<'_>,
    moments_json: &str,
    method: &str,
    degree: Option<usize>,
    r#box: Option<Vec<(f64, f64)>>,
    basis: &str,
    eps: f64,
    domain_json: Option<&str>,
) -> PyResult<Py<PyAny>> {
    let y = moment_vector(moments_json)?;
    let frame = match (r#box, y.basis()) {
        (Some(b), _) => bbox(b)?,
        (None, MomentBasis::Legendre(frame)) => frame.clone(),
        (None, MomentBasis::Monomial) => return Err(PyValueError::new_err("monomial moments need a box")),
    };
    let reference = ReferenceMeasure::lebesgue(frame.clone());
    let d = degree.unwrap_or(y.degree());
    let basis: Basis = parse(basis)?;
    let to_json = |r: &FitReport| serde_json::to_string(r).map_err(json_err);
    match method {
        "l2" | "l2reg" => {
            let eps = if method == "l2" { 0.0 } else { eps };
            let r = py
                .detach(|| {
                    fit_with(
                        &y,
                        &reference,
                        d,
                        &FitOptions {
                            basis,
                            eps,
                            fast_path: true,
                        },
                    )
                })
                .map_err(to_py)?;
            Ok(to_json(&r)?.into_pyobject(py)?.into_any().unbind())
        }
        "localizing" => {
            let r = py
                .detach(|| fit_localizing(&y, &reference, d, &ConstrainedOptions::default()))
                .map_err(to_py)?;
            Ok(to_json(&r)?.into_pyobject(py)?.into_any().unbind())
        }
        "putinar" => {
            let domain = match domain_json {
                Some(s) => serde_json::from_str::<SemialgebraicDomain>(s).map_err(json_err)?,
                None => SemialgebraicDomain::from_box(frame),
            };
            let (r, cert) = py
                .detach(|| fit_putinar(&y, &reference, d, &domain, &ConstrainedOptions::default()))
                .map_err(to_py)?;
            let cert = serde_json::to_string(&cert).map_err(json_err)?;
            Ok((to_json(&r)?, cert).into_pyobject(py)?.into_any().unbind())
        }
        other => Err(PyValueError::new_err(format!(
            "unknown method '{other}' (expected l2, l2reg, localizing or putinar)"
        ))),
    }
}

/// Maximum-entropy fit `exp(p)`; returns `(density, diagnostics)` as JSON.
#[pyfunction]
#[pyo3(signature = (moments_json, degree, r#box, tol = 1e-8, max_iter = 2000))]
fn maxent(
    py: Python<'_>,
    moments_json: &str,
    degree: usize,
    r#box: Vec<(f64, f64)>,
    tol: f64,
    max_iter: usize,
) -> PyResult<(String, String)> {
    let y = moment_vector(moments_json)?;
    let frame = bbox(r#box)?;
    let options = MaxentOptions {
        tol,
        max_iter,
        ..MaxentOptions::default()
    };
    let (density, diagnostics) = py.detach(|| maxent_fit(&y, degree, &frame, &options)).map_err(to_py)?;
    Ok((
        serde_json::to_string(&density).map_err(json_err)?,
        serde_json::to_string(&diagnostics).map_err(json_err)?,
    ))
}

/// Values of a fitted polynomial at the given points.
#[pyfunction]
fn evaluate(report_json: &str, points: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let r = report(report_json)?;
    let n = r.estimate.dim();
    points
        .iter()
        .map(|x| {
            if x.len() == n {
                Ok(r.estimate.eval(x))
            } else {
                Err(to_py(Error::DimensionMismatch {
                    expected: n,
                    found: x.len(),
                }))
            }
        })
        .collect()
}

/// Error report (JSON) of a polynomial fit against a builtin truth on a
/// uniform grid over the fit's frame.
#[pyfunction]
#[pyo3(signature = (report_json, truth, nodes = None, margin = DEFAULT_INTERIOR_MARGIN))]
fn assess(py: Python<'_>, report_json: &str, truth: &str, nodes: Option<usize>, margin: f64) -> PyResult<String> {
    let r = report(report_json)?;
    let builtin: Builtin = parse(truth)?;
    let frame = r.estimate.domain().clone();
    let grid = match nodes {
        Some(n) => EvaluationGrid::new(frame, n).map_err(to_py)?,
        None => EvaluationGrid::default_for(&frame),
    };
    let errors = py.detach(|| error_metrics(|x| builtin.truth(x), |x| r.estimate.eval(x), &grid, margin));
    serde_json::to_string(&errors).map_err(json_err)
}

#[pymodule]
fn momentfit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", momentfit::VERSION)?;
    m.add_function(wrap_pyfunction!(builtin_moments, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_truth, m)?)?;
    m.add_function(wrap_pyfunction!(perturb, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(maxent, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(assess, m)?)?;
    Ok(())
}
