//! Python bindings: `pyspherelab.OperatorSet`, `pyspherelab.CoherentState`
//! and functions for the identity suite, the harmonic cross-check and
//! coherent-state solves.

use num_complex::Complex64;
use pyo3::exceptions::{PyKeyError, PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use spherelab::coherent::{self, CoherentLabel, SolveOptions};
use spherelab::dd;
use spherelab::harmonics;
use spherelab::identities::{self, SubspacePolicy};
use spherelab::operators::{self, ClassicalPhasePoint, OPERATOR_NAMES};
use spherelab::Error;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Overflow { .. } => PyOverflowError::new_err(err.to_string()),
        Error::UnknownOperator(_) => PyKeyError::new_err(err.to_string()),
        Error::CalibrationFailed(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn to_json<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn label_from(
    z: Option<[Complex64; 3]>,
    x: Option<[f64; 3]>,
    p: Option<[f64; 3]>,
    eta: f64,
) -> spherelab::Result<CoherentLabel> {
    match (z, x, p) {
        (Some(z), None, None) => CoherentLabel::new(z),
        (None, Some(x), Some(p)) => coherent::label_of(&ClassicalPhasePoint::new(x, p)?, eta),
        _ => Err(Error::InvalidLabel("give either z, or both x and p".into())),
    }
}

/// Every operator on a truncated two-mode Fock space with `n1 + n2 <= n_max`.
#[pyclass(frozen, name = "OperatorSet")]
struct PyOperatorSet {
    inner: operators::OperatorSet,
}

#[pymethods]
impl PyOperatorSet {
    #[new]
    #[pyo3(signature = (n_max, eta = 1.0))]
    fn new(n_max: usize, eta: f64) -> PyResult<Self> {
        let inner = operators::OperatorSet::build(n_max, eta).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max()
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.basis.dim()
    }

    /// Basis states `(n1, n2)` in storage order.
    fn basis(&self) -> Vec<(usize, usize)> {
        self.inner
            .basis
            .states()
            .iter()
            .map(|s| (s.n1, s.n2))
            .collect()
    }

    /// Names accepted by `nonzeros` and `dense`.
    #[staticmethod]
    fn operator_names() -> Vec<&'static str> {
        OPERATOR_NAMES.to_vec()
    }

    /// Nonzero elements `(row, col, value)` of a named operator, by basis index.
    fn nonzeros(&self, name: &str) -> PyResult<Vec<(usize, usize, Complex64)>> {
        let op = self.inner.named(name).map_err(to_py)?;
        Ok(op
            .nonzeros()
            .into_iter()
            .map(|(r, c, v)| (r, c, dd::to_c64(v)))
            .collect())
    }

    /// Dense matrix of a named operator as nested lists.
    fn dense(&self, name: &str) -> PyResult<Vec<Vec<Complex64>>> {
        let m = self.inner.named(name).map_err(to_py)?.to_dense_full();
        Ok((0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "OperatorSet(n_max={}, eta={})",
            self.inner.n_max(),
            self.inner.eta
        )
    }
}

/// Numerically solved joint eigenstate of the three annihilation operators.
#[pyclass(frozen, name = "CoherentState")]
struct PyCoherentState {
    state: coherent::CoherentState,
    expectations: coherent::Expectations,
    coefficients: Vec<(usize, usize, Complex64)>,
}

#[pymethods]
impl PyCoherentState {
    #[getter]
    fn label(&self) -> Vec<Complex64> {
        self.state.label.z.to_vec()
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.state.residual
    }

    #[getter]
    fn tail_mass(&self) -> f64 {
        self.state.tail_mass
    }

    #[getter]
    fn warnings<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_json(py, &self.state.warnings)
    }

    /// Coefficients `(n1, n2, c)` over the full basis.
    #[getter]
    fn coefficients(&self) -> Vec<(usize, usize, Complex64)> {
        self.coefficients.clone()
    }

    /// Expectation values and variances as a dict.
    fn expectations<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_json(py, &self.expectations)
    }

    /// Largest deviation of `<Z_k>` from the label.
    fn label_mismatch(&self) -> f64 {
        coherent::label_mismatch(&self.expectations, &self.state.label)
    }

    fn __repr__(&self) -> String {
        let z: Vec<String> = self
            .state
            .label
            .z
            .iter()
            .map(|c| format!("{}{:+}j", c.re, c.im))
            .collect();
        format!(
            "CoherentState(label=[{}], n_max={}, residual={:.3e})",
            z.join(", "),
            self.state.n_max,
            self.state.residual
        )
    }
}

/// Runs the identity suite; returns one dict per scalar check, sorted by name.
#[pyfunction]
#[pyo3(signature = (n_max = 40, eta = 1.0, guard = 2, tol = None))]
fn verify<'py>(
    py: Python<'py>,
    n_max: usize,
    eta: f64,
    guard: usize,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let reports = py
        .detach(|| {
            let set = operators::OperatorSet::build(n_max, eta)?;
            let policy = SubspacePolicy {
                guard_extra: guard,
                tolerance_override: tol,
                ..SubspacePolicy::default()
            };
            identities::run(&set, &identities::standard_suite(), &policy)
        })
        .map_err(to_py)?;
    to_json(py, &reports)
}

/// Compares N and Π against the spherical-harmonic quadrature oracle.
#[pyfunction]
#[pyo3(signature = (j_max = 8, n_max = 20, eta = 1.0))]
fn xcheck<'py>(
    py: Python<'py>,
    j_max: usize,
    n_max: usize,
    eta: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let report = py
        .detach(|| {
            let set = operators::OperatorSet::build(n_max, eta)?;
            let table = harmonics::build_table(j_max)?;
            harmonics::xcheck(&set, &table, j_max)
        })
        .map_err(to_py)?;
    to_json(py, &report)
}

/// Classical label `z` for a phase point with `x·x = 1`, `x·p = 0`.
#[pyfunction]
#[pyo3(signature = (x, p, eta = 1.0))]
fn classical_label(x: [f64; 3], p: [f64; 3], eta: f64) -> PyResult<Vec<Complex64>> {
    let pt = ClassicalPhasePoint::new(x, p).map_err(to_py)?;
    Ok(operators::classical_annihilation(&pt, eta)
        .map_err(to_py)?
        .to_vec())
}

/// Solves for the coherent state labelled by `z`, or by the phase point `(x, p)`.
#[pyfunction]
#[pyo3(signature = (z = None, *, x = None, p = None, n_max = 40, eta = 1.0))]
fn solve_coherent(
    py: Python<'_>,
    z: Option<[Complex64; 3]>,
    x: Option<[f64; 3]>,
    p: Option<[f64; 3]>,
    n_max: usize,
    eta: f64,
) -> PyResult<PyCoherentState> {
    let label = label_from(z, x, p, eta).map_err(to_py)?;
    py.detach(|| {
        let set = operators::OperatorSet::build(n_max, eta)?;
        let state = coherent::solve(&set, &label, &SolveOptions::default())?;
        let expectations = coherent::expectations(&state, &set)?;
        let coefficients = state.coefficients(&set.basis);
        Ok(PyCoherentState {
            state,
            expectations,
            coefficients,
        })
    })
    .map_err(to_py)
}

#[pymodule]
fn pyspherelab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyOperatorSet>()?;
    m.add_class::<PyCoherentState>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(xcheck, m)?)?;
    m.add_function(wrap_pyfunction!(classical_label, m)?)?;
    m.add_function(wrap_pyfunction!(solve_coherent, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_needs_exactly_one_form() {
        let z = [
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        assert!(label_from(Some(z), None, None, 1.0).is_ok());
        assert!(label_from(None, None, None, 1.0).is_err());
        assert!(label_from(Some(z), Some([0.0, 0.0, 1.0]), None, 1.0).is_err());
        let from_point = label_from(None, Some([0.0, 0.0, 1.0]), Some([0.0; 3]), 1.0).unwrap();
        assert_eq!(from_point.z, z);
    }

    #[test]
    fn invalid_label_is_rejected() {
        let one = Complex64::new(1.0, 0.0);
        let err =
            label_from(Some([one, one, Complex64::new(0.0, 0.0)]), None, None, 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidLabel(_)));
    }
}
