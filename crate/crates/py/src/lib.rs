//! Python module `pykarcher`: SPD matrices, finite measures, the Karcher mean,
//! resolvents, the resolvent semigroup and the inductive-mean schemes.
//!
//! Matrices cross the boundary as lists of rows.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use karcher_core::solver::{self, SolverConfig};
use karcher_core::trace::IterationTrace;
use karcher_core::{schemes, Error as CoreError};

fn to_py(e: CoreError) -> PyErr {
    match e {
        CoreError::NotConverged { .. } | CoreError::ResolventBudget { .. } | CoreError::EigenNotConverged { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "SpdMatrix", module = "pykarcher", frozen, from_py_object)]
#[derive(Clone)]
pub struct PySpd(pub karcher_core::SpdMatrix);

#[pymethods]
impl PySpd {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        karcher_core::SpdMatrix::from_rows(&rows).map(PySpd).map_err(to_py)
    }

    #[staticmethod]
    fn identity(dim: usize) -> Self {
        PySpd(karcher_core::SpdMatrix::identity(dim))
    }

    #[staticmethod]
    #[pyo3(signature = (dim, scale=0.6, seed=0))]
    fn random(dim: usize, scale: f64, seed: u64) -> Self {
        PySpd(karcher_core::random::random_spd(dim, scale, seed))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        self.0.to_rows()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigen().values.to_vec()
    }

    fn sqrt(&self) -> Self {
        PySpd(self.0.sqrt())
    }

    fn inv(&self) -> Self {
        PySpd(self.0.inv())
    }

    /// Principal logarithm, as rows of a symmetric matrix.
    fn log(&self) -> Vec<Vec<f64>> {
        self.0.log().to_rows()
    }

    fn powf(&self, p: f64) -> PyResult<Self> {
        self.0.powf(p).map(PySpd).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("SpdMatrix({:?})", self.0.to_rows())
    }
}

#[pyclass(name = "FiniteMeasure", module = "pykarcher", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyMeasure(pub karcher_core::FiniteMeasure);

#[pymethods]
impl PyMeasure {
    #[new]
    #[pyo3(signature = (atoms, weights=None))]
    fn new(atoms: Vec<PySpd>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let atoms: Vec<_> = atoms.into_iter().map(|a| a.0).collect();
        match weights {
            Some(w) => karcher_core::FiniteMeasure::new(atoms, w),
            None => karcher_core::FiniteMeasure::uniform(atoms),
        }
        .map(PyMeasure)
        .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (dim, atoms, scale=0.6, seed=0, uniform=false))]
    fn random(dim: usize, atoms: usize, scale: f64, seed: u64, uniform: bool) -> PyResult<Self> {
        let mut rng = karcher_core::rng::seeded(seed);
        karcher_core::random::random_measure_with(&mut rng, dim, atoms, scale, uniform)
            .map(PyMeasure)
            .map_err(to_py)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn atoms(&self) -> Vec<PySpd> {
        self.0.atoms().iter().cloned().map(PySpd).collect()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("FiniteMeasure(dim={}, atoms={})", self.0.dim(), self.0.len())
    }
}

#[pyfunction]
fn thompson_distance(a: &PySpd, b: &PySpd) -> PyResult<f64> {
    karcher_core::thompson_distance(&a.0, &b.0).map_err(to_py)
}

/// The point `a #_t b` on the geodesic from `a` to `b`.
#[pyfunction]
fn geodesic(a: &PySpd, b: &PySpd, t: f64) -> PyResult<PySpd> {
    karcher_core::geodesic(&a.0, &b.0, t).map(PySpd).map_err(to_py)
}

/// Returns `(mean, residual_norm, iterations)`; raises `RuntimeError` if the solver stalls.
#[pyfunction]
#[pyo3(signature = (mu, tol=1e-10))]
fn karcher_mean(py: Python<'_>, mu: &PyMeasure, tol: f64) -> PyResult<(PySpd, f64, usize)> {
    let res = py
        .detach(|| solver::karcher_mean(&mu.0, &SolverConfig::with_tol(tol)))
        .map_err(to_py)?;
    Ok((PySpd(res.mean), res.residual_norm, res.iterations))
}

/// Exact W1 distance over the Thompson metric.
#[pyfunction]
fn w1(py: Python<'_>, mu: &PyMeasure, nu: &PyMeasure) -> PyResult<f64> {
    py.detach(|| karcher_core::w1_distance(&mu.0, &nu.0)).map(|(d, _)| d).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (lam, mu, x, tol=1e-12))]
fn resolvent(py: Python<'_>, lam: f64, mu: &PyMeasure, x: &PySpd, tol: f64) -> PyResult<PySpd> {
    py.detach(|| solver::resolvent(lam, &mu.0, &x.0, &SolverConfig::with_tol(tol)))
        .map(PySpd)
        .map_err(to_py)
}

/// The resolvent semigroup `S(t)x`, to within `flow_tol` in the Thompson metric.
#[pyfunction]
#[pyo3(signature = (t, mu, x, flow_tol=1e-4, tol=1e-12))]
fn semigroup(py: Python<'_>, t: f64, mu: &PyMeasure, x: &PySpd, flow_tol: f64, tol: f64) -> PyResult<PySpd> {
    py.detach(|| solver::semigroup(t, &mu.0, &x.0, flow_tol, &SolverConfig::with_tol(tol)))
        .map(PySpd)
        .map_err(to_py)
}

fn errors(trace: IterationTrace) -> (Vec<u64>, Vec<f64>) {
    (trace.indices, trace.errors)
}

/// Deterministic inductive mean over `cycles` passes through a uniform measure.
/// Returns `(indices, errors)` with errors measured against `reference`.
#[pyfunction]
fn nodice(py: Python<'_>, mu: &PyMeasure, cycles: usize, reference: &PySpd) -> PyResult<(Vec<u64>, Vec<f64>)> {
    py.detach(|| schemes::nodice_sequence(&mu.0, cycles, &reference.0)).map(errors).map_err(to_py)
}

/// Stochastic inductive mean with i.i.d. draws from `mu`.
#[pyfunction]
#[pyo3(signature = (mu, steps, reference, seed=0))]
fn stochastic(py: Python<'_>, mu: &PyMeasure, steps: usize, reference: &PySpd, seed: u64) -> PyResult<(Vec<u64>, Vec<f64>)> {
    py.detach(|| schemes::stochastic_sequence(&mu.0, steps, seed, &reference.0))
        .map(errors)
        .map_err(to_py)
}

#[pymodule]
fn pykarcher(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpd>()?;
    m.add_class::<PyMeasure>()?;
    m.add_function(wrap_pyfunction!(thompson_distance, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(karcher_mean, m)?)?;
    m.add_function(wrap_pyfunction!(w1, m)?)?;
    m.add_function(wrap_pyfunction!(resolvent, m)?)?;
    m.add_function(wrap_pyfunction!(semigroup, m)?)?;
    m.add_function(wrap_pyfunction!(nodice, m)?)?;
    m.add_function(wrap_pyfunction!(stochastic, m)?)?;
    Ok(())
}
