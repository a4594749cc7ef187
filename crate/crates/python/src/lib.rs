//! Python bindings: grids, pair states, the minimizer, the surface sweep and
//! the verification suites.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use gpsol_core::functionals as fx;
use gpsol_core::rearrange;
use gpsol_core::scalar_ref;
use gpsol_core::solver::{self, MinimizeConfig};
use gpsol_core::surface;
use gpsol_core::tws;
use gpsol_core::{ConstraintTargets, Error};

fn py_err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Grid", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyGrid(gpsol_core::Grid);

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (half_width = 40.0, n_points = 8001))]
    fn new(half_width: f64, n_points: usize) -> PyResult<Self> {
        gpsol_core::Grid::new(half_width, n_points)
            .map(Self)
            .map_err(py_err)
    }

    #[getter]
    fn half_width(&self) -> f64 {
        self.0.half_width()
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.0.n_points()
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.0.spacing()
    }

    fn nodes(&self) -> Vec<f64> {
        self.0.nodes()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(half_width={}, n_points={})",
            self.0.half_width(),
            self.0.n_points()
        )
    }
}

/// Modulus `rho`, phase gradient `phi` and bright component `v`.
#[pyclass(name = "PairState", frozen, from_py_object)]
#[derive(Clone)]
struct PyPairState(gpsol_core::PairState);

#[pymethods]
impl PyPairState {
    #[new]
    fn new(grid: PyGrid, rho: Vec<f64>, phi: Vec<f64>, v: Vec<f64>) -> PyResult<Self> {
        gpsol_core::PairState::from_vecs(grid.0, rho, phi, v)
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        gpsol_core::PairState::from_json(text)
            .map(Self)
            .map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(py_err)
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.grid())
    }

    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.0.rho().values().to_vec()
    }

    #[getter]
    fn phi(&self) -> Vec<f64> {
        self.0.phi().values().to_vec()
    }

    #[getter]
    fn v(&self) -> Vec<f64> {
        self.0.v().values().to_vec()
    }

    /// Phase `theta` with `theta(0) = anchor`.
    #[pyo3(signature = (anchor = 0.0))]
    fn phase(&self, anchor: f64) -> Vec<f64> {
        self.0.reconstruct_phase(anchor).into_values()
    }

    /// Human-readable descriptions of every invariant violation.
    fn violations(&self) -> Vec<String> {
        self.0.validate().iter().map(ToString::to_string).collect()
    }

    #[pyo3(signature = (alpha = 1.0, beta = 1.0))]
    fn energy(&self, alpha: f64, beta: f64) -> PyResult<f64> {
        let t = ConstraintTargets::new(0.0, 0.0, alpha, beta).map_err(py_err)?;
        Ok(fx::energy(&self.0, &t))
    }

    fn momentum(&self) -> f64 {
        fx::momentum(&self.0)
    }

    fn classical_momentum(&self) -> f64 {
        fx::classical_momentum(&self.0)
    }

    fn mass(&self) -> f64 {
        fx::mass(&self.0)
    }

    /// Symmetric decreasing version with the same momentum and mass; returns
    /// `(state, gamma)`.
    fn symmetrize(&self) -> PyResult<(PyPairState, f64)> {
        let (s, g) = rearrange::symmetrize(&self.0).map_err(py_err)?;
        Ok((PyPairState(s), g))
    }

    /// `(ode_norm, first_integral_max)` of the traveling-wave system.
    #[pyo3(signature = (c, lam, alpha = 1.0, beta = 1.0))]
    fn residuals(&self, c: f64, lam: f64, alpha: f64, beta: f64) -> PyResult<(f64, f64)> {
        let t = ConstraintTargets::new(0.0, 0.0, alpha, beta).map_err(py_err)?;
        let (_, _, norm) = tws::ode_residual(&self.0, c, lam, &t);
        let fi = tws::first_integral_residual(&self.0, c, lam, &t).max_abs_interior();
        Ok((norm, fi))
    }
}

#[pyclass(name = "SolveResult", frozen)]
struct PySolveResult(solver::SolveResult);

#[pymethods]
impl PySolveResult {
    #[getter]
    fn state(&self) -> PyPairState {
        PyPairState(self.0.state.clone())
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.0.energy
    }

    #[getter]
    fn c(&self) -> f64 {
        self.0.multiplier_c
    }

    #[getter]
    fn lam(&self) -> Option<f64> {
        self.0.multiplier_lambda
    }

    #[getter]
    fn c_crosscheck(&self) -> f64 {
        self.0.multiplier_c_crosscheck
    }

    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.0.iterations
    }

    #[getter]
    fn grad_norm(&self) -> f64 {
        self.0.grad_norm
    }

    #[getter]
    fn h1(&self) -> bool {
        self.0.h1_holds
    }

    #[getter]
    fn h2(&self) -> bool {
        self.0.h2_holds
    }

    #[getter]
    fn bounds_ok(&self) -> bool {
        self.0.bounds_ok
    }

    #[getter]
    fn ode_residual(&self) -> f64 {
        self.0.ode_residual
    }

    #[getter]
    fn first_integral_residual(&self) -> f64 {
        self.0.first_integral_residual
    }

    /// Energies of the iteration trace.
    fn energy_trace(&self) -> Vec<f64> {
        self.0.trace.iter().map(|r| r.energy).collect()
    }

    #[pyo3(signature = (profiles = false))]
    fn to_json(&self, profiles: bool) -> PyResult<String> {
        self.0.to_json(profiles).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveResult(energy={}, c={}, lam={:?}, converged={})",
            self.0.energy, self.0.multiplier_c, self.0.multiplier_lambda, self.0.converged
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn config(
    q: f64,
    m: f64,
    alpha: f64,
    beta: f64,
    grid: Option<PyGrid>,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> PyResult<MinimizeConfig> {
    let t = ConstraintTargets::new(q, m, alpha, beta).map_err(py_err)?;
    let g = grid.map_or_else(gpsol_core::Grid::default_grid, |g| g.0);
    let mut cfg = MinimizeConfig::new(t, g);
    cfg.grad_tol = tol;
    cfg.max_iters = max_iters;
    cfg.seed = seed;
    Ok(cfg)
}

/// Minimizes the energy at momentum `q` and mass `m`.
#[pyfunction]
#[pyo3(signature = (q, m = 0.0, alpha = 1.0, beta = 1.0, grid = None, tol = 1e-8, max_iters = 200_000, seed = 0, init = None))]
#[allow(clippy::too_many_arguments)]
fn minimize(
    py: Python<'_>,
    q: f64,
    m: f64,
    alpha: f64,
    beta: f64,
    grid: Option<PyGrid>,
    tol: f64,
    max_iters: usize,
    seed: u64,
    init: Option<PyPairState>,
) -> PyResult<PySolveResult> {
    let cfg = config(q, m, alpha, beta, grid, tol, max_iters, seed)?;
    let init = init.map(|s| s.0);
    py.detach(|| solver::minimize(&cfg, init.as_ref()))
        .map(PySolveResult)
        .map_err(py_err)
}

/// Sweeps `(q, m)` cells; returns one dict per cell sorted by `(q, m)`.
#[pyfunction]
#[pyo3(signature = (q_list, m_list, alpha = 1.0, beta = 1.0, grid = None, restarts = 3, jobs = 1))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    q_list: Vec<f64>,
    m_list: Vec<f64>,
    alpha: f64,
    beta: f64,
    grid: Option<PyGrid>,
    restarts: usize,
    jobs: usize,
) -> PyResult<Vec<Bound<'py, pyo3::types::PyDict>>> {
    use pyo3::types::PyDict;
    let cfg = config(0.0, 0.0, alpha, beta, grid, 1e-8, 200_000, 0)?;
    let table = py
        .detach(|| surface::sweep(&q_list, &m_list, &cfg, restarts, jobs))
        .map_err(py_err)?;
    table
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("q", s.q)?;
            d.set_item("m", s.m)?;
            d.set_item("e_min", s.e_min)?;
            d.set_item("c", s.c)?;
            d.set_item("lambda", s.lambda)?;
            d.set_item("converged", s.converged)?;
            d.set_item("h1", s.h1)?;
            d.set_item("h2", s.h2)?;
            d.set_item("bounds_ok", s.bounds_ok)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (c, grid = None))]
fn build_scalar(c: f64, grid: Option<PyGrid>) -> PyResult<PyPairState> {
    let g = grid.map_or_else(gpsol_core::Grid::default_grid, |g| g.0);
    let s = scalar_ref::build_scalar(c, &g).map_err(py_err)?;
    Ok(PyPairState(s.to_state()))
}

#[pyfunction]
fn scalar_energy(c: f64) -> PyResult<f64> {
    scalar_ref::scalar_energy(c).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (c, grid = None))]
fn scalar_momentum_of_speed(c: f64, grid: Option<PyGrid>) -> PyResult<f64> {
    let g = grid.map_or_else(gpsol_core::Grid::default_grid, |g| g.0);
    scalar_ref::scalar_momentum_of_speed(c, &g).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (q, grid = None))]
fn speed_of_momentum(q: f64, grid: Option<PyGrid>) -> PyResult<f64> {
    let g = grid.map_or_else(gpsol_core::Grid::default_grid, |g| g.0);
    scalar_ref::speed_of_momentum(q, &g).map_err(py_err)
}

/// Symmetric decreasing rearrangement of nonnegative samples (odd length).
#[pyfunction]
fn rearrange_values(values: Vec<f64>) -> PyResult<Vec<f64>> {
    rearrange::rearrange_values(&values).map_err(py_err)
}

/// Runs the rearrangement suite; returns `(name, cases, failures, worst_margin)` rows.
#[pyfunction]
#[pyo3(signature = (cases = 1000, seed = 0))]
fn check_rearrangement(cases: usize, seed: u64) -> PyResult<Vec<(String, usize, usize, f64)>> {
    let lines = gpsol_core::suites::rearrangement_suite(cases, seed).map_err(py_err)?;
    Ok(lines
        .into_iter()
        .map(|l| (l.name, l.cases, l.failures, l.worst_margin))
        .collect())
}

#[pymodule]
fn gpsol(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyPairState>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(build_scalar, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_energy, m)?)?;
    m.add_function(wrap_pyfunction!(scalar_momentum_of_speed, m)?)?;
    m.add_function(wrap_pyfunction!(speed_of_momentum, m)?)?;
    m.add_function(wrap_pyfunction!(rearrange_values, m)?)?;
    m.add_function(wrap_pyfunction!(check_rearrangement, m)?)?;
    Ok(())
}
