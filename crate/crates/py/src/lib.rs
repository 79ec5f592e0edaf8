//! Python bindings for `sigma_evolve`.
//!
//! Structured reports (exponents, rate checks, sweeps) cross the boundary as
//! JSON and come back as plain dicts.

use std::sync::Arc;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use sigma_evolve::harness::{self, RateOptions, SweepOptions, Tracked};
use sigma_evolve::kernel;
use sigma_evolve::predictor::{self, Quantity};
use sigma_evolve::solver::{self, Controls, DataSpec, Scheme};

fn err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn quantity(name: &str, value: f64) -> PyResult<Quantity> {
    match name {
        "lq" if value.is_infinite() => Ok(Quantity::Linf),
        "lq" => Ok(Quantity::Lq { q: value }),
        "linf" => Ok(Quantity::Linf),
        "hdot" => Ok(Quantity::HdotGamma { gamma: value }),
        "ut" => Ok(Quantity::UtL2),
        other => Err(err(format!("unknown quantity {other:?}; use lq, linf, hdot or ut"))),
    }
}

#[pyclass(name = "ModelParams", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyParams(sigma_evolve::ModelParams);

#[pymethods]
impl PyParams {
    #[new]
    fn new(n: u32, sigma: f64, mu: f64) -> PyResult<Self> {
        sigma_evolve::ModelParams::new(n, sigma, mu).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> u32 {
        self.0.n()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu()
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho()
    }

    fn __repr__(&self) -> String {
        format!("ModelParams(n={}, sigma={}, mu={})", self.0.n(), self.0.sigma(), self.0.mu())
    }
}

#[pyclass(name = "Grid", frozen)]
struct PyGrid(Arc<solver::Grid>);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(dim: usize, points: usize, half_length: f64) -> PyResult<Self> {
        solver::Grid::new(dim, points, half_length)
            .map(|g| Self(Arc::new(g)))
            .map_err(err)
    }

    /// Box and resolution picked by the admissibility rules for horizon T.
    #[staticmethod]
    fn auto(dim: usize, sigma: f64, t_final: f64) -> PyResult<Self> {
        solver::Grid::auto(dim, sigma, t_final)
            .map(|g| Self(Arc::new(g)))
            .map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn points(&self) -> usize {
        self.0.points()
    }

    #[getter]
    fn half_length(&self) -> f64 {
        self.0.half_length()
    }

    fn coords(&self) -> Vec<f64> {
        (0..self.0.points()).map(|j| self.0.coord(j)).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(dim={}, points={}, half_length={})",
            self.0.dim(),
            self.0.points(),
            self.0.half_length()
        )
    }
}

#[pyclass(name = "Field", frozen)]
struct PyField(solver::Field);

#[pymethods]
impl PyField {
    #[staticmethod]
    #[pyo3(signature = (grid, amplitude=1.0, width=1.0))]
    fn gaussian(grid: &PyGrid, amplitude: f64, width: f64) -> PyResult<Self> {
        let spec = DataSpec::Gaussian { amplitude, width };
        solver::make_initial_data(&spec, &grid.0).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_samples(grid: &PyGrid, samples: Vec<f64>) -> PyResult<Self> {
        solver::Field::from_physical(grid.0.clone(), samples)
            .map(Self)
            .map_err(err)
    }

    fn samples(&self) -> Vec<f64> {
        self.0.physical().to_vec()
    }

    fn mass(&self) -> f64 {
        self.0.mass()
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    fn lq_norm(&self, q: f64) -> PyResult<f64> {
        if !(q >= 1.0) {
            return Err(err(format!("q must be >= 1 (got {q})")));
        }
        Ok(solver::lq_norm(&self.0, q))
    }

    fn hdot_norm(&self, gamma: f64) -> f64 {
        solver::hdot_norm(&self.0, gamma)
    }
}

#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory(solver::Trajectory);

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times.clone()
    }

    #[getter]
    fn status(&self) -> &'static str {
        match self.0.status {
            solver::Status::Completed => "completed",
            solver::Status::BlowupAbort => "blowup_abort",
            solver::Status::ToleranceAbort => "tolerance_abort",
        }
    }

    #[getter]
    fn residual_history(&self) -> Vec<f64> {
        self.0.residual_history.clone()
    }

    #[getter]
    fn edge_ratio(&self) -> f64 {
        self.0.edge_ratio
    }

    /// Series of one recorded norm: l1, l2, linf, hdot_sigma or ut_l2.
    fn series(&self, name: &str) -> PyResult<Vec<f64>> {
        let pick: fn(&solver::NormSet) -> f64 = match name {
            "l1" => |r| r.l1,
            "l2" => |r| r.l2,
            "linf" => |r| r.linf,
            "hdot_sigma" => |r| r.hdot_sigma,
            "ut_l2" => |r| r.ut_l2,
            other => return Err(err(format!("unknown norm {other:?}"))),
        };
        Ok(self.0.records.iter().map(pick).collect())
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    /// Fitted exponent of the named norm over `window`.
    fn fit(&self, name: &str, window: (f64, f64)) -> PyResult<f64> {
        let values = self.series(name)?;
        let pts: Vec<(f64, f64)> = self.0.times.iter().copied().zip(values).collect();
        harness::fit_decay(&pts, window).map(|f| f.exponent).map_err(err)
    }

    #[pyo3(signature = (tracked="l2"))]
    fn classify(&self, tracked: &str) -> PyResult<String> {
        let t = tracked_of(tracked)?;
        let v = serde_json::to_value(harness::blowup_detector(&self.0, t)).map_err(err)?;
        Ok(v.as_str().unwrap_or_default().to_string())
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

fn tracked_of(name: &str) -> PyResult<Tracked> {
    match name {
        "l2" => Ok(Tracked::L2),
        "linf" => Ok(Tracked::Linf),
        other => Err(err(format!("tracked must be l2 or linf (got {other:?})"))),
    }
}

fn controls_from(m_steps: usize, q_list: Vec<f64>) -> Controls {
    Controls {
        m_steps,
        q_list,
        ..Controls::default()
    }
}

#[pyfunction]
fn critical_exponent<'py>(py: Python<'py>, params: &PyParams) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &predictor::critical_exponent(&params.0).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (params, kind, value=2.0, s=0.0))]
fn linear_decay<'py>(
    py: Python<'py>,
    params: &PyParams,
    kind: &str,
    value: f64,
    s: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &predictor::linear_decay(quantity(kind, value)?, s, &params.0).map_err(err)?)
}

#[pyfunction]
fn existence_verdict<'py>(
    py: Python<'py>,
    p: f64,
    params: &PyParams,
    mass_positive: bool,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &predictor::existence_verdict(p, &params.0, mass_positive).map_err(err)?)
}

/// (psi, zone) for |ξ|^{jσ} ∂_t^k ψ(t, s, ξ); ξ = 0 uses the closed zero-mode form.
#[pyfunction]
#[pyo3(signature = (t, s, xi, params, j=0, k=0))]
fn eval_psi(t: f64, s: f64, xi: f64, params: &PyParams, j: u8, k: u8) -> PyResult<(f64, String)> {
    if xi == 0.0 {
        let v = match (j, k) {
            (1, _) => 0.0,
            (_, 1) => kernel::eval_psi_zero_mode_dt(t, s, &params.0).map_err(err)?,
            _ => kernel::eval_psi_zero_mode(t, s, &params.0).map_err(err)?,
        };
        return Ok((v, "ZERO".into()));
    }
    let e = kernel::eval_psi(t, s, xi, j, k, &params.0).map_err(err)?;
    let zone = serde_json::to_value(e.zone).map_err(err)?;
    Ok((e.psi.re, zone.as_str().unwrap_or_default().to_string()))
}

/// (ψ, ∂_tψ) from direct integration of the mode equation.
#[pyfunction]
fn ode_oracle(t: f64, s: f64, xi: f64, params: &PyParams) -> PyResult<(f64, f64)> {
    kernel::ode_oracle(t, s, xi, &params.0).map_err(err)
}

#[pyfunction]
fn linear_evolve(u1: &PyField, t: f64, s: f64, params: &PyParams) -> PyResult<(PyField, PyField)> {
    let (u, ut) = solver::linear_evolve(&u1.0, t, s, &params.0).map_err(err)?;
    Ok((PyField(u), PyField(ut)))
}

#[pyfunction]
#[pyo3(signature = (u1, t_final, params, m_steps=200, q_list=vec![]))]
fn linear_trajectory(
    py: Python<'_>,
    u1: &PyField,
    t_final: f64,
    params: &PyParams,
    m_steps: usize,
    q_list: Vec<f64>,
) -> PyResult<PyTrajectory> {
    let controls = controls_from(m_steps, q_list);
    py.detach(|| solver::linear_trajectory(&u1.0, t_final, &params.0, &controls))
        .map(PyTrajectory)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (u1, p, t_final, params, scheme="duhamel", m_steps=200, q_list=vec![]))]
#[allow(clippy::too_many_arguments)]
fn semilinear_solve(
    py: Python<'_>,
    u1: &PyField,
    p: f64,
    t_final: f64,
    params: &PyParams,
    scheme: &str,
    m_steps: usize,
    q_list: Vec<f64>,
) -> PyResult<PyTrajectory> {
    let scheme = match scheme {
        "duhamel" | "duhamel_iteration" => Scheme::DuhamelIteration,
        "mol" | "method_of_lines" => Scheme::MethodOfLines,
        other => return Err(err(format!("unknown scheme {other:?}"))),
    };
    let controls = controls_from(m_steps, q_list);
    py.detach(|| solver::semilinear_solve(&u1.0, p, t_final, &params.0, scheme, &controls))
        .map(PyTrajectory)
        .map_err(err)
}

/// Slope of log(value) against log(1+t) over the window.
#[pyfunction]
fn fit_decay<'py>(
    py: Python<'py>,
    times: Vec<f64>,
    values: Vec<f64>,
    window: (f64, f64),
) -> PyResult<Bound<'py, PyAny>> {
    if times.len() != values.len() {
        return Err(err("times and values differ in length"));
    }
    let pts: Vec<(f64, f64)> = times.into_iter().zip(values).collect();
    to_py(py, &harness::fit_decay(&pts, window).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (params, q_list, gamma_list=vec![], t_final=1000.0, max_box_doublings=5))]
fn verify_linear_rates<'py>(
    py: Python<'py>,
    params: &PyParams,
    q_list: Vec<f64>,
    gamma_list: Vec<f64>,
    t_final: f64,
    max_box_doublings: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let opts = RateOptions {
        max_box_doublings,
        ..RateOptions::default()
    };
    let report = py
        .detach(|| harness::verify_linear_rates(&params.0, &q_list, &gamma_list, t_final, &opts))
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("all_pass", report.all_pass())?;
    out.set_item("report", to_py(py, &report)?)?;
    Ok(out.into_any())
}

#[pyfunction]
#[pyo3(signature = (p_list, params, amplitude, t_final, grid=None, m_steps=200))]
fn sweep_p<'py>(
    py: Python<'py>,
    p_list: Vec<f64>,
    params: &PyParams,
    amplitude: f64,
    t_final: f64,
    grid: Option<&PyGrid>,
    m_steps: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let data = DataSpec::Gaussian {
        amplitude,
        width: 1.0,
    };
    let opts = SweepOptions {
        grid: grid.map(|g| g.0.spec()),
        controls: controls_from(m_steps, vec![]),
        ..SweepOptions::default()
    };
    let res = py
        .detach(|| harness::sweep_p(&p_list, &params.0, &data, t_final, &opts))
        .map_err(err)?;
    to_py(py, &res)
}

#[pymodule]
fn sigma_evolve_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(critical_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(linear_decay, m)?)?;
    m.add_function(wrap_pyfunction!(existence_verdict, m)?)?;
    m.add_function(wrap_pyfunction!(eval_psi, m)?)?;
    m.add_function(wrap_pyfunction!(ode_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(linear_evolve, m)?)?;
    m.add_function(wrap_pyfunction!(linear_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(semilinear_solve, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay, m)?)?;
    m.add_function(wrap_pyfunction!(verify_linear_rates, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_p, m)?)?;
    Ok(())
}
