use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use tlk_core::{closed_form, coherent, fock, model, sweep, Error};

create_exception!(tlk, DegeneratePostselectionError, PyRuntimeError);
create_exception!(tlk, NumericRangeError, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) => PyValueError::new_err(e.to_string()),
        Error::DegeneratePostselection { .. } => DegeneratePostselectionError::new_err(e.to_string()),
        Error::NumericRange { .. } => NumericRangeError::new_err(e.to_string()),
    }
}

fn truncation(n_max: Option<usize>, tail_eps: Option<f64>) -> PyResult<model::Truncation> {
    match (n_max, tail_eps) {
        (Some(_), Some(_)) => Err(PyValueError::new_err("give n_max or tail_eps, not both")),
        (Some(n), None) => Ok(model::Truncation::MaxLevel(n)),
        (None, Some(eps)) => model::Truncation::tail_eps(eps).map_err(to_py),
        (None, None) => Ok(model::Truncation::default()),
    }
}

#[pyclass(name = "ThermalPointer", frozen)]
struct PyThermalPointer {
    inner: model::ThermalPointer,
}

#[pymethods]
impl PyThermalPointer {
    #[new]
    fn new(z: f64) -> PyResult<Self> {
        Ok(Self {
            inner: model::ThermalPointer::new(z).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_boltzmann_ratio(ratio: f64) -> PyResult<Self> {
        Ok(Self {
            inner: model::ThermalPointer::from_boltzmann_ratio(ratio).map_err(to_py)?,
        })
    }

    #[getter]
    fn z(&self) -> f64 {
        self.inner.z()
    }

    #[getter]
    fn mean_photon(&self) -> f64 {
        self.inner.mean_photon()
    }

    fn __repr__(&self) -> String {
        format!("ThermalPointer(z={})", self.inner.z())
    }
}

#[pyclass(name = "InteractionConfig", frozen)]
struct PyInteractionConfig {
    inner: model::InteractionConfig,
}

#[pymethods]
impl PyInteractionConfig {
    #[new]
    #[pyo3(signature = (phi0, theta=0.0))]
    fn new(phi0: f64, theta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: model::InteractionConfig::new(phi0, theta).map_err(to_py)?,
        })
    }

    #[getter]
    fn phi0(&self) -> f64 {
        self.inner.phi0()
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta()
    }

    fn __repr__(&self) -> String {
        format!("InteractionConfig(phi0={}, theta={})", self.inner.phi0(), self.inner.theta())
    }
}

/// Success probability with the conditional photon-number distribution.
#[pyclass(name = "PostselectionOutcome", frozen, get_all)]
struct PyOutcome {
    probability: f64,
    probs: Vec<f64>,
    tail_mass: f64,
    mean_photon: f64,
    tail_mean_bound: f64,
    /// Standard error of `probability`; only set for Monte Carlo estimates.
    std_error: Option<f64>,
}

impl PyOutcome {
    fn from_outcome(o: model::PostselectionOutcome, std_error: Option<f64>) -> Self {
        Self {
            probability: o.probability,
            probs: o.distribution.probs().to_vec(),
            tail_mass: o.distribution.tail_mass(),
            mean_photon: o.mean_photon,
            tail_mean_bound: o.tail_mean_bound,
            std_error,
        }
    }
}

#[pyfunction]
fn z_from_boltzmann_ratio(ratio: f64) -> PyResult<f64> {
    model::z_from_boltzmann_ratio(ratio).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (pointer, n_max=None, tail_eps=None))]
fn thermal_distribution(pointer: &PyThermalPointer, n_max: Option<usize>, tail_eps: Option<f64>) -> PyResult<(Vec<f64>, f64)> {
    let d = closed_form::thermal_distribution(&pointer.inner, &truncation(n_max, tail_eps)?).map_err(to_py)?;
    Ok((d.probs().to_vec(), d.tail_mass()))
}

#[pyfunction]
fn postselect_probability(pointer: &PyThermalPointer, cfg: &PyInteractionConfig) -> f64 {
    closed_form::postselect_probability(&pointer.inner, &cfg.inner)
}

#[pyfunction]
#[pyo3(signature = (pointer, cfg, n_max=None, tail_eps=None))]
fn final_distribution(
    pointer: &PyThermalPointer,
    cfg: &PyInteractionConfig,
    n_max: Option<usize>,
    tail_eps: Option<f64>,
) -> PyResult<PyOutcome> {
    let out = closed_form::final_distribution(&pointer.inner, &cfg.inner, &truncation(n_max, tail_eps)?).map_err(to_py)?;
    Ok(PyOutcome::from_outcome(out, None))
}

#[pyfunction]
fn eliminated_levels(cfg: &PyInteractionConfig, n_max: usize) -> PyResult<Vec<usize>> {
    closed_form::eliminated_levels(&cfg.inner, n_max).map_err(to_py)
}

/// Returns `(n_bar_f, R)`.
#[pyfunction]
fn mean_photon_final(pointer: &PyThermalPointer, cfg: &PyInteractionConfig) -> PyResult<(f64, f64)> {
    closed_form::mean_photon_final(&pointer.inner, &cfg.inner).map_err(to_py)
}

#[pyfunction]
fn wigner_closed(pointer: &PyThermalPointer, cfg: &PyInteractionConfig, x: f64, p: f64) -> PyResult<f64> {
    closed_form::wigner_closed(&pointer.inner, &cfg.inner, x, p).map_err(to_py)
}

#[pyfunction]
fn wigner_origin(pointer: &PyThermalPointer, cfg: &PyInteractionConfig) -> PyResult<f64> {
    closed_form::wigner_origin(&pointer.inner, &cfg.inner).map_err(to_py)
}

/// Returns `(re, im)` of the dark-port amplitude for pointer level `n`.
#[pyfunction]
fn dark_port_amplitude(n: usize, cfg: &PyInteractionConfig) -> (f64, f64) {
    let a = fock::dark_port_amplitude(n, &cfg.inner);
    (a.re, a.im)
}

#[pyfunction]
#[pyo3(signature = (pointer, cfg, n_max=None, tail_eps=None))]
fn oracle_postselect(
    pointer: &PyThermalPointer,
    cfg: &PyInteractionConfig,
    n_max: Option<usize>,
    tail_eps: Option<f64>,
) -> PyResult<PyOutcome> {
    let out = fock::oracle_postselect(&pointer.inner, &cfg.inner, &truncation(n_max, tail_eps)?).map_err(to_py)?;
    Ok(PyOutcome::from_outcome(out, None))
}

#[pyfunction]
#[pyo3(signature = (probs, x, p, tail_mass=0.0))]
fn wigner_series(probs: Vec<f64>, x: f64, p: f64, tail_mass: f64) -> PyResult<f64> {
    let dist = model::NumberDistribution::new(probs, tail_mass).map_err(to_py)?;
    fock::wigner_series(&dist, x, p).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (pointer, cfg, samples=1_000_000, seed=0, n_max=None, tail_eps=None))]
fn mc_postselect(
    py: Python<'_>,
    pointer: &PyThermalPointer,
    cfg: &PyInteractionConfig,
    samples: u64,
    seed: u64,
    n_max: Option<usize>,
    tail_eps: Option<f64>,
) -> PyResult<PyOutcome> {
    let mc = model::MonteCarloConfig::new(samples, seed).map_err(to_py)?;
    let trunc = truncation(n_max, tail_eps)?;
    let (ptr, c) = (pointer.inner, cfg.inner);
    let est = py
        .detach(|| coherent::mc_postselect(&ptr, &c, &mc, &trunc))
        .map_err(to_py)?;
    Ok(PyOutcome::from_outcome(est.outcome, Some(est.std_error)))
}

/// Returns `(axis_values, {column: values})`; degenerate cells are `None`.
type PySweep = (Vec<f64>, Vec<(String, Vec<Option<f64>>)>);

fn sweep_to_py(s: sweep::SweepResult) -> PySweep {
    (
        s.axis_values,
        s.columns.into_iter().map(|c| (c.name, c.values)).collect(),
    )
}

#[pyfunction]
#[pyo3(signature = (phi0, z_grid, theta=0.0))]
fn sweep_z(phi0: f64, z_grid: Vec<f64>, theta: f64) -> PyResult<PySweep> {
    sweep::sweep_z(phi0, theta, &z_grid).map(sweep_to_py).map_err(to_py)
}

#[pyfunction]
fn sweep_theta(z: f64, phi0: f64, theta_grid: Vec<f64>) -> PyResult<PySweep> {
    sweep::sweep_theta(z, phi0, &theta_grid).map(sweep_to_py).map_err(to_py)
}

#[pyfunction]
fn reproduce_csv() -> PyResult<String> {
    sweep::reproduce().map(|s| s.to_csv()).map_err(to_py)
}

#[pymodule]
fn tlk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyThermalPointer>()?;
    m.add_class::<PyInteractionConfig>()?;
    m.add_class::<PyOutcome>()?;
    m.add("DegeneratePostselectionError", m.py().get_type::<DegeneratePostselectionError>())?;
    m.add("NumericRangeError", m.py().get_type::<NumericRangeError>())?;
    m.add("PUBLISHED_PHI0", sweep::PUBLISHED_PHI0)?;
    m.add_function(wrap_pyfunction!(z_from_boltzmann_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(postselect_probability, m)?)?;
    m.add_function(wrap_pyfunction!(final_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(eliminated_levels, m)?)?;
    m.add_function(wrap_pyfunction!(mean_photon_final, m)?)?;
    m.add_function(wrap_pyfunction!(wigner_closed, m)?)?;
    m.add_function(wrap_pyfunction!(wigner_origin, m)?)?;
    m.add_function(wrap_pyfunction!(dark_port_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_postselect, m)?)?;
    m.add_function(wrap_pyfunction!(wigner_series, m)?)?;
    m.add_function(wrap_pyfunction!(mc_postselect, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_z, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_theta, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce_csv, m)?)?;
    Ok(())
}
