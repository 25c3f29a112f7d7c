//! Python bindings. Rates are in bits per slot, times in slots, as in the
//! Rust crate; `slot_rate` converts from physical units.

use fbm_netcalc::netcalc::{self, CrossTraffic, ThroughTraffic};
use fbm_netcalc::traffic::{CbrTraffic, EbbOnOffAggregate, FbmTraffic};
use fbm_netcalc::units::SlotDuration;
use fbm_netcalc::{bounds, envelope, numerics, sim, Error};
use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Domain { .. } | Error::Parse(..) => PyValueError::new_err(e.to_string()),
        Error::Optimization { .. } => PyArithmeticError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Aggregate fBm traffic `A(t) = λt + σZ(t)` with Hurst parameter `H`.
#[pyclass(name = "FbmTraffic", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyFbm(FbmTraffic);

#[pymethods]
impl PyFbm {
    #[new]
    fn new(mean: f64, sigma: f64, hurst: f64) -> PyResult<Self> {
        FbmTraffic::new(mean, sigma, hurst).map(PyFbm).map_err(py_err)
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.0.mean_rate()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma()
    }

    #[getter]
    fn hurst(&self) -> f64 {
        self.0.hurst()
    }

    /// `m` normalized copies multiplexed: same mean, `σ/√m`.
    fn multiplexed(&self, m: usize) -> PyResult<Self> {
        self.0.multiplexed(m).map(PyFbm).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("FbmTraffic(mean={}, sigma={}, hurst={})", self.0.mean_rate(), self.0.sigma(), self.0.hurst())
    }
}

/// `m` independent two-state Markov on-off sources.
#[pyclass(name = "EbbOnOff", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyEbb(EbbOnOffAggregate);

#[pymethods]
impl PyEbb {
    #[new]
    fn new(sources: usize, peak: f64, p12: f64, p21: f64) -> PyResult<Self> {
        EbbOnOffAggregate::new(sources, peak, p12, p21).map(PyEbb).map_err(py_err)
    }

    /// From the per-source mean, peak rate and burstiness `T = 1/p12 + 1/p21`.
    #[staticmethod]
    fn from_mean(sources: usize, mean: f64, peak: f64, burstiness: f64) -> PyResult<Self> {
        EbbOnOffAggregate::from_mean_and_burstiness(sources, mean, peak, burstiness)
            .map(PyEbb)
            .map_err(py_err)
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.0.mean_rate()
    }

    #[getter]
    fn burstiness(&self) -> f64 {
        self.0.burstiness()
    }

    fn __repr__(&self) -> String {
        format!(
            "EbbOnOff(sources={}, peak={}, p12={}, p21={})",
            self.0.sources(),
            self.0.peak(),
            self.0.p12(),
            self.0.p21()
        )
    }
}

/// Optimized backlog bound `P[B > b] <= epsilon`.
#[pyclass(name = "BacklogBound", frozen, get_all)]
struct PyBacklog {
    b: f64,
    epsilon: f64,
    ln_epsilon: f64,
    /// β for fBm, θ for EBB.
    param: f64,
}

#[pymethods]
impl PyBacklog {
    fn __repr__(&self) -> String {
        format!("BacklogBound(b={}, epsilon={:e}, param={})", self.b, self.epsilon, self.param)
    }
}

impl From<bounds::BacklogBoundResult> for PyBacklog {
    fn from(r: bounds::BacklogBoundResult) -> Self {
        PyBacklog {
            b: r.b,
            epsilon: r.epsilon,
            ln_epsilon: r.ln_epsilon,
            param: r.beta_opt,
        }
    }
}

impl From<bounds::EbbBacklogResult> for PyBacklog {
    fn from(r: bounds::EbbBacklogResult) -> Self {
        PyBacklog {
            b: r.b,
            epsilon: r.epsilon,
            ln_epsilon: r.ln_epsilon,
            param: r.theta_opt,
        }
    }
}

#[pyfunction]
fn fbm_backlog_violation(capacity: f64, traffic: PyFbm, b: f64) -> PyResult<PyBacklog> {
    bounds::fbm_backlog_violation(capacity, &traffic.0, b).map(Into::into).map_err(py_err)
}

#[pyfunction]
fn fbm_backlog_at_epsilon(capacity: f64, traffic: PyFbm, epsilon: f64) -> PyResult<PyBacklog> {
    bounds::fbm_backlog_at_epsilon(capacity, &traffic.0, epsilon).map(Into::into).map_err(py_err)
}

#[pyfunction]
fn asymptotic_epsilon(capacity: f64, traffic: PyFbm, b: f64) -> PyResult<f64> {
    bounds::asymptotic_epsilon(capacity, &traffic.0, b).map_err(py_err)
}

#[pyfunction]
fn asymptotic_backlog_at_epsilon(capacity: f64, traffic: PyFbm, epsilon: f64) -> PyResult<f64> {
    bounds::asymptotic_backlog_at_epsilon(capacity, &traffic.0, epsilon).map_err(py_err)
}

#[pyfunction]
fn ebb_backlog_violation(capacity: f64, traffic: PyEbb, b: f64) -> PyResult<PyBacklog> {
    bounds::ebb_backlog_violation(capacity, &traffic.0, b).map(Into::into).map_err(py_err)
}

#[pyfunction]
fn fbm_sample_path_envelope(traffic: PyFbm, beta: f64, eta: f64, t: f64) -> PyResult<f64> {
    envelope::fbm_sample_path_envelope(&traffic.0, beta, eta, t).map_err(py_err)
}

#[pyfunction]
fn sample_path_epsilon(beta: f64, eta: f64) -> PyResult<f64> {
    envelope::sample_path_epsilon(beta, eta).map_err(py_err)
}

#[pyfunction]
fn gamma_tail_integral(x: f64, xi: f64) -> PyResult<f64> {
    numerics::gamma_tail_integral(x, xi).map_err(py_err)
}

#[pyfunction]
fn lambert_w0(z: f64) -> PyResult<f64> {
    numerics::lambert_w0(z).map_err(py_err)
}

#[pyfunction]
fn gaussian_ccdf(x: f64) -> f64 {
    numerics::gaussian_ccdf(x)
}

/// Converts a rate string such as `"250 Mb/s"` to bits per slot.
#[pyfunction]
#[pyo3(signature = (text, slot_us = 10.0))]
fn slot_rate(text: &str, slot_us: f64) -> PyResult<f64> {
    SlotDuration::from_micros(slot_us)
        .and_then(|s| s.parse_rate(text))
        .map_err(py_err)
}

/// Tandem of `hops` servers with cross traffic at every hop.
///
/// `through` is a constant rate (float), an `EbbOnOff` or an `FbmTraffic`.
#[pyclass(name = "TandemScenario", frozen, from_py_object)]
#[derive(Clone)]
struct PyTandem(netcalc::TandemScenario);

#[pymethods]
impl PyTandem {
    #[new]
    fn new(hops: usize, capacity: f64, cross: &Bound<'_, PyAny>, through: &Bound<'_, PyAny>) -> PyResult<Self> {
        let cross = if let Ok(f) = cross.extract::<PyFbm>() {
            CrossTraffic::Fbm(f.0)
        } else if let Ok(e) = cross.extract::<PyEbb>() {
            CrossTraffic::Ebb(e.0)
        } else {
            return Err(PyValueError::new_err("cross must be FbmTraffic or EbbOnOff"));
        };
        let through = if let Ok(f) = through.extract::<PyFbm>() {
            ThroughTraffic::Fbm(f.0)
        } else if let Ok(e) = through.extract::<PyEbb>() {
            ThroughTraffic::Ebb(e.0)
        } else if let Ok(r) = through.extract::<f64>() {
            ThroughTraffic::Cbr(CbrTraffic::new(r).map_err(py_err)?)
        } else {
            return Err(PyValueError::new_err("through must be a rate, EbbOnOff or FbmTraffic"));
        };
        netcalc::TandemScenario::new(hops, capacity, cross, through)
            .map(PyTandem)
            .map_err(py_err)
    }

    #[getter]
    fn hops(&self) -> usize {
        self.0.hops
    }

    fn with_hops(&self, hops: usize) -> PyResult<Self> {
        self.0.with_hops(hops).map(PyTandem).map_err(py_err)
    }

    /// Optimized `P[W > d]` bound.
    fn delay_violation(&self, py: Python<'_>, d: f64) -> PyResult<PyE2e> {
        let sc = self.0.clone();
        py.detach(move || netcalc::e2e_delay_violation(&sc, d))
            .map(Into::into)
            .map_err(py_err)
    }

    /// Smallest delay bound with violation probability `epsilon`.
    fn delay_at_epsilon(&self, py: Python<'_>, epsilon: f64) -> PyResult<PyE2e> {
        let sc = self.0.clone();
        py.detach(move || netcalc::e2e_delay_at_epsilon(&sc, epsilon))
            .map(Into::into)
            .map_err(py_err)
    }

    /// Monte-Carlo delays of a tagged through arrival; returns the sorted
    /// delays and the number of censored trials.
    fn simulate_delays(&self, py: Python<'_>, trials: u64, seed: u64) -> PyResult<(Vec<f64>, u64)> {
        let sc = self.0.clone();
        py.detach(move || sim::tandem_delay_mc(&sc, trials, seed))
            .map(|s| (s.delays, s.censored))
            .map_err(py_err)
    }
}

#[pyclass(name = "E2eBound", frozen, get_all)]
struct PyE2e {
    d: f64,
    epsilon: f64,
    ln_epsilon: f64,
    r_cr: f64,
    delta: f64,
    cross_param: f64,
    through_param: Option<f64>,
}

#[pymethods]
impl PyE2e {
    fn __repr__(&self) -> String {
        format!(
            "E2eBound(d={}, epsilon={:e}, r_cr={}, delta={}, cross_param={})",
            self.d, self.epsilon, self.r_cr, self.delta, self.cross_param
        )
    }
}

impl From<netcalc::E2eBound> for PyE2e {
    fn from(r: netcalc::E2eBound) -> Self {
        PyE2e {
            d: r.d,
            epsilon: r.epsilon,
            ln_epsilon: r.ln_epsilon,
            r_cr: r.r_cr,
            delta: r.delta,
            cross_param: r.cross_param,
            through_param: r.through_param,
        }
    }
}

/// One exact fractional Gaussian noise path of `length` slots (increments
/// including the mean).
#[pyfunction]
fn generate_fgn(py: Python<'_>, traffic: PyFbm, length: usize, seed: u64) -> PyResult<Vec<f64>> {
    py.detach(move || sim::generate_fgn(&traffic.0, length, seed))
        .map(|p| p.arrivals().collect())
        .map_err(py_err)
}

/// Point-wise and first-passage violation counts of the sample-path
/// envelope for `t = 1..=horizon`.
#[pyfunction]
fn envelope_violation_mc(
    py: Python<'_>,
    traffic: PyFbm,
    beta: f64,
    eta: f64,
    horizon: usize,
    trials: u64,
    seed: u64,
) -> PyResult<(Vec<u64>, Vec<u64>)> {
    py.detach(move || sim::envelope_violation_mc(&traffic.0, beta, eta, horizon, trials, seed))
        .map(|c| (c.pointwise, c.cumulative))
        .map_err(py_err)
}

#[pymodule]
fn fbmnc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFbm>()?;
    m.add_class::<PyEbb>()?;
    m.add_class::<PyBacklog>()?;
    m.add_class::<PyTandem>()?;
    m.add_class::<PyE2e>()?;
    m.add_function(wrap_pyfunction!(fbm_backlog_violation, m)?)?;
    m.add_function(wrap_pyfunction!(fbm_backlog_at_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_backlog_at_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(ebb_backlog_violation, m)?)?;
    m.add_function(wrap_pyfunction!(fbm_sample_path_envelope, m)?)?;
    m.add_function(wrap_pyfunction!(sample_path_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_tail_integral, m)?)?;
    m.add_function(wrap_pyfunction!(lambert_w0, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_ccdf, m)?)?;
    m.add_function(wrap_pyfunction!(slot_rate, m)?)?;
    m.add_function(wrap_pyfunction!(generate_fgn, m)?)?;
    m.add_function(wrap_pyfunction!(envelope_violation_mc, m)?)?;
    Ok(())
}
