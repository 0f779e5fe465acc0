//! Python bindings: `import pyehrelay`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ehrelay::analytic::{self, P3Variant};
use ehrelay::model::{db_to_linear, lambdas_from_geometry, LinkStats, NetworkGeometry};
use ehrelay::montecarlo::{self, Variant};
use ehrelay::optimize::{self, RhoObjective, RsObjective};
use ehrelay::specfun;

fn py_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// System parameters: link rates, harvesting efficiency, power split,
/// interference-to-noise ratio (linear) and rate.
#[pyclass(name = "SystemParams", frozen)]
struct PySystemParams {
    inner: ehrelay::SystemParams,
}

#[pymethods]
impl PySystemParams {
    #[new]
    #[pyo3(signature = (lambda_sr, lambda_rd, lambda_sd, lambda_sp, lambda_rp, eta, rho, i_over_no, rs))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        lambda_sr: f64,
        lambda_rd: f64,
        lambda_sd: f64,
        lambda_sp: f64,
        lambda_rp: f64,
        eta: f64,
        rho: f64,
        i_over_no: f64,
        rs: f64,
    ) -> PyResult<Self> {
        let links = LinkStats::new(lambda_sr, lambda_rd, lambda_sd, lambda_sp, lambda_rp).map_err(py_err)?;
        let inner = ehrelay::SystemParams::new(links, eta, rho, i_over_no, rs).map_err(py_err)?;
        Ok(Self { inner })
    }

    /// Builds parameters from node distances with `lambda = d^epsilon`.
    #[staticmethod]
    #[pyo3(signature = (d_sr=1.2, d_rd=1.8, d_sd=3.0, d_sp=3.0, d_rp=3.0, epsilon=4.0, eta=0.7, rho=0.5, i_over_no_db=6.0, rs=3.0))]
    #[allow(clippy::too_many_arguments)]
    fn from_geometry(
        d_sr: f64,
        d_rd: f64,
        d_sd: f64,
        d_sp: f64,
        d_rp: f64,
        epsilon: f64,
        eta: f64,
        rho: f64,
        i_over_no_db: f64,
        rs: f64,
    ) -> PyResult<Self> {
        let geo = NetworkGeometry::new(d_sr, d_rd, d_sd, d_sp, d_rp, epsilon).map_err(py_err)?;
        let inner = ehrelay::SystemParams::new(lambdas_from_geometry(&geo), eta, rho, db_to_linear(i_over_no_db), rs)
            .map_err(py_err)?;
        Ok(Self { inner })
    }

    fn with_rho(&self, rho: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_rho(rho).map_err(py_err)? })
    }

    fn with_rs(&self, rs: f64) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_rs(rs).map_err(py_err)? })
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn rs(&self) -> f64 {
        self.inner.rs
    }

    #[getter]
    fn i_over_no(&self) -> f64 {
        self.inner.i_over_no
    }

    /// `(lambda_sr, lambda_rd, lambda_sd, lambda_sp, lambda_rp)`
    #[getter]
    fn lambdas(&self) -> (f64, f64, f64, f64, f64) {
        let l = &self.inner.links;
        (l.lambda_sr, l.lambda_rd, l.lambda_sd, l.lambda_sp, l.lambda_rp)
    }

    fn gamma_th(&self) -> f64 {
        self.inner.gamma_th()
    }

    fn psi(&self) -> f64 {
        self.inner.psi()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!(
            "SystemParams(lambdas={:?}, eta={}, rho={}, i_over_no={}, rs={})",
            self.lambdas(),
            p.eta,
            p.rho,
            p.i_over_no,
            p.rs
        )
    }
}

#[pyclass(name = "OutageBreakdown", frozen, get_all)]
struct PyBreakdown {
    p1: f64,
    p2: f64,
    p3: f64,
    q1: f64,
    q2: f64,
    tau: f64,
    p3_raw: f64,
    regime_warning: bool,
}

#[pymethods]
impl PyBreakdown {
    fn __repr__(&self) -> String {
        format!(
            "OutageBreakdown(p1={:.6}, p2={:.6}, p3={:.6}, q1={:.6}, q2={:.6}, tau={:.6})",
            self.p1, self.p2, self.p3, self.q1, self.q2, self.tau
        )
    }
}

#[pyclass(name = "McEstimate", frozen, get_all)]
struct PyMcEstimate {
    variant: String,
    mean: f64,
    std_error: f64,
    trials: u64,
    p1: f64,
    p2: f64,
    p3: f64,
    q1: f64,
    q2: f64,
}

#[pymethods]
impl PyMcEstimate {
    fn __repr__(&self) -> String {
        format!(
            "McEstimate(variant={}, mean={:.6}, std_error={:.2e}, trials={})",
            self.variant, self.mean, self.std_error, self.trials
        )
    }
}

#[pyclass(name = "OptResult", frozen, get_all)]
struct PyOptResult {
    arg_opt: f64,
    value_opt: f64,
    method: String,
    evaluations: usize,
    grid_fallback: bool,
}

#[pymethods]
impl PyOptResult {
    fn __repr__(&self) -> String {
        format!(
            "OptResult(arg_opt={:.6}, value_opt={:.6}, method={}, grid_fallback={})",
            self.arg_opt, self.value_opt, self.method, self.grid_fallback
        )
    }
}

impl From<optimize::OptResult> for PyOptResult {
    fn from(r: optimize::OptResult) -> Self {
        Self {
            arg_opt: r.arg_opt,
            value_opt: r.value_opt,
            method: format!("{:?}", r.method).to_lowercase(),
            evaluations: r.evaluations,
            grid_fallback: r.grid_fallback,
        }
    }
}

fn parse_p3_variant(name: &str) -> PyResult<P3Variant> {
    match name {
        "full" => Ok(P3Variant::Full),
        "no_rp" => Ok(P3Variant::NoRp),
        "high_snr" => Ok(P3Variant::HighSnr),
        _ => Err(py_err(format!("unknown p3 variant '{name}' (full, no_rp, high_snr)"))),
    }
}

/// Exponential integral E1(x), x > 0.
#[pyfunction]
fn e1(x: f64) -> PyResult<f64> {
    Ok(specfun::e1(x).map_err(py_err)?.value)
}

/// Exponential integral Ei(x), x > 0.
#[pyfunction]
fn ei(x: f64) -> PyResult<f64> {
    Ok(specfun::ei(x).map_err(py_err)?.value)
}

/// Closed-form outage breakdown and throughput.
#[pyfunction]
#[pyo3(signature = (sys, variant="full"))]
fn breakdown(sys: &PySystemParams, variant: &str) -> PyResult<PyBreakdown> {
    let b = analytic::tau_incremental(&sys.inner, parse_p3_variant(variant)?).map_err(py_err)?;
    Ok(PyBreakdown {
        p1: b.p1,
        p2: b.p2,
        p3: b.p3,
        q1: b.q1,
        q2: b.q2,
        tau: b.tau,
        p3_raw: b.p3_raw,
        regime_warning: b.regime_warning,
    })
}

#[pyfunction]
fn tau_simplified(sys: &PySystemParams) -> PyResult<f64> {
    analytic::tau_simplified(&sys.inner).map_err(py_err)
}

#[pyfunction]
fn tau_no_direct(sys: &PySystemParams) -> PyResult<f64> {
    analytic::tau_no_direct(&sys.inner).map_err(py_err)
}

#[pyfunction]
fn rho_star(sys: &PySystemParams) -> PyResult<f64> {
    analytic::rho_star_closed_form(&sys.inner).map_err(py_err)
}

#[pyfunction]
fn rho_star_no_direct(sys: &PySystemParams) -> PyResult<f64> {
    analytic::rho_star_no_direct(&sys.inner).map_err(py_err)
}

/// Monte Carlo throughput estimate; releases the GIL while running.
#[pyfunction]
#[pyo3(signature = (sys, trials=1_000_000, seed=42, variant="incremental"))]
fn mc_estimate(py: Python<'_>, sys: &PySystemParams, trials: u64, seed: u64, variant: &str) -> PyResult<PyMcEstimate> {
    if trials == 0 {
        return Err(py_err("trials must be positive"));
    }
    let v: Variant = variant.parse().map_err(py_err)?;
    let inner = sys.inner;
    let e = py.detach(move || montecarlo::estimate_variant(&inner, trials, seed, v));
    Ok(PyMcEstimate {
        variant: v.name().to_string(),
        mean: e.mean,
        std_error: e.std_error,
        trials: e.trials,
        p1: e.freq.p1_event,
        p2: e.freq.p2_event,
        p3: e.freq.p3_event,
        q1: e.freq.q1_event,
        q2: e.freq.direct_success,
    })
}

/// Maximizes throughput over rho. `objective` is one of tau_full, tau_sim,
/// tau_no_direct, tau_sim_no_direct, tau_mc.
#[pyfunction]
#[pyo3(signature = (sys, objective="tau_full", tol=1e-4, trials=1_000_000, seed=42))]
fn maximize_rho(
    py: Python<'_>,
    sys: &PySystemParams,
    objective: &str,
    tol: f64,
    trials: u64,
    seed: u64,
) -> PyResult<PyOptResult> {
    let obj = match objective {
        "tau_full" => RhoObjective::TauFull,
        "tau_sim" => RhoObjective::TauSim,
        "tau_no_direct" => RhoObjective::TauNoDirect,
        "tau_sim_no_direct" => RhoObjective::TauSimNoDirect,
        "tau_mc" => RhoObjective::TauMc { trials, seed, variant: Variant::Incremental },
        _ => return Err(py_err(format!("unknown objective '{objective}'"))),
    };
    let inner = sys.inner;
    let r = py.detach(move || optimize::maximize_rho(&inner, obj, tol)).map_err(py_err)?;
    Ok(r.into())
}

/// Maximizes throughput over the rate with rho re-optimized at each rate.
#[pyfunction]
#[pyo3(signature = (sys, rs_from=0.5, rs_to=8.0))]
fn maximize_rs(py: Python<'_>, sys: &PySystemParams, rs_from: f64, rs_to: f64) -> PyResult<PyOptResult> {
    let inner = sys.inner;
    let r = py
        .detach(move || optimize::maximize_rs(&inner, (rs_from, rs_to), RsObjective::TauFull))
        .map_err(py_err)?;
    Ok(r.into())
}

#[pymodule]
fn pyehrelay(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemParams>()?;
    m.add_class::<PyBreakdown>()?;
    m.add_class::<PyMcEstimate>()?;
    m.add_class::<PyOptResult>()?;
    m.add_function(wrap_pyfunction!(e1, m)?)?;
    m.add_function(wrap_pyfunction!(ei, m)?)?;
    m.add_function(wrap_pyfunction!(breakdown, m)?)?;
    m.add_function(wrap_pyfunction!(tau_simplified, m)?)?;
    m.add_function(wrap_pyfunction!(tau_no_direct, m)?)?;
    m.add_function(wrap_pyfunction!(rho_star, m)?)?;
    m.add_function(wrap_pyfunction!(rho_star_no_direct, m)?)?;
    m.add_function(wrap_pyfunction!(mc_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_rho, m)?)?;
    m.add_function(wrap_pyfunction!(maximize_rs, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
