//! Python bindings. Rationals are passed as "p/q" strings; reports come back as dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use cohomflow::first_integrals as fi;
use cohomflow::ode_flow::{self, IntegratorOptions};
use cohomflow::rational::{fmt_rat, parse_rat};
use cohomflow::solutions;
use cohomflow::superpotential::{self as sp, SearchOptions};
use cohomflow::weight_config::{builtin_catalog, catalog_entry, CoefficientMode};
use cohomflow::{Error, ExpPoly, Surd};

fn err(e: Error) -> PyErr {
    match e {
        Error::Integrator(m) => PyRuntimeError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn opts(tol: f64) -> IntegratorOptions {
    IntegratorOptions::with_tol(tol)
}

/// Weight configuration `(d, W, A, E, λ)`.
#[pyclass(name = "Configuration", from_py_object)]
#[derive(Clone)]
struct PyConfiguration {
    inner: cohomflow::Configuration,
}

#[pymethods]
impl PyConfiguration {
    #[new]
    #[pyo3(signature = (dims, weights, e = "0", lam = "0"))]
    fn new(dims: Vec<u64>, weights: Vec<(Vec<i64>, String)>, e: &str, lam: &str) -> PyResult<Self> {
        let w = weights
            .into_iter()
            .map(|(v, a)| parse_rat(&a).map(|a| (v, a)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        let inner = cohomflow::Configuration::new(
            dims,
            w,
            parse_rat(e).map_err(err)?,
            parse_rat(lam).map_err(err)?,
        )
        .map_err(err)?;
        Ok(PyConfiguration { inner })
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyConfiguration {
            inner: cohomflow::Configuration::from_json_str(s).map_err(err)?,
        })
    }

    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        let e = catalog_entry(name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown built-in '{name}'")))?;
        Ok(PyConfiguration { inner: e.config })
    }

    fn to_json<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.to_json())
    }

    #[getter]
    fn r(&self) -> usize {
        self.inner.r()
    }

    #[getter]
    fn n(&self) -> u64 {
        self.inner.n()
    }

    #[getter]
    fn dims(&self) -> Vec<u64> {
        self.inner.dims.clone()
    }

    #[getter]
    fn e(&self) -> String {
        fmt_rat(&self.inner.e)
    }

    #[getter]
    fn lam(&self) -> String {
        fmt_rat(&self.inner.lambda)
    }

    /// Rendered Hamiltonian.
    fn hamiltonian(&self) -> String {
        cohomflow::exp_poly::hamiltonian(&self.inner).render()
    }

    fn __repr__(&self) -> String {
        format!(
            "Configuration(dims={:?}, E={}, lambda={})",
            self.inner.dims,
            self.e(),
            self.lam()
        )
    }
}

/// Superpotential ansatz `f = Σ f_c e^{c·q}`.
#[pyclass(name = "Ansatz", from_py_object)]
#[derive(Clone)]
struct PyAnsatz {
    inner: sp::SuperpotentialAnsatz,
}

#[pymethods]
impl PyAnsatz {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(PyAnsatz {
            inner: sp::SuperpotentialAnsatz::from_json_str(s).map_err(err)?,
        })
    }

    fn to_json<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn exponents(&self) -> Vec<Vec<String>> {
        self.inner
            .exponents()
            .iter()
            .map(|c| c.iter().map(fmt_rat).collect())
            .collect()
    }

    fn render(&self) -> String {
        self.inner.render()
    }

    fn __len__(&self) -> usize {
        self.inner.entries.len()
    }

    fn __repr__(&self) -> String {
        format!("Ansatz({})", self.inner.render())
    }
}

#[pyclass(name = "SearchResult")]
struct PySearchResult {
    #[pyo3(get)]
    found: Vec<PyAnsatz>,
    #[pyo3(get)]
    partial: bool,
    #[pyo3(get)]
    candidates_solved: usize,
    json: String,
}

#[pymethods]
impl PySearchResult {
    fn to_json<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        py.import("json")?
            .call_method1("loads", (self.json.as_str(),))
    }

    fn __len__(&self) -> usize {
        self.found.len()
    }
}

/// The case-5 closed-form soliton.
#[pyclass(name = "ClosedFormCase5")]
struct PyClosedForm {
    inner: solutions::ClosedFormCase5,
}

#[pymethods]
impl PyClosedForm {
    #[new]
    #[pyo3(signature = (e, a = -0.5, u0 = 0.0))]
    fn new(e: f64, a: f64, u0: f64) -> PyResult<Self> {
        Ok(PyClosedForm {
            inner: solutions::explicit_case5_with(e, a, u0).map_err(err)?,
        })
    }

    fn t_of_s(&self, s: f64) -> f64 {
        self.inner.t_of_s(s)
    }

    fn s_of_t(&self, t: f64) -> f64 {
        self.inner.s_of_t(t)
    }

    fn f(&self, t: f64) -> f64 {
        self.inner.f(t)
    }

    fn g1(&self, t: f64) -> f64 {
        self.inner.g1(t)
    }

    fn g2(&self, t: f64) -> f64 {
        self.inner.g2(t)
    }

    fn u(&self, t: f64) -> f64 {
        self.inner.u(t)
    }

    fn smoothness<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &solutions::smoothness_check(&self.inner).map_err(err)?)
    }
}

/// Built-in configurations with their expected superpotential counts.
#[pyfunction]
fn catalog<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let list: Vec<serde_json::Value> = builtin_catalog()
        .into_iter()
        .map(|e| {
            serde_json::json!({
                "name": e.name,
                "description": e.description,
                "mode": e.mode,
                "expected": e.expected,
                "classified": e.classified,
            })
        })
        .collect();
    to_py(py, &list)
}

/// Exact check of the superpotential condition.
#[pyfunction]
fn check<'py>(
    py: Python<'py>,
    cfg: &PyConfiguration,
    ansatz: &PyAnsatz,
) -> PyResult<Bound<'py, PyAny>> {
    let rep = sp::check(&cfg.inner, &ansatz.inner).map_err(err)?;
    to_py(py, &rep.to_json(cfg.inner.r()))
}

/// `H(q, ∇f(q))`, rendered; `"0"` for a superpotential.
#[pyfunction]
fn hamiltonian_on_graph(cfg: &PyConfiguration, ansatz: &PyAnsatz) -> PyResult<String> {
    Ok(sp::hamiltonian_on_graph(&cfg.inner, &ansatz.inner)
        .map_err(err)?
        .render())
}

#[pyfunction]
#[pyo3(signature = (cfg, lattice_bound = 3, max_extra = 2, mode = None, budget = 200_000, off_p = false))]
fn search(
    py: Python<'_>,
    cfg: &PyConfiguration,
    lattice_bound: u32,
    max_extra: usize,
    mode: Option<&str>,
    budget: usize,
    off_p: bool,
) -> PyResult<PySearchResult> {
    let mode = match mode {
        None | Some("constant") => CoefficientMode::Constant,
        Some("polynomial") => CoefficientMode::Polynomial,
        Some(m) => return Err(PyValueError::new_err(format!("unknown mode '{m}'"))),
    };
    let o = SearchOptions {
        lattice_bound,
        max_extra,
        mode,
        off_p,
        budget,
    };
    let c = cfg.inner.clone();
    let res = py.detach(move || sp::search(&c, &o)).map_err(err)?;
    let json =
        serde_json::to_string(&res.to_json()).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(PySearchResult {
        found: res
            .found
            .iter()
            .map(|f| PyAnsatz { inner: f.clone() })
            .collect(),
        partial: res.partial,
        candidates_solved: res.candidates_solved,
        json,
    })
}

#[pyfunction]
fn factor_j<'py>(py: Python<'py>, cfg: &PyConfiguration) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &fi::factor_j(&cfg.inner).to_json())
}

/// `{F, H} = ΦH` test; `f` is ExpPoly JSON or `"builtin:bryant-difference"`.
#[pyfunction]
fn verify_gfi<'py>(py: Python<'py>, cfg: &PyConfiguration, f: &str) -> PyResult<Bound<'py, PyAny>> {
    let fx = match f {
        "builtin:bryant-difference" => fi::bryant_difference_integral(&cfg.inner),
        s => ExpPoly::from_json_str(s),
    }
    .map_err(err)?
    .map_coeffs(|c| Surd::from_rat(c.clone()));
    to_py(py, &fi::verify_gfi(&cfg.inner, &fx).map_err(err)?.to_json())
}

#[pyfunction]
fn two_vector_exponents<'py>(py: Python<'py>, n: u64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &fi::two_vector_exponents(n).map_err(err)?.to_json())
}

#[pyfunction]
#[pyo3(name = "t_of_s")]
fn py_t_of_s(s: f64, lam: f64, e: f64) -> f64 {
    ode_flow::t_of_s(s, lam, e)
}

/// Case-5 s-system from the singular start; rows `(s, β₁, β₂, u)`.
#[pyfunction]
#[pyo3(signature = (cfg, s0 = 1e-6, s_max = 10.0, tol = 1e-10))]
fn integrate_case5(
    cfg: &PyConfiguration,
    s0: f64,
    s_max: f64,
    tol: f64,
) -> PyResult<Vec<(f64, f64, f64, f64)>> {
    let st = ode_flow::singular_start_case5(&cfg.inner, s0).map_err(err)?;
    let tr = ode_flow::integrate_case5_s(&st, s_max, &opts(tol)).map_err(err)?;
    if let Some(why) = tr.truncated {
        return Err(PyRuntimeError::new_err(why));
    }
    Ok(tr
        .samples
        .iter()
        .map(|(s, y)| (*s, y[0], y[1], y[2]))
        .collect())
}

/// Canonical flow from `p = ∇f(q0) + p_offset`; returns conservation maxima.
#[pyfunction]
#[pyo3(signature = (cfg, ansatz, q0, t0, t1, tol = 1e-10, p_offset = None))]
fn full_flow_check<'py>(
    py: Python<'py>,
    cfg: &PyConfiguration,
    ansatz: &PyAnsatz,
    q0: Vec<f64>,
    t0: f64,
    t1: f64,
    tol: f64,
    p_offset: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let tr = ode_flow::full_flow_check(
        &cfg.inner,
        &ansatz.inner,
        &q0,
        (t0, t1),
        &opts(tol),
        p_offset.as_deref(),
    )
    .map_err(err)?;
    let out = serde_json::json!({
        "t_end": tr.last().0,
        "samples": tr.samples.len(),
        "max_abs_hamiltonian": tr.max_abs_hamiltonian(),
        "max_abs_hamiltonian_scaled": tr.max_abs_hamiltonian_scaled(),
        "max_graph_defect": tr.max_graph_defect(),
        "max_graph_defect_rel": tr.max_graph_defect_rel(),
        "truncated": tr.truncated,
    });
    to_py(py, &out)
}

/// The `n = 1` flow; rows `(t, h, u)` and the second-order residual.
#[pyfunction]
#[pyo3(signature = (a, e, lam, t_max, tol = 1e-10))]
fn bryant_n1<'py>(
    py: Python<'py>,
    a: f64,
    e: f64,
    lam: f64,
    t_max: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let sol = solutions::bryant_n1(a, e, lam, t_max, &opts(tol)).map_err(err)?;
    let rows: Vec<(f64, f64, f64)> = sol
        .trajectory
        .samples
        .iter()
        .map(|(t, y)| (*t, y[0], y[1]))
        .collect();
    let out = serde_json::json!({
        "samples": rows,
        "second_order_residual": sol.second_order_residual,
        "truncated": sol.trajectory.truncated,
    });
    to_py(py, &out)
}

#[pymodule]
#[pyo3(name = "cohomflow")]
fn cohomflow_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfiguration>()?;
    m.add_class::<PyAnsatz>()?;
    m.add_class::<PySearchResult>()?;
    m.add_class::<PyClosedForm>()?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(hamiltonian_on_graph, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(factor_j, m)?)?;
    m.add_function(wrap_pyfunction!(verify_gfi, m)?)?;
    m.add_function(wrap_pyfunction!(two_vector_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(py_t_of_s, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_case5, m)?)?;
    m.add_function(wrap_pyfunction!(full_flow_check, m)?)?;
    m.add_function(wrap_pyfunction!(bryant_n1, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
