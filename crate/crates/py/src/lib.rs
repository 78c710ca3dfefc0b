//! Python bindings for the edgeprice model, optimizers and harness.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use edgeprice::anchors::run_anchors;
use edgeprice::harness::{self, SweepParam, SweepSpec};
use edgeprice::offload::{energy_breakdown, time_breakdown};
use edgeprice::optimizers::run_algorithm;
use edgeprice::pricing::{
    self, critical_point, curvature_report, default_coefficients, dynamic_price, dynamic_user_utility,
    max_user_utility, server_utility,
};
use edgeprice::scenario::{load_scenario_with_defaults, validate};
use edgeprice::{Algorithm, Allocation, PriceCoefficients, Pricing, Scenario, SwarmConfig};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn apply_kwargs(
    kwargs: Option<&Bound<'_, PyDict>>,
    mut set: impl FnMut(&str, &str) -> PyResult<()>,
) -> PyResult<()> {
    if let Some(kw) = kwargs {
        for (k, v) in kw.iter() {
            let key: String = k.extract()?;
            set(&key, &v.str()?.to_string())?;
        }
    }
    Ok(())
}

/// Model parameters. Keyword arguments use the configuration key names
/// (`q_kb`, `f_local_ghz`, `snr_mode`, ...); attributes are in canonical units.
#[pyclass(name = "Scenario", module = "edgeprice_py", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: Scenario,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut s = Scenario::default();
        apply_kwargs(kwargs, |k, v| s.set(k, v).map_err(value_err))?;
        Ok(PyScenario { inner: s })
    }

    /// Parse a `key = value` document over the defaults.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        load_scenario_with_defaults(text).map(|inner| PyScenario { inner }).map_err(value_err)
    }

    fn to_config(&self) -> String {
        self.inner.to_config()
    }

    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        self.inner.set(key, &value.str()?.to_string()).map_err(value_err)
    }

    /// Violation messages; empty when the scenario is valid.
    fn validate(&self) -> Vec<String> {
        validate(&self.inner).violations.into_iter().map(|v| v.message).collect()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }
    #[getter]
    fn cycles_per_bit(&self) -> f64 {
        self.inner.cycles_per_bit
    }
    #[getter]
    fn f_local(&self) -> f64 {
        self.inner.f_local
    }
    #[getter]
    fn w1(&self) -> f64 {
        self.inner.w1
    }
    #[getter]
    fn w2(&self) -> f64 {
        self.inner.w2
    }
    #[getter]
    fn snr_mode(&self) -> &'static str {
        self.inner.channel.mode.as_str()
    }
    #[getter]
    fn f_range(&self) -> (f64, f64) {
        self.inner.f_range
    }
    #[getter]
    fn b_range(&self) -> (f64, f64) {
        self.inner.b_range
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(q={} bits, f_local={} Hz, w1={}, w2={}, snr_mode={})",
            self.inner.q,
            self.inner.f_local,
            self.inner.w1,
            self.inner.w2,
            self.inner.channel.mode
        )
    }
}

/// Purchased server frequency (Hz) and bandwidth (bit/s).
#[pyclass(name = "Allocation", module = "edgeprice_py", from_py_object)]
#[derive(Clone, Copy)]
struct PyAllocation {
    #[pyo3(get, set)]
    f_server: f64,
    #[pyo3(get, set)]
    b: f64,
}

impl From<Allocation> for PyAllocation {
    fn from(a: Allocation) -> Self {
        PyAllocation { f_server: a.f_server, b: a.b }
    }
}

impl PyAllocation {
    fn inner(&self) -> Allocation {
        Allocation::new(self.f_server, self.b)
    }
}

#[pymethods]
impl PyAllocation {
    #[new]
    fn new(f_server: f64, b: f64) -> Self {
        PyAllocation { f_server, b }
    }

    fn __repr__(&self) -> String {
        format!("Allocation(f_server={:e}, b={:e})", self.f_server, self.b)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner() == other.inner()
    }
}

/// DISC-PSO and baseline hyperparameters; keyword arguments use the key names.
#[pyclass(name = "SwarmConfig", module = "edgeprice_py", from_py_object)]
#[derive(Clone)]
struct PySwarmConfig {
    inner: SwarmConfig,
}

#[pymethods]
impl PySwarmConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut cfg = SwarmConfig::default();
        apply_kwargs(kwargs, |k, v| cfg.set(k, v).map_err(value_err))?;
        cfg.validate().map_err(value_err)?;
        Ok(PySwarmConfig { inner: cfg })
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }
    #[getter]
    fn p_n(&self) -> usize {
        self.inner.p_n
    }
    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }
    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max
    }
}

fn pricing_of(coefficients: Option<(f64, f64)>) -> Pricing {
    match coefficients {
        Some((a, b_coef)) => Pricing::Linear(PriceCoefficients { a, b_coef }),
        None => Pricing::Dynamic,
    }
}

fn cfg_or_default(cfg: Option<PySwarmConfig>) -> SwarmConfig {
    cfg.map(|c| c.inner).unwrap_or_default()
}

#[pyfunction]
fn price(s: &PyScenario, a: &PyAllocation) -> f64 {
    dynamic_price(&s.inner, a.inner())
}

/// Priced utilities and the time/energy breakdown. Dynamic pricing unless
/// linear `coefficients=(a, b)` are given.
#[pyfunction]
#[pyo3(signature = (s, a, coefficients=None))]
fn user_utility<'py>(
    py: Python<'py>,
    s: &PyScenario,
    a: &PyAllocation,
    coefficients: Option<(f64, f64)>,
) -> PyResult<Bound<'py, PyDict>> {
    let u = pricing::user_utility(&s.inner, a.inner(), pricing_of(coefficients));
    let d = PyDict::new(py);
    d.set_item("price", u.price)?;
    d.set_item("u_user", u.u_user)?;
    d.set_item("u_server", u.u_server)?;
    d.set_item("w_revenue", u.w_revenue)?;
    d.set_item("chi", u.chi)?;
    d.set_item("upsilon", u.upsilon)?;
    d.set_item("t_offload", u.time.t_offload)?;
    d.set_item("t_save", u.time.t_save)?;
    d.set_item("e_save", u.energy.e_save)?;
    Ok(d)
}

#[pyfunction]
fn dynamic_utility(s: &PyScenario, a: &PyAllocation) -> f64 {
    dynamic_user_utility(&s.inner, a.inner())
}

#[pyfunction]
fn server_utility_factored(s: &PyScenario, a: &PyAllocation) -> f64 {
    server_utility(&s.inner, a.inner())
}

#[pyfunction]
fn times<'py>(py: Python<'py>, s: &PyScenario, a: &PyAllocation) -> PyResult<Bound<'py, PyDict>> {
    let t = time_breakdown(&s.inner, a.inner());
    let d = PyDict::new(py);
    for (k, v) in [
        ("t_local", t.t_local),
        ("r_u", t.r_u),
        ("r_d", t.r_d),
        ("t_u", t.t_u),
        ("t_p", t.t_p),
        ("t_d", t.t_d),
        ("t_offload", t.t_offload),
        ("t_save", t.t_save),
    ] {
        d.set_item(k, v)?;
    }
    Ok(d)
}

#[pyfunction]
fn energies<'py>(py: Python<'py>, s: &PyScenario, a: &PyAllocation) -> PyResult<Bound<'py, PyDict>> {
    let e = energy_breakdown(&s.inner, a.inner());
    let d = PyDict::new(py);
    for (k, v) in [("e_local", e.e_local), ("e_up", e.e_up), ("e_d", e.e_d), ("e_save", e.e_save)] {
        d.set_item(k, v)?;
    }
    Ok(d)
}

/// Linear coefficients `(a, b)` whose critical point is the box corner.
#[pyfunction]
fn corner_coefficients(s: &PyScenario) -> (f64, f64) {
    let pc = default_coefficients(&s.inner);
    (pc.a, pc.b_coef)
}

/// Gradient, Hessian and critical point of the linear-pricing utility.
#[pyfunction]
#[pyo3(signature = (s, a, coefficients=None))]
fn curvature<'py>(
    py: Python<'py>,
    s: &PyScenario,
    a: &PyAllocation,
    coefficients: Option<(f64, f64)>,
) -> PyResult<Bound<'py, PyDict>> {
    let pc = match coefficients {
        Some((a, b_coef)) => PriceCoefficients { a, b_coef },
        None => default_coefficients(&s.inner),
    };
    let r = curvature_report(&s.inner, pc, a.inner());
    let d = PyDict::new(py);
    d.set_item("gradient", (r.grad_f, r.grad_b))?;
    d.set_item("hessian", ((r.h_ff, r.h_fb), (r.h_bf, r.h_bb)))?;
    d.set_item("eigenvalues", (r.lambda1, r.lambda2))?;
    d.set_item("negative_definite", r.negative_definite)?;
    d.set_item("critical_point", PyAllocation::from(critical_point(&s.inner, pc)))?;
    Ok(d)
}

/// `(allocation, u_max)` over the search box.
#[pyfunction]
fn max_utility(s: &PyScenario) -> (PyAllocation, f64) {
    let (a, u) = max_user_utility(&s.inner);
    (a.into(), u)
}

fn parse_algorithm(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(value_err)
}

/// One seeded search maximizing the dynamic-pricing user utility.
#[pyfunction]
#[pyo3(signature = (s, algorithm="disc-pso", cfg=None))]
fn optimize<'py>(
    py: Python<'py>,
    s: &PyScenario,
    algorithm: &str,
    cfg: Option<PySwarmConfig>,
) -> PyResult<Bound<'py, PyDict>> {
    let alg = parse_algorithm(algorithm)?;
    let cfg = cfg_or_default(cfg);
    let scenario = s.inner;
    let r = py
        .detach(move || {
            let (_, u_max) = max_user_utility(&scenario);
            let objective = |a: Allocation| dynamic_user_utility(&scenario, a);
            run_algorithm(alg, &scenario, &objective, u_max, &cfg)
        })
        .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("algorithm", alg.name())?;
    d.set_item("best_value", r.best_value)?;
    d.set_item("best_position", PyAllocation::from(r.best_position))?;
    d.set_item("iterations", r.iterations_used)?;
    d.set_item("converged", r.converged)?;
    d.set_item("seed", r.seed)?;
    d.set_item("evaluations", r.evaluations)?;
    d.set_item("history", r.history)?;
    Ok(d)
}

/// All four algorithms over paired-seed trials.
#[pyfunction]
#[pyo3(signature = (s, trials=50, cfg=None, randomized=false))]
fn compare<'py>(
    py: Python<'py>,
    s: &PyScenario,
    trials: usize,
    cfg: Option<PySwarmConfig>,
    randomized: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = cfg_or_default(cfg);
    let scenario = s.inner;
    let report = py
        .detach(move || {
            if randomized {
                harness::compare_optimizers_randomized(&scenario, &cfg, trials)
            } else {
                harness::compare_optimizers(&scenario, &cfg, trials)
            }
        })
        .map_err(value_err)?;
    let stats = PyDict::new(py);
    for t in &report.stats {
        let d = PyDict::new(py);
        d.set_item("mean_value", t.mean_value)?;
        d.set_item("std_value", t.std_value)?;
        d.set_item("mean_iterations", t.mean_iterations)?;
        d.set_item("values", &t.value_list)?;
        d.set_item("iterations", &t.iteration_list)?;
        d.set_item("converged", &t.converged_list)?;
        stats.set_item(t.algorithm.name(), d)?;
    }
    let out = PyDict::new(py);
    out.set_item("u_max", report.u_max)?;
    out.set_item("stats", stats)?;
    out.set_item("csv", harness::csv_string(&report.records))?;
    Ok(out)
}

/// Rows of a dynamic-pricing sweep as dicts.
#[pyfunction]
#[pyo3(signature = (s, param, grid, allocation=None))]
fn sweep<'py>(
    py: Python<'py>,
    s: &PyScenario,
    param: &str,
    grid: Vec<f64>,
    allocation: Option<PyAllocation>,
) -> PyResult<Bound<'py, PyList>> {
    let param: SweepParam = param.parse().map_err(value_err)?;
    let a = allocation.map(|a| a.inner()).unwrap_or_else(|| Allocation::box_max(&s.inner));
    let rows = harness::run_sweep(&SweepSpec::new(param, grid, s.inner, a)).map_err(value_err)?;
    let list = PyList::empty(py);
    for r in rows {
        let d = PyDict::new(py);
        d.set_item("value", r.value)?;
        d.set_item("price", r.price)?;
        d.set_item("u_user", r.u_user)?;
        d.set_item("u_server", r.u_server)?;
        d.set_item("t_offload", r.t_offload)?;
        d.set_item("t_save", r.t_save)?;
        d.set_item("e_save", r.e_save)?;
        list.append(d)?;
    }
    Ok(list)
}

/// `(name, passed, actual)` for every built-in anchor.
#[pyfunction]
#[pyo3(signature = (s=None, cfg=None))]
fn check_anchors(s: Option<PyScenario>, cfg: Option<PySwarmConfig>) -> Vec<(String, bool, f64)> {
    let s = s.map(|s| s.inner).unwrap_or_default();
    run_anchors(&s, &cfg_or_default(cfg))
        .into_iter()
        .map(|r| (r.name, r.passed, r.actual))
        .collect()
}

#[pymodule]
fn edgeprice_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyAllocation>()?;
    m.add_class::<PySwarmConfig>()?;
    m.add_function(wrap_pyfunction!(price, m)?)?;
    m.add_function(wrap_pyfunction!(user_utility, m)?)?;
    m.add_function(wrap_pyfunction!(dynamic_utility, m)?)?;
    m.add_function(wrap_pyfunction!(server_utility_factored, m)?)?;
    m.add_function(wrap_pyfunction!(times, m)?)?;
    m.add_function(wrap_pyfunction!(energies, m)?)?;
    m.add_function(wrap_pyfunction!(corner_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(curvature, m)?)?;
    m.add_function(wrap_pyfunction!(max_utility, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(check_anchors, m)?)?;
    m.add("ALGORITHMS", Algorithm::ALL.map(|a| a.name()).to_vec())?;
    Ok(())
}
