//! Python bindings for `nfg-core`.

use nfg_core::cover::{bethe_cover_bounds, build_cover, zbm_exhaustive, zbm_montecarlo, zbm_typeformula, CoverSpec, ZbmMethod};
use nfg_core::experiment::{experiment as run_experiment, rows_to_csv, summary_to_csv, ExperimentSpec};
use nfg_core::gen::{gen as generate, Ensemble, GeneratorSpec, Topology};
use nfg_core::lct::{check_condition, loop_series, transform, LctResult};
use nfg_core::limits::Limits;
use nfg_core::nfg::{parse as parse_doc, partition_contract_with, partition_exact_with, serialize, validate};
use nfg_core::spa::{spa_run, Init, SpaOptions};
use nfg_core::{GraphKind, NfgError, C64};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(nfg_py, NfgException, PyException);
create_exception!(nfg_py, CapacityError, NfgException);
create_exception!(nfg_py, NonConvergenceError, NfgException);

fn err(e: NfgError) -> PyErr {
    let msg = e.to_string();
    if e.is_capacity() || matches!(e, NfgError::BigCount(_)) {
        CapacityError::new_err(msg)
    } else if matches!(e, NfgError::NonConvergence(_)) {
        NonConvergenceError::new_err(msg)
    } else {
        NfgException::new_err(msg)
    }
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn limits() -> PyResult<Limits> {
    Limits::from_env().map_err(err)
}

fn spa_options(tol: f64, max_iter: usize, restarts: usize, damping: f64, seed: u64, random_init: bool) -> SpaOptions {
    SpaOptions {
        init: if random_init { Init::SeededRandom } else { Init::Uniform },
        max_iter,
        tol_fp: tol,
        damping,
        restarts,
        seed,
        ..SpaOptions::default()
    }
}

/// A normal factor graph (standard or double-edge).
#[pyclass(name = "FactorGraph", module = "nfg_py", frozen)]
struct PyFactorGraph {
    inner: nfg_core::FactorGraph,
}

impl PyFactorGraph {
    fn lct(&self, opts: &SpaOptions) -> PyResult<LctResult> {
        let report = spa_run(&self.inner, opts);
        transform(&self.inner, &report).map_err(err)
    }
}

#[pymethods]
impl PyFactorGraph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_doc(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serialize(&self.inner).map_err(err)
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind().to_string()
    }

    #[getter]
    fn num_nodes(&self) -> usize {
        self.inner.num_nodes()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.num_edges()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().iter().map(|e| e.endpoints).collect()
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &validate(&self.inner).map_err(err)?)
    }

    /// Exact partition function by enumeration ("enumerate") or contraction ("contract").
    #[pyo3(signature = (method = "contract"))]
    fn partition(&self, method: &str) -> PyResult<C64> {
        let l = limits()?;
        match method {
            "enumerate" => partition_exact_with(&self.inner, &l),
            "contract" => partition_contract_with(&self.inner, &l),
            other => return Err(PyValueError::new_err(format!("unknown method `{other}`"))),
        }
        .map_err(err)
    }

    /// Runs the sum-product algorithm and returns its report as a dict.
    #[pyo3(signature = (tol = 1e-9, max_iter = 10_000, restarts = 8, damping = 0.0, seed = 0, random_init = false))]
    fn spa<'py>(
        &self,
        py: Python<'py>,
        tol: f64,
        max_iter: usize,
        restarts: usize,
        damping: f64,
        seed: u64,
        random_init: bool,
    ) -> PyResult<Bound<'py, PyAny>> {
        let report = spa_run(&self.inner, &spa_options(tol, max_iter, restarts, damping, seed, random_init));
        to_py(py, &report)
    }

    /// Loop-calculus transform at the SPA fixed point; returns the transformed graph.
    #[pyo3(signature = (tol = 1e-9, seed = 0))]
    fn transformed(&self, tol: f64, seed: u64) -> PyResult<Self> {
        let lr = self.lct(&spa_options(tol, 10_000, 8, 0.0, seed, false))?;
        Ok(Self { inner: lr.transformed })
    }

    #[pyo3(signature = (tol = 1e-9, seed = 0))]
    fn loop_series<'py>(&self, py: Python<'py>, tol: f64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let lr = self.lct(&spa_options(tol, 10_000, 8, 0.0, seed, false))?;
        to_py(py, &loop_series(&lr, &limits()?).map_err(err)?)
    }

    /// The checkable sufficient condition as a dict with `holds`.
    #[pyo3(signature = (tol = 1e-9, seed = 0))]
    fn condition<'py>(&self, py: Python<'py>, tol: f64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let lr = self.lct(&spa_options(tol, 10_000, 8, 0.0, seed, false))?;
        let c = check_condition(&lr);
        let d = to_py(py, &c)?;
        d.set_item("holds", c.holds())?;
        Ok(d)
    }

    #[pyo3(signature = (m, tol = 1e-9, seed = 0))]
    fn bounds<'py>(&self, py: Python<'py>, m: usize, tol: f64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let lr = self.lct(&spa_options(tol, 10_000, 8, 0.0, seed, false))?;
        to_py(py, &bethe_cover_bounds(&self.inner, &lr, m, &limits()?).map_err(err)?)
    }

    /// Degree-M Bethe partition function; returns a dict with `value`, `stderr` and `root`.
    #[pyo3(signature = (m, method = "typeformula", samples = 1000, seed = 0))]
    fn zbm<'py>(&self, py: Python<'py>, m: usize, method: &str, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let l = limits()?;
        let method: ZbmMethod = method.parse().map_err(err)?;
        let est = match method {
            ZbmMethod::Exhaustive => zbm_exhaustive(&self.inner, m, &l),
            ZbmMethod::MonteCarlo => zbm_montecarlo(&self.inner, m, samples, seed, &l),
            ZbmMethod::TypeFormula => zbm_typeformula(&self.inner, m, &l),
        }
        .map_err(err)?;
        let d = to_py(py, &est)?;
        d.set_item("root", est.root().ok())?;
        Ok(d)
    }

    /// The M-cover given by one permutation of `0..m` per edge.
    fn cover(&self, m: usize, sigma: Vec<Vec<usize>>) -> PyResult<Self> {
        let spec = CoverSpec::new(m, sigma).map_err(err)?;
        Ok(Self { inner: build_cover(&self.inner, &spec).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "FactorGraph(kind={}, nodes={}, edges={})",
            self.inner.kind(),
            self.inner.num_nodes(),
            self.inner.num_edges()
        )
    }
}

fn generator(topology: &str, kind: &str, alphabet: usize, ensemble: Option<&str>, eta: f64, seed: u64) -> PyResult<GeneratorSpec> {
    let topology: Topology = topology.parse().map_err(err)?;
    let kind: GraphKind = kind.parse().map_err(err)?;
    let ensemble = match (ensemble, kind) {
        (Some("psd-random"), _) | (None, GraphKind::DoubleEdge) => Ensemble::PsdRandom,
        (Some("psd-near-identity"), _) => Ensemble::PsdNearIdentity { eta },
        (Some("positive-s-nfg"), _) | (None, GraphKind::Standard) => Ensemble::PositiveSnfg,
        (Some(other), _) => return Err(PyValueError::new_err(format!("unknown ensemble `{other}`"))),
    };
    Ok(GeneratorSpec { topology, alphabet, kind, ensemble, seed })
}

/// Draws a seeded random graph.
#[pyfunction]
#[pyo3(signature = (topology = "fig3", kind = "double-edge", alphabet = 2, ensemble = None, eta = 0.01, seed = 0))]
fn gen(topology: &str, kind: &str, alphabet: usize, ensemble: Option<&str>, eta: f64, seed: u64) -> PyResult<PyFactorGraph> {
    let spec = generator(topology, kind, alphabet, ensemble, eta, seed)?;
    Ok(PyFactorGraph { inner: generate(&spec).map_err(err)? })
}

#[pyfunction]
fn parse(text: &str) -> PyResult<PyFactorGraph> {
    PyFactorGraph::from_json(text)
}

/// Batch experiment; returns `(rows_csv, summary_csv)`.
#[pyfunction]
#[pyo3(signature = (topology = "fig3", instances = 100, m_max = 3, ensemble = None, eta = 0.01, seed = 0, samples = 1000))]
fn experiment(
    topology: &str,
    instances: usize,
    m_max: usize,
    ensemble: Option<&str>,
    eta: f64,
    seed: u64,
    samples: usize,
) -> PyResult<(String, String)> {
    let spec = ExperimentSpec {
        generator: generator(topology, "double-edge", 2, ensemble, eta, seed)?,
        instances,
        m_max,
        samples,
        spa: SpaOptions::default(),
        limits: limits()?,
    };
    let r = run_experiment(&spec).map_err(err)?;
    Ok((rows_to_csv(&r.rows, m_max).map_err(err)?, summary_to_csv(&r.summary).map_err(err)?))
}

#[pymodule]
fn nfg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFactorGraph>()?;
    m.add_function(wrap_pyfunction!(gen, m)?)?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(experiment, m)?)?;
    m.add("NfgError", m.py().get_type::<NfgException>())?;
    m.add("CapacityError", m.py().get_type::<CapacityError>())?;
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    Ok(())
}
