//! Python bindings for the `g2inv` library.

use ::g2inv as core;
use core::catalog::{self, ParamValue, Params};
use core::cli::invariants_report;
use core::einstein;
use core::equivalence::{characterize_vdb as characterize, compare_sources, parse_pair, DEFAULT_EQUIV_TOL};
use core::invariants::{first, relations_first, RelationResidual};
use core::metric::DEFAULT_TOL;
use core::rank::{jacobian_rank, random_probe, InvariantSet, DEFAULT_EPS};
use core::report::to_json_string;
use core::second::relations_second;
use core::source::MetricSource;
use core::transform::PseudoTransform;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

fn err(e: core::error::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (to_json_string(v),))
}

/// A metric: catalog entry, JSON document, or transformed metric.
#[pyclass(module = "g2inv")]
pub struct Metric {
    inner: MetricSource,
}

#[pymethods]
impl Metric {
    /// Catalog metric with optional `{name: number | expression}` parameters.
    #[staticmethod]
    #[pyo3(signature = (name, params=None))]
    fn catalog(name: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<Metric> {
        let mut p = Params::new();
        if let Some(d) = params {
            for (k, v) in d.iter() {
                let val = match v.extract::<f64>() {
                    Ok(x) => ParamValue::Num(x),
                    Err(_) => ParamValue::Expr(v.extract::<String>()?),
                };
                p.insert(k.extract::<String>()?, val);
            }
        }
        Ok(Metric { inner: MetricSource::Plain(catalog::catalog(name, &p).map_err(err)?) })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Metric> {
        Ok(Metric { inner: MetricSource::from_json_str(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        to_json_string(&self.inner.to_json())
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    /// `((t1_min, t1_max), (t2_min, t2_max))` or `None`.
    #[getter]
    fn domain(&self) -> Option<((f64, f64), (f64, f64))> {
        self.inner.domain().map(|r| (r.t1, r.t2))
    }

    /// The six fundamental invariants at a base-chart point.
    fn fundamentals(&self, t1: f64, t2: f64) -> PyResult<Vec<f64>> {
        let s = self.inner.sample((t1, t2), 1).map_err(err)?;
        Ok(first(&s.jets).six().to_vec())
    }

    /// Full invariant report as a dict.
    #[pyo3(signature = (t1, t2, order=1))]
    fn invariants<'py>(&self, py: Python<'py>, t1: f64, t2: f64, order: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &invariants_report(&self.inner, (t1, t2), order, DEFAULT_TOL).map_err(err)?)
    }

    /// Normalized Λ-vacuum residual.
    #[pyo3(signature = (t1, t2, cosmological=0.0))]
    fn einstein_residual(&self, t1: f64, t2: f64, cosmological: f64) -> PyResult<f64> {
        let s = self.inner.sample((t1, t2), 2).map_err(err)?;
        Ok(einstein::residual(&s.jets, cosmological).map_err(err)?.normalized)
    }

    /// Relation residuals by name; `suite` is `first`, `second` or `onshell`.
    #[pyo3(signature = (t1, t2, suite="first", cosmological=0.0))]
    fn relations(&self, t1: f64, t2: f64, suite: &str, cosmological: f64) -> PyResult<Vec<(String, f64, bool)>> {
        let order = if suite == "onshell" { 3 } else { 2 };
        let j = self.inner.sample((t1, t2), order).map_err(err)?.jets;
        let rs: Vec<RelationResidual> = match suite {
            "first" => relations_first(&j, DEFAULT_TOL),
            "second" => relations_second(&j, DEFAULT_TOL).map_err(err)?,
            "onshell" => einstein::onshell_relations(&j, cosmological, DEFAULT_TOL).map_err(err)?,
            _ => return Err(PyValueError::new_err(format!("unknown suite '{suite}'"))),
        };
        Ok(rs.into_iter().map(|r| (r.name, r.residual, r.skipped.is_some())).collect())
    }

    /// This metric carried through `transform`.
    fn transformed(&self, transform: &Transform) -> PyResult<Metric> {
        match &self.inner {
            MetricSource::Plain(m) => Ok(Metric {
                inner: MetricSource::Transformed {
                    name: format!("{}_transformed", m.name),
                    base: m.clone(),
                    transform: transform.inner.clone(),
                },
            }),
            MetricSource::Transformed { .. } => Err(PyValueError::new_err("metric is already transformed")),
        }
    }

    fn __repr__(&self) -> String {
        format!("Metric('{}')", self.inner.name())
    }
}

/// A change of orbit-space coordinates combined with a Killing-coordinate shift.
#[pyclass(module = "g2inv")]
pub struct Transform {
    inner: PseudoTransform,
}

#[pymethods]
impl Transform {
    #[new]
    fn new(phi1: &str, phi2: &str, psi1: &str, psi2: &str, alpha: [[f64; 2]; 2]) -> PyResult<Transform> {
        Ok(Transform { inner: PseudoTransform::parse([phi1, phi2], [psi1, psi2], alpha).map_err(err)? })
    }

    #[staticmethod]
    fn random(seed: u64) -> Transform {
        Transform { inner: PseudoTransform::random(&mut ChaCha8Rng::seed_from_u64(seed)) }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Transform> {
        Ok(Transform { inner: PseudoTransform::from_json_str(text).map_err(err)? })
    }

    fn to_json(&self) -> String {
        to_json_string(&self.inner.to_json())
    }

    fn image(&self, t1: f64, t2: f64) -> PyResult<(f64, f64)> {
        self.inner.image((t1, t2)).map_err(err)
    }

    /// `(ε₁, ε₂)` at a point.
    fn signs(&self, t1: f64, t2: f64) -> PyResult<(f64, f64)> {
        self.inner.signs((t1, t2)).map_err(err)
    }
}

/// Signature comparison; returns a dict with `verdict` and diagnostics.
#[pyfunction]
#[pyo3(signature = (a, b, grid=12, pair="Crho,lC", tol=DEFAULT_EQUIV_TOL))]
fn compare<'py>(
    py: Python<'py>,
    a: &Metric,
    b: &Metric,
    grid: usize,
    pair: &str,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let pair = parse_pair(pair).map_err(err)?;
    let c = compare_sources(&a.inner, &b.inner, grid, pair, tol, None).map_err(err)?.comparison;
    let doc = json!({
        "verdict": c.verdict.name(),
        "coverage_a": c.coverage_a,
        "coverage_b": c.coverage_b,
        "matched": c.matched,
        "max_discrepancy": c.max_discrepancy,
        "note": c.note,
    });
    to_py(py, &doc)
}

/// Whether the metric matches the Van den Bergh invariant relations on an
/// `n x n` grid of its domain.
#[pyfunction]
#[pyo3(signature = (m, n=5, tol=1e-8))]
fn characterize_vdb(m: &Metric, n: usize, tol: f64) -> PyResult<bool> {
    let rect = m.inner.domain().ok_or_else(|| PyValueError::new_err("metric has no domain"))?;
    Ok(characterize(&m.inner, &rect.grid(n, n), tol).map_err(err)?.holds)
}

/// Numerical Jacobian rank of an invariant set at a seeded random probe.
#[pyfunction]
#[pyo3(signature = (set, seed, eps=DEFAULT_EPS))]
fn rank(set: &str, seed: u64, eps: f64) -> PyResult<usize> {
    let set = InvariantSet::from_name(set).map_err(err)?;
    let j = random_probe(&mut ChaCha8Rng::seed_from_u64(seed), set.jet_order());
    Ok(jacobian_rank(set, &j, eps).map_err(err)?.rank)
}

#[pyfunction]
fn catalog_names() -> Vec<&'static str> {
    catalog::NAMES.to_vec()
}

#[pymodule]
fn g2inv(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Metric>()?;
    m.add_class::<Transform>()?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(characterize_vdb, m)?)?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    Ok(())
}
