//! Python bindings: `Field` and `Poly` classes plus experiment runners.
//!
//! Structured results (verdicts, measurements, incidence checks) cross the
//! boundary as JSON strings; decode them with `json.loads`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ffexpand::expansion::{self, ImageOptions, SampleMode};
use ffexpand::gf::FieldCtx;
use ffexpand::mvpoly::MvPoly;
use ffexpand::report::{self, CollectionSpec};
use ffexpand::structure::{self, AnnihilatorBudget, NicenessOptions};

fn err(e: ffexpand::error::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn as_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("result JSON")
}

/// A finite field F_q with q = p^k.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct Field {
    ctx: FieldCtx,
}

#[pymethods]
impl Field {
    /// Field("7") or Field("3^2").
    #[new]
    fn new(spec: &str) -> PyResult<Field> {
        Ok(Field { ctx: FieldCtx::parse_spec(spec).map_err(err)? })
    }

    fn q(&self) -> u64 {
        self.ctx.q()
    }

    fn p(&self) -> u64 {
        self.ctx.p()
    }

    fn k(&self) -> u32 {
        self.ctx.k()
    }

    /// Parses polynomial text; the variable count is inferred when omitted.
    #[pyo3(signature = (text, nvars=None))]
    fn poly(&self, text: &str, nvars: Option<usize>) -> PyResult<Poly> {
        let nvars = nvars.unwrap_or_else(|| report::infer_nvars(text));
        let inner = MvPoly::parse(&self.ctx, nvars, text).map_err(err)?;
        Ok(Poly { inner })
    }

    fn __repr__(&self) -> String {
        format!("Field(\"{}\")", self.ctx.spec_string())
    }
}

/// A sparse multivariate polynomial over a fixed field.
#[pyclass(from_py_object)]
#[derive(Clone)]
struct Poly {
    inner: MvPoly,
}

#[pymethods]
impl Poly {
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }

    fn degree(&self) -> Option<usize> {
        self.inner.total_degree()
    }

    /// Evaluates at a point of packed element values; returns a packed value.
    fn eval(&self, point: Vec<u64>) -> PyResult<u64> {
        let ctx = self.inner.ctx();
        let elems: Result<Vec<_>, _> = point.iter().map(|&v| ctx.from_packed(v)).collect();
        let value = self.inner.eval(&elems.map_err(err)?).map_err(err)?;
        Ok(value.packed())
    }

    /// Niceness verdict as JSON: status, distinguished variable, choices.
    fn is_nice(&self) -> PyResult<String> {
        Ok(as_json(&structure::is_nice(&self.inner).map_err(err)?))
    }

    /// Ternary-quadratic classification as JSON.
    fn classify_quadratic(&self) -> PyResult<String> {
        Ok(as_json(&structure::classify_quadratic(&self.inner).map_err(err)?))
    }

    /// Measures |P(X_1, ..., X_k)| on per-variable sets of the given sizes,
    /// sampled in the given mode ("full", "random", or "interval"), and
    /// returns the measurement as JSON.
    #[pyo3(signature = (sizes, mode="full", seed=0))]
    fn image(&self, sizes: Vec<u64>, mode: &str, seed: u64) -> PyResult<String> {
        let mode = match mode {
            "full" => SampleMode::Full,
            "random" => SampleMode::UniformRandom,
            "interval" => SampleMode::Interval,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown sampling mode {other:?}; use full, random, or interval"
                )))
            }
        };
        let sets = expansion::sample_sets(self.inner.ctx(), &sizes, mode, seed).map_err(err)?;
        let m = expansion::deficiency_stat(&self.inner, &sets, 1.0, &ImageOptions::default())
            .map_err(err)?;
        Ok(as_json(&m))
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Poly(\"{}\")", self.inner)
    }
}

/// Searches for an algebraic relation among the polynomials; JSON report.
#[pyfunction]
#[pyo3(signature = (polys, bound=None))]
fn annihilator(polys: Vec<Poly>, bound: Option<usize>) -> PyResult<String> {
    let inner: Vec<MvPoly> = polys.into_iter().map(|p| p.inner).collect();
    let opts = NicenessOptions { bound_override: bound, budget: AnnihilatorBudget::default() };
    Ok(as_json(&structure::classify_family(&inner, &opts).map_err(err)?))
}

/// Runs seeded random point-curve trials and returns the summary as JSON.
#[pyfunction]
#[pyo3(signature = (field, degree, points, curves, trials, seed=0))]
fn incidence_trials(
    field: &str,
    degree: usize,
    points: u64,
    curves: u64,
    trials: u64,
    seed: u64,
) -> PyResult<String> {
    let ctx = FieldCtx::parse_spec(field).map_err(err)?;
    let payload = report::run_incidence(
        &ctx,
        degree,
        &CollectionSpec::Random { size: points, seed: None },
        &CollectionSpec::Random { size: curves, seed: None },
        trials,
        seed,
    )
    .map_err(err)?;
    Ok(as_json(&payload))
}

/// Builds the structured sets for a*x^2 + b*y^2 + c*z^2 over F_p and
/// measures the image; JSON report.
#[pyfunction]
fn counterexample(prime: u64, a: i64, b: i64, c: i64) -> PyResult<String> {
    let ctx = FieldCtx::parse_spec(&prime.to_string()).map_err(err)?;
    Ok(as_json(&report::run_counterexample(&ctx, &[a, b, c]).map_err(err)?))
}

#[pymodule]
fn ffexpand_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Field>()?;
    m.add_class::<Poly>()?;
    m.add_function(wrap_pyfunction!(annihilator, m)?)?;
    m.add_function(wrap_pyfunction!(incidence_trials, m)?)?;
    m.add_function(wrap_pyfunction!(counterexample, m)?)?;
    Ok(())
}
