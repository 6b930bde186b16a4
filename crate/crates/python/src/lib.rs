//! Python bindings: registry listing, verification, sweeps, probes and the
//! exact q-polynomial operators. Rationals cross the boundary as `"p/q"` text.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qmultisum::field::{format_rational, parse_rational};
use qmultisum::operator::{self, QPoly as CorePoly};
use qmultisum::registry::{self as reg, Bounds, Reading, Reduction};
use qmultisum::{qcore, Error, ExactScalar, IdentityId, IdentityInstance, NumericConfig, ReportDocument, VerifyOptions};

create_exception!(qmultisum_py, SchemaError, PyValueError);
create_exception!(qmultisum_py, PoleError, PyArithmeticError);
create_exception!(qmultisum_py, DomainError, PyArithmeticError);
create_exception!(qmultisum_py, ConvergenceError, PyArithmeticError);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Schema(_) => SchemaError::new_err(msg),
        Error::Pole(_) => PoleError::new_err(msg),
        Error::Domain(_) => DomainError::new_err(msg),
        Error::Convergence(_) | Error::Exhausted(_) => ConvergenceError::new_err(msg),
    }
}

fn rational(text: &str) -> PyResult<ExactScalar> {
    parse_rational(text).map_err(py_err)
}

fn identity(id: &str) -> PyResult<IdentityId> {
    id.parse().map_err(py_err)
}

fn instance(id: &str, params: &str) -> PyResult<IdentityInstance> {
    IdentityInstance::parse_assignments(identity(id)?, params).map_err(py_err)
}

fn options(strict_printed: bool, prec: Option<usize>, terms: Option<usize>, tol: Option<f64>) -> PyResult<VerifyOptions> {
    let mut numeric = NumericConfig::default();
    if let Some(p) = prec {
        numeric = numeric.with_prec(p);
    }
    if let Some(k) = terms {
        numeric = numeric.with_terms(k).fixed();
    }
    if let Some(t) = tol {
        numeric = numeric.with_tol(t);
    }
    numeric.validate().map_err(py_err)?;
    let reading = if strict_printed { Reading::Printed } else { Reading::Corrected };
    Ok(VerifyOptions { reading, numeric, ..Default::default() })
}

/// One verification result.
#[pyclass(frozen, module = "qmultisum_py")]
struct Report(reg::VerificationReport);

#[pymethods]
impl Report {
    #[getter]
    fn id(&self) -> &'static str {
        self.0.id.as_str()
    }

    #[getter]
    fn check(&self) -> String {
        self.0.check.clone()
    }

    #[getter]
    fn instance(&self) -> String {
        self.0.instance.clone()
    }

    #[getter]
    fn outcome(&self) -> &'static str {
        self.0.outcome.as_str()
    }

    #[getter]
    fn lhs(&self) -> Option<String> {
        self.0.lhs.as_ref().map(|v| v.text())
    }

    #[getter]
    fn rhs(&self) -> Option<String> {
        self.0.rhs.as_ref().map(|v| v.text())
    }

    #[getter]
    fn residual(&self) -> Option<String> {
        self.0.residual.as_ref().map(|v| v.text())
    }

    #[getter]
    fn tail_bound(&self) -> Option<String> {
        self.0.tail_bound.as_ref().map(|v| v.text())
    }

    #[getter]
    fn note(&self) -> Option<String> {
        self.0.note.clone()
    }

    #[getter]
    fn passed(&self) -> bool {
        self.0.passed()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("report serializes")
    }

    fn __repr__(&self) -> String {
        format!("Report({} [{}]: {})", self.0.id, self.0.instance, self.0.outcome.as_str())
    }
}

/// Registry entries as dictionaries.
#[pyfunction]
fn registry(py: Python<'_>) -> PyResult<Vec<Bound<'_, PyDict>>> {
    reg::registry()
        .iter()
        .map(|e| {
            let d = PyDict::new(py);
            d.set_item("id", e.id.as_str())?;
            d.set_item("equation", e.equation)?;
            d.set_item("section", e.section)?;
            d.set_item("backend", e.backend.as_str())?;
            d.set_item("params", e.param_names())?;
            d.set_item("title", e.title)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (id, params, strict_printed = false, prec = None, terms = None, tol = None))]
fn verify(
    id: &str,
    params: &str,
    strict_printed: bool,
    prec: Option<usize>,
    terms: Option<usize>,
    tol: Option<f64>,
) -> PyResult<Report> {
    let opts = options(strict_printed, prec, terms, tol)?;
    qmultisum::verify_with(&instance(id, params)?, &opts).map(Report).map_err(py_err)
}

/// Seeded random instance, returned as `key=value,...` text.
#[pyfunction]
#[pyo3(signature = (id, seed, bounds = ""))]
fn random_instance(id: &str, seed: u64, bounds: &str) -> PyResult<String> {
    let b = Bounds::parse(bounds).map_err(py_err)?;
    let inst = reg::random_instance(identity(id)?, seed, &b).map_err(py_err)?;
    Ok(inst.assignments().into_iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(","))
}

/// Verify `trials` seeded instances (seeds `seed .. seed + trials`) and
/// return the JSON report document.
#[pyfunction]
#[pyo3(signature = (id, seed, trials, bounds = ""))]
fn sweep(id: &str, seed: u64, trials: u64, bounds: &str) -> PyResult<String> {
    if trials == 0 {
        return Err(SchemaError::new_err("trials must be at least 1"));
    }
    let b = Bounds::parse(bounds).map_err(py_err)?;
    let id = identity(id)?;
    let opts = VerifyOptions::default();
    let reports = (0..trials)
        .map(|t| {
            let inst = reg::random_instance(id, seed.wrapping_add(t), &b)?;
            Ok(qmultisum::verify_with(&inst, &opts)
                .unwrap_or_else(|e| reg::VerificationReport::from_error(&inst, "verify", opts.reading, &e)))
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(py_err)?;
    let mut config = std::collections::BTreeMap::new();
    config.insert("command".to_string(), "sweep".to_string());
    config.insert("id".to_string(), id.to_string());
    config.insert("seed".to_string(), seed.to_string());
    config.insert("trials".to_string(), trials.to_string());
    Ok(ReportDocument::new(config, reports).to_json())
}

/// Real-order continuation at order `a`; always exploratory.
#[pyfunction]
#[pyo3(signature = (id, a, params, prec = None))]
fn probe(id: &str, a: &str, params: &str, prec: Option<usize>) -> PyResult<Report> {
    let opts = options(false, prec, None, None)?;
    reg::probe_report(&instance(id, params)?, &rational(a)?, &opts).map(Report).map_err(py_err)
}

/// Check a named reduction such as `"TA1.8->P1.3"` on a target instance.
#[pyfunction]
fn reduction_check(name: &str, params: &str) -> PyResult<Report> {
    let red: Reduction = name.parse().map_err(py_err)?;
    let target = instance(red.target().as_str(), params)?;
    reg::reduction_check(red, &target).map(|r| Report(r.to_report())).map_err(py_err)
}

#[pyfunction]
fn reductions() -> Vec<String> {
    Reduction::ALL.iter().map(|r| r.name().to_string()).collect()
}

/// `(a; q)_n` as exact rational text.
#[pyfunction]
fn q_pochhammer(a: &str, q: &str, n: u32) -> PyResult<String> {
    Ok(format_rational(&qcore::q_pochhammer(&rational(a)?, &rational(q)?, n)))
}

#[pyfunction]
fn gauss_binomial(n: u32, r: u32, q: &str) -> PyResult<String> {
    qcore::gauss_binomial(n, r, &rational(q)?).map(|v| format_rational(&v)).map_err(py_err)
}

/// Polynomial in `x` with exact coefficients over a fixed base `q`.
#[pyclass(frozen, module = "qmultisum_py", name = "QPoly")]
struct PyQPoly(CorePoly);

#[pymethods]
impl PyQPoly {
    #[new]
    fn new(q: &str, coeffs: Vec<String>) -> PyResult<Self> {
        let cs = coeffs.iter().map(|c| rational(c)).collect::<PyResult<Vec<_>>>()?;
        Ok(PyQPoly(CorePoly::new(rational(q)?, cs)))
    }

    /// `1 - (x; q)_n`.
    #[staticmethod]
    fn one_minus_poch(n: u32, q: &str) -> PyResult<Self> {
        Ok(PyQPoly(operator::poly_one_minus_poch(n, &rational(q)?)))
    }

    fn coeffs(&self) -> Vec<String> {
        self.0.coeffs().iter().map(format_rational).collect()
    }

    fn eval(&self, x: &str) -> PyResult<String> {
        Ok(format_rational(&self.0.eval(&rational(x)?)))
    }

    fn q_derivative(&self) -> Self {
        PyQPoly(operator::q_derivative(&self.0))
    }

    fn jackson_integral(&self) -> PyResult<Self> {
        operator::jackson_integral(&self.0).map(PyQPoly).map_err(py_err)
    }

    fn op_p(&self, m: u32) -> PyResult<Self> {
        operator::op_p(&self.0, m).map(PyQPoly).map_err(py_err)
    }

    fn op_t(&self, m: u32) -> PyResult<Self> {
        operator::op_t(&self.0, m).map(PyQPoly).map_err(py_err)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("QPoly(q={}, coeffs={:?})", format_rational(self.0.q()), self.coeffs())
    }
}

#[pymodule]
fn qmultisum_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("SchemaError", py.get_type::<SchemaError>())?;
    m.add("PoleError", py.get_type::<PoleError>())?;
    m.add("DomainError", py.get_type::<DomainError>())?;
    m.add("ConvergenceError", py.get_type::<ConvergenceError>())?;
    m.add_class::<Report>()?;
    m.add_class::<PyQPoly>()?;
    for f in [
        wrap_pyfunction!(registry, m)?,
        wrap_pyfunction!(verify, m)?,
        wrap_pyfunction!(random_instance, m)?,
        wrap_pyfunction!(sweep, m)?,
        wrap_pyfunction!(probe, m)?,
        wrap_pyfunction!(reduction_check, m)?,
        wrap_pyfunction!(reductions, m)?,
        wrap_pyfunction!(q_pochhammer, m)?,
        wrap_pyfunction!(gauss_binomial, m)?,
    ] {
        m.add_function(f)?;
    }
    Ok(())
}
