//! Python bindings: coefficient expressions, problem files, the analysis
//! pipeline and the pencil eigen kernels.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

use indefsl_core::budgets::{gap_count_bound, CountVariant};
use indefsl_core::coeff::ScanPlan;
use indefsl_core::eigen::{indefinite_eigs, inertia_count, EigOptions, SymTridiag};
use indefsl_core::pipeline::run_pipeline;
use indefsl_core::problem::ProblemSpec;
use indefsl_core::serialize::to_json;
use indefsl_core::spectra::{essential_section, level_spectrum};
use indefsl_core::{CoeffExpr, Error};

create_exception!(indefsl, ValidationError, PyValueError, "Invalid input: expressions, problem files or arguments.");
create_exception!(indefsl, NumericalError, PyArithmeticError, "A numerical method failed to converge or broke down.");

fn py_err(e: Error) -> PyErr {
    if e.is_validation() {
        ValidationError::new_err(e.to_string())
    } else {
        NumericalError::new_err(e.to_string())
    }
}

/// A parsed coefficient expression in `x`.
#[pyclass(name = "Expr", frozen)]
struct PyExpr {
    inner: CoeffExpr,
}

#[pymethods]
impl PyExpr {
    #[new]
    fn new(src: &str) -> PyResult<Self> {
        CoeffExpr::parse(src).map(|inner| PyExpr { inner }).map_err(py_err)
    }

    fn eval(&self, x: f64) -> PyResult<f64> {
        self.inner.eval(x).map_err(py_err)
    }

    fn __call__(&self, x: f64) -> PyResult<f64> {
        self.eval(x)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr('{}')", self.inner)
    }
}

/// A problem file: coefficients, window, endpoint metadata and numerics.
#[pyclass(name = "Problem")]
struct PyProblem {
    inner: ProblemSpec,
}

#[pymethods]
impl PyProblem {
    #[new]
    #[pyo3(signature = (name, r, p, q))]
    fn new(name: &str, r: &str, p: &str, q: &str) -> PyResult<Self> {
        let inner = ProblemSpec::new(name, r, p, q);
        inner.validate().map_err(py_err)?;
        Ok(PyProblem { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = ProblemSpec::from_json(text).map_err(py_err)?;
        inner.validate().map_err(py_err)?;
        Ok(PyProblem { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn levels(&self) -> Vec<f64> {
        self.inner.numerics.levels.clone()
    }

    #[setter]
    fn set_levels(&mut self, levels: Vec<f64>) -> PyResult<()> {
        let mut spec = self.inner.clone();
        spec.numerics.levels = levels;
        spec.validate().map_err(py_err)?;
        self.inner = spec;
        Ok(())
    }

    #[getter]
    fn density(&self) -> f64 {
        self.inner.numerics.density
    }

    #[setter]
    fn set_density(&mut self, density: f64) -> PyResult<()> {
        let mut spec = self.inner.clone();
        spec.numerics.density = density;
        spec.validate().map_err(py_err)?;
        self.inner = spec;
        Ok(())
    }

    /// Full analysis report as JSON.
    fn analyze(&self, py: Python<'_>) -> PyResult<String> {
        let spec = self.inner.clone();
        py.detach(move || run_pipeline(&spec).map(|r| to_json(&r)))
            .map_err(py_err)
    }

    /// Essential spectrum section as JSON.
    fn essential(&self, py: Python<'_>) -> PyResult<String> {
        let spec = self.inner.clone();
        py.detach(move || {
            let field = spec.field()?;
            Ok(to_json(&essential_section(&field, spec.numerics.k_max, &ScanPlan::default())))
        })
        .map_err(py_err)
    }

    /// Real eigenvalues and one member of each conjugate pair of the
    /// pencil truncated to `(-level, level)`.
    fn eigenvalues(&self, py: Python<'_>, level: f64) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
        let spec = self.inner.clone();
        py.detach(move || {
            let field = spec.field()?;
            let s = level_spectrum(&field, level, spec.numerics.density, &spec.numerics.eig_options())?;
            Ok((s.real, s.pairs))
        })
        .map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Problem('{}')", self.inner.name)
    }
}

/// Run the pipeline on a problem given as JSON text; returns the report.
#[pyfunction]
fn analyze(py: Python<'_>, problem_json: &str) -> PyResult<String> {
    PyProblem::from_json(problem_json)?.analyze(py)
}

fn tridiag(diag: Vec<f64>, off: Vec<f64>, r: &[f64]) -> PyResult<SymTridiag> {
    if off.len() + 1 != diag.len() || r.len() != diag.len() {
        return Err(ValidationError::new_err("need len(off) == len(diag) - 1 == len(r) - 1"));
    }
    Ok(SymTridiag::new(diag, off))
}

/// Eigenvalues of `T - lambda R` for symmetric tridiagonal `T` and
/// diagonal `R` of any sign: `(reals, pairs)` with `Im > 0` in `pairs`.
#[pyfunction]
fn pencil_eigenvalues(diag: Vec<f64>, off: Vec<f64>, r: Vec<f64>) -> PyResult<(Vec<f64>, Vec<Complex64>)> {
    let t = tridiag(diag, off, &r)?;
    let s = indefinite_eigs(&t, &r, &EigOptions::default()).map_err(py_err)?;
    Ok((s.real, s.pairs))
}

/// `(n_minus, n_zero, n_plus)` of `T - shift R`.
#[pyfunction]
fn inertia(diag: Vec<f64>, off: Vec<f64>, r: Vec<f64>, shift: f64) -> PyResult<(usize, usize, usize)> {
    let t = tridiag(diag, off, &r)?;
    let i = inertia_count(&t, shift, &r).map_err(py_err)?;
    Ok((i.n_minus, i.n_zero, i.n_plus))
}

/// Upper bound on real eigenvalues in a gap interval.
#[pyfunction]
fn count_bound(n_h0: usize, kappa: usize, alpha_eq_beta: bool) -> usize {
    gap_count_bound(n_h0, kappa, CountVariant::select(alpha_eq_beta, n_h0))
}

#[pymodule]
fn indefsl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("ValidationError", m.py().get_type::<ValidationError>())?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyExpr>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(pencil_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(inertia, m)?)?;
    m.add_function(wrap_pyfunction!(count_bound, m)?)?;
    Ok(())
}
