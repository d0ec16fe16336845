//! Python bindings for the solvers and convexity tests.
//!
//! Structured results come back as plain dicts with the same layout as the
//! JSON report of the command-line tool.

use std::sync::Arc;

use clap::Parser;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

use christoffel::body::{self, AnalyticBody};
use christoffel::cli_io::{self, RunConfig};
use christoffel::convexity::{self, Criterion, CriterionEvaluator};
use christoffel::harmonics::{self, HarmonicCoeffs, SphericalField};
use christoffel::kernels::{self, KernelParams, KernelTable, RadialQuadratureConfig};
use christoffel::lp;
use christoffel::sphere::{self, SphereGrid, SpherePoint, TangentDirection, Vec3};

create_exception!(christoffel_py, ChristoffelError, PyException);

fn err(e: christoffel::Error) -> PyErr {
    ChristoffelError::new_err(format!("{}: {e}", e.name()))
}

trait OrRaise<T> {
    fn or_raise(self) -> PyResult<T>;
}

impl<T> OrRaise<T> for christoffel::Result<T> {
    fn or_raise(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn to_py<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| ChristoffelError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn criterion(name: &str) -> PyResult<Criterion> {
    name.parse().or_raise()
}

fn point(v: Vec3) -> PyResult<SpherePoint> {
    SpherePoint::new(v).or_raise()
}

/// Gauss–Legendre × uniform-azimuth grid with `resolution` rings.
#[pyclass(frozen, skip_from_py_object, name = "Grid")]
#[derive(Clone)]
struct PyGrid {
    inner: Arc<SphereGrid>,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(resolution: usize) -> PyResult<Self> {
        Ok(Self { inner: sphere::make_grid(resolution).or_raise()? })
    }

    #[getter]
    fn resolution(&self) -> usize {
        self.inner.resolution()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn nodes(&self) -> Vec<Vec3> {
        self.inner.nodes().iter().map(|p| *p.coords()).collect()
    }

    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn thetas(&self) -> Vec<f64> {
        self.inner.thetas().to_vec()
    }

    fn integrate(&self, values: Vec<f64>) -> PyResult<f64> {
        if values.len() != self.inner.len() {
            return Err(err(christoffel::Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                self.inner.len()
            ))));
        }
        Ok(self.inner.integrate(&values))
    }

    fn __repr__(&self) -> String {
        format!("Grid(resolution={}, nodes={})", self.inner.resolution(), self.inner.len())
    }
}

/// Scalar field sampled on a grid, usually with harmonic coefficients.
#[pyclass(frozen, skip_from_py_object, name = "Field")]
#[derive(Clone)]
struct PyField {
    inner: SphericalField,
}

#[pymethods]
impl PyField {
    /// Nodal values in grid order, analyzed at `l_max` when given.
    #[staticmethod]
    #[pyo3(signature = (grid, values, l_max=None))]
    fn from_values(grid: &PyGrid, values: Vec<f64>, l_max: Option<usize>) -> PyResult<Self> {
        let f = SphericalField::from_values(grid.inner.clone(), values).or_raise()?;
        let f = match l_max {
            Some(l) => f.analyzed(l).or_raise()?,
            None => f,
        };
        Ok(Self { inner: f })
    }

    /// `base + Σ v Y_l^m` from `(l, m, v)` terms.
    #[staticmethod]
    #[pyo3(signature = (grid, l_max, base, terms=Vec::new()))]
    fn harmonic(grid: &PyGrid, l_max: usize, base: f64, terms: Vec<(usize, i64, f64)>) -> PyResult<Self> {
        let mut c = HarmonicCoeffs::zeros(l_max);
        c.set(0, 0, base * (4.0 * std::f64::consts::PI).sqrt());
        for (l, m, v) in terms {
            if l > l_max || m.unsigned_abs() as usize > l {
                return Err(err(christoffel::Error::InvalidParameter(format!("bad term ({l}, {m})"))));
            }
            c.set(l, m, c.get(l, m) + v);
        }
        Ok(Self { inner: SphericalField::from_coeffs(grid.inner.clone(), c) })
    }

    /// A `file:` or `family:` source, as accepted by `--input`.
    #[staticmethod]
    fn from_source(input: &str, grid: &PyGrid, l_max: usize) -> PyResult<Self> {
        let lf = cli_io::parse_field_source(input, &grid.inner, l_max).or_raise()?;
        Ok(Self { inner: lf.field })
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid { inner: self.inner.grid().clone() }
    }

    #[getter]
    fn l_max(&self) -> Option<usize> {
        self.inner.l_max()
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    /// Real orthonormal coefficients indexed `l² + l + m`.
    fn coeffs(&self) -> Option<Vec<f64>> {
        self.inner.coeffs().map(|c| c.as_slice().to_vec())
    }

    fn coeff(&self, l: usize, m: i64) -> PyResult<f64> {
        let c = self.inner.coeffs().ok_or_else(|| err(christoffel::Error::NotAnalyzed))?;
        if l > c.l_max() || m.unsigned_abs() as usize > l {
            return Err(err(christoffel::Error::InvalidParameter(format!("no coefficient ({l}, {m})"))));
        }
        Ok(c.get(l, m))
    }

    fn analyzed(&self, l_max: usize) -> PyResult<Self> {
        Ok(Self { inner: self.inner.clone().analyzed(l_max).or_raise()? })
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        cli_io::write_field_csv_path(&self.inner, std::path::Path::new(path)).or_raise()
    }

    fn __len__(&self) -> usize {
        self.inner.values().len()
    }

    fn __repr__(&self) -> String {
        format!("Field(nodes={}, l_max={:?})", self.inner.values().len(), self.inner.l_max())
    }
}

fn field(f: SphericalField) -> PyField {
    PyField { inner: f }
}

/// Solves `Δu + 2u = f`; `tol` defaults to the solver's relative default.
#[pyfunction]
#[pyo3(signature = (f, tol=None, project=false))]
fn solve_christoffel(f: &PyField, tol: Option<f64>, project: bool) -> PyResult<PyField> {
    let rhs = if project { harmonics::project_out_linear(&f.inner) } else { f.inner.clone() };
    let tol = tol.unwrap_or_else(|| harmonics::default_tolerance(&rhs));
    Ok(field(harmonics::solve_christoffel(&rhs, tol).or_raise()?))
}

#[pyfunction]
fn christoffel_residual(u: &PyField, f: &PyField) -> PyResult<f64> {
    harmonics::christoffel_residual(&u.inner, &f.inner).or_raise()
}

#[pyfunction]
fn orthogonality_defect(f: &PyField) -> Vec3 {
    harmonics::orthogonality_defect(&f.inner)
}

#[pyfunction]
fn hessian_min<'py>(py: Python<'py>, u: &PyField) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &convexity::hessian_min(&u.inner).or_raise()?)
}

/// `(r1, r2)` at the unit vector `x`.
#[pyfunction]
fn principal_radii(u: &PyField, x: Vec3) -> PyResult<(f64, f64)> {
    body::principal_radii(&u.inner, &point(x)?).or_raise()
}

/// Criterion value at `x` in the tangent direction at `angle` from the
/// first tangent basis vector.
#[pyfunction]
fn criterion_value(f: &PyField, name: &str, x: Vec3, angle: f64) -> PyResult<f64> {
    let ev = CriterionEvaluator::new(&f.inner, KernelTable::closed(2).or_raise()?).or_raise()?;
    let x = point(x)?;
    ev.value(criterion(name)?, &x, &TangentDirection::at_angle(x, angle)).or_raise()
}

/// The quadratic form of a criterion at `x` as a 2×2 matrix in the tangent
/// basis, with its quadrature error estimate.
#[pyfunction]
fn criterion_matrix(f: &PyField, name: &str, x: Vec3) -> PyResult<([[f64; 2]; 2], f64)> {
    let ev = CriterionEvaluator::new(&f.inner, KernelTable::closed(2).or_raise()?).or_raise()?;
    let m = ev.matrix(criterion(name)?, &point(x)?);
    Ok((m.m, m.err))
}

#[pyfunction]
#[pyo3(signature = (f, criteria=vec!["cr1".to_string(), "cr2".to_string()], n_dirs=8))]
fn sweep<'py>(py: Python<'py>, f: &PyField, criteria: Vec<String>, n_dirs: usize) -> PyResult<Bound<'py, PyAny>> {
    let ev = CriterionEvaluator::new(&f.inner, KernelTable::closed(2).or_raise()?).or_raise()?;
    let mut report: Option<convexity::ConvexityReport> = None;
    for c in criteria {
        let r = convexity::sweep_with(&ev, &f.inner, criterion(&c)?, n_dirs).or_raise()?;
        report = Some(match report {
            Some(prev) => prev.merge(r),
            None => r,
        });
    }
    let report = report.ok_or_else(|| ChristoffelError::new_err("no criteria requested"))?;
    let out = to_py(py, &report)?;
    out.set_item("overall", report.overall().name())?;
    Ok(out)
}

/// All classical sufficient conditions, keyed by name.
#[pyfunction]
#[pyo3(signature = (f, alpha=1.0))]
fn sufficient_conditions<'py>(py: Python<'py>, f: &PyField, alpha: f64) -> PyResult<Bound<'py, PyAny>> {
    let gamma = kernels::gamma_const(2, alpha, &RadialQuadratureConfig::default()).or_raise()?;
    let out = pyo3::types::PyDict::new(py);
    out.set_item("t32", to_py(py, &convexity::check_t32(&f.inner, alpha, gamma).or_raise()?)?)?;
    let t33 = convexity::check_t33(&f.inner, cli_io::T33_T_VALUES, cli_io::T33_DIRECTIONS).or_raise()?;
    out.set_item("t33", to_py(py, &t33)?)?;
    out.set_item("pogorelov", to_py(py, &convexity::check_pogorelov(&f.inner).or_raise()?)?)?;
    out.set_item("guan_ma", to_py(py, &convexity::check_guan_ma(&f.inner).or_raise()?)?)?;
    Ok(out.into_any())
}

/// L_p solution `(u, summary)`; `p = 2` solves the eigenproblem for λ.
#[pyfunction]
#[pyo3(signature = (f, p, tol=1e-10, max_iter=200))]
fn solve_lp<'py>(py: Python<'py>, f: &PyField, p: f64, tol: f64, max_iter: usize) -> PyResult<(PyField, Bound<'py, PyAny>)> {
    let sol = if p == 2.0 {
        lp::solve_lp_eigen(&f.inner, tol, max_iter)
    } else {
        lp::solve_lp(&f.inner, p, tol, max_iter)
    }
    .or_raise()?;
    let summary = to_py(py, &sol.summary())?;
    summary.set_item("lemma41", to_py(py, &lp::check_lemma41(&sol, &f.inner).or_raise()?)?)?;
    Ok((field(sol.u), summary))
}

#[pyfunction]
#[pyo3(signature = (n=2, alpha=1.0))]
fn gamma_const(n: usize, alpha: f64) -> PyResult<f64> {
    kernels::gamma_const(n, alpha, &RadialQuadratureConfig::default()).or_raise()
}

#[pyfunction]
#[pyo3(signature = (n=2, alpha=1.0, samples=1_000_000, seed=0, pole=None))]
fn gamma_monte_carlo<'py>(
    py: Python<'py>,
    n: usize,
    alpha: f64,
    samples: u64,
    seed: u64,
    pole: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let pole = pole.unwrap_or_else(|| {
        let mut e = vec![0.0; n + 1];
        e[n] = 1.0;
        e
    });
    to_py(py, &kernels::gamma_monte_carlo(n, alpha, &pole, samples, seed).or_raise()?)
}

#[pyfunction]
#[pyo3(signature = (s, n=2))]
fn omega_closed(s: f64, n: usize) -> PyResult<f64> {
    kernels::omega_closed(s, &KernelParams::new(n).or_raise()?).or_raise()
}

#[pyfunction]
#[pyo3(signature = (s, n=2))]
fn omega_radial(s: f64, n: usize) -> PyResult<f64> {
    kernels::omega_radial(s, &KernelParams::new(n).or_raise()?, &RadialQuadratureConfig::default()).or_raise()
}

#[pyfunction]
#[pyo3(signature = (s, n=2))]
fn firey_theta(s: f64, n: usize) -> PyResult<f64> {
    kernels::firey_theta(s, &KernelParams::new(n).or_raise()?).or_raise()
}

#[pyfunction]
fn berg_g(n: usize, t: f64) -> PyResult<f64> {
    kernels::berg_g(n, t).or_raise()
}

/// Support function of the ellipsoid with semi-axes `a, b, c`.
#[pyfunction]
fn ellipsoid_support(grid: &PyGrid, a: f64, b: f64, c: f64) -> PyResult<PyField> {
    Ok(field(body::support_function(&AnalyticBody::Ellipsoid { a, b, c }, &grid.inner).or_raise()?))
}

/// `f = r1 + r2` computed from a support function.
#[pyfunction]
fn forward_f(u: &PyField) -> PyResult<PyField> {
    Ok(field(body::forward_f(&u.inner).or_raise()?))
}

/// Surface mesh `(vertices, faces)` of the body with support function `u`.
#[pyfunction]
fn embed(u: &PyField) -> PyResult<(Vec<Vec3>, Vec<[usize; 3]>)> {
    let mesh = body::embed(&u.inner).or_raise()?;
    Ok((mesh.vertices, mesh.faces))
}

/// Runs the command-line pipeline with `args` (without the program name)
/// and returns `(exit_code, report)`.
#[pyfunction]
fn run<'py>(py: Python<'py>, args: Vec<String>) -> PyResult<(i32, Bound<'py, PyAny>)> {
    let argv = std::iter::once("christoffel".to_string()).chain(args);
    let config = RunConfig::try_parse_from(argv).map_err(|e| ChristoffelError::new_err(e.to_string()))?;
    let doc = cli_io::run_with_threads(&config);
    Ok((doc.exit_code, to_py(py, &doc)?))
}

#[pymodule]
fn christoffel_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ChristoffelError", m.py().get_type::<ChristoffelError>())?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(solve_christoffel, m)?)?;
    m.add_function(wrap_pyfunction!(christoffel_residual, m)?)?;
    m.add_function(wrap_pyfunction!(orthogonality_defect, m)?)?;
    m.add_function(wrap_pyfunction!(hessian_min, m)?)?;
    m.add_function(wrap_pyfunction!(principal_radii, m)?)?;
    m.add_function(wrap_pyfunction!(criterion_value, m)?)?;
    m.add_function(wrap_pyfunction!(criterion_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sufficient_conditions, m)?)?;
    m.add_function(wrap_pyfunction!(solve_lp, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_const, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(omega_closed, m)?)?;
    m.add_function(wrap_pyfunction!(omega_radial, m)?)?;
    m.add_function(wrap_pyfunction!(firey_theta, m)?)?;
    m.add_function(wrap_pyfunction!(berg_g, m)?)?;
    m.add_function(wrap_pyfunction!(ellipsoid_support, m)?)?;
    m.add_function(wrap_pyfunction!(forward_f, m)?)?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("EXIT_OK", cli_io::EXIT_OK)?;
    m.add("EXIT_ERROR", cli_io::EXIT_ERROR)?;
    m.add("EXIT_FAILS", cli_io::EXIT_FAILS)?;
    m.add("EXIT_INCONCLUSIVE", cli_io::EXIT_INCONCLUSIVE)?;
    Ok(())
}
