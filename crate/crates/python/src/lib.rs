//! Python bindings. Matrices cross the boundary as nested lists of complex
//! numbers, row-major.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use telecert::classical::{self, RecipeSearch};
use telecert::linalg::ComplexMatrix;
use telecert::process;
use telecert::quantum::{self, DensityMatrix};
use telecert::report::{self, Certifier, Grid, ShotNoise};
use telecert::sdp::{SdpSolver, SolverOptions};
use telecert::{steering, tomography, Error};

type Rows = Vec<Vec<Complex64>>;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Solver(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: Rows) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("matrix rows must be non-empty and of equal length"));
    }
    ComplexMatrix::from_vec(n, m, rows.into_iter().flatten().collect()).map_err(py_err)
}

fn to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)]).collect()).collect()
}

fn solver() -> PyResult<SdpSolver> {
    Ok(SdpSolver::new(SolverOptions::from_env().map_err(py_err)?))
}

fn density(rows: Rows) -> PyResult<DensityMatrix> {
    DensityMatrix::new(to_matrix(rows)?).map_err(py_err)
}

/// Single-qubit process matrix (4x4, Hermitian, unit trace).
#[pyclass(name = "ProcessMatrix", frozen)]
struct PyProcessMatrix {
    inner: process::ProcessMatrix,
}

#[pymethods]
impl PyProcessMatrix {
    #[new]
    fn new(rows: Rows) -> PyResult<Self> {
        Ok(PyProcessMatrix { inner: process::ProcessMatrix::new(to_matrix(rows)?).map_err(py_err)? })
    }

    fn matrix(&self) -> Rows {
        to_rows(self.inner.matrix())
    }

    fn is_physical(&self) -> bool {
        self.inner.is_physical()
    }

    /// Fidelity with the identity channel.
    fn fidelity(&self) -> f64 {
        process::process_fidelity(&process::chi_ideal(), &self.inner)
    }

    /// Output state for a qubit density matrix.
    fn apply(&self, rho: Rows) -> PyResult<Rows> {
        let out = process::apply_process(&self.inner, &density(rho)?).map_err(py_err)?;
        Ok(to_rows(out.matrix()))
    }

    fn __repr__(&self) -> String {
        format!("ProcessMatrix(fidelity={:.6})", self.fidelity())
    }
}

/// Certification verdict for one process.
#[pyclass(name = "CertificationReport", frozen, get_all)]
struct PyReport {
    f_expt: f64,
    f_avg_state: f64,
    alpha: f64,
    beta: f64,
    gqt: bool,
    flags: Vec<String>,
    f_ct: f64,
    f_avg_threshold: f64,
    guard: f64,
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "CertificationReport(f_expt={:.6}, alpha={:.6}, beta={:.6}, gqt={})",
            self.f_expt, self.alpha, self.beta, self.gqt
        )
    }
}

impl From<report::CertificationReport> for PyReport {
    fn from(r: report::CertificationReport) -> Self {
        PyReport {
            f_expt: r.f_expt,
            f_avg_state: r.f_avg_state,
            alpha: r.alpha,
            beta: r.beta,
            gqt: r.gqt,
            flags: r.flags,
            f_ct: r.f_ct,
            f_avg_threshold: r.f_avg_threshold,
            guard: r.guard,
        }
    }
}

#[pyfunction]
fn chi_ideal() -> PyProcessMatrix {
    PyProcessMatrix { inner: process::chi_ideal() }
}

#[pyfunction]
fn mp_process() -> PyProcessMatrix {
    PyProcessMatrix { inner: classical::mp_process() }
}

#[pyfunction]
fn werner(p: f64) -> PyResult<Rows> {
    Ok(to_rows(quantum::werner(p).map_err(py_err)?.matrix()))
}

/// Process of standard teleportation through a two-qubit resource state.
#[pyfunction]
fn resource_to_process(rho: Rows) -> PyResult<PyProcessMatrix> {
    Ok(PyProcessMatrix { inner: process::resource_to_process(&density(rho)?).map_err(py_err)? })
}

#[pyfunction]
fn process_fidelity(a: &PyProcessMatrix, b: &PyProcessMatrix) -> f64 {
    process::process_fidelity(&a.inner, &b.inner)
}

#[pyfunction]
fn avg_state_fidelity(f: f64) -> PyResult<f64> {
    process::avg_state_fidelity(f).map_err(py_err)
}

#[pyfunction]
fn classical_bound() -> PyResult<f64> {
    Ok(classical::classical_bound(&solver()?).map_err(py_err)?.f_ct)
}

#[pyfunction]
fn quantum_composition(chi: &PyProcessMatrix) -> PyResult<f64> {
    Ok(classical::quantum_composition(&chi.inner, &solver()?).map_err(py_err)?.alpha)
}

#[pyfunction]
fn quantum_robustness(chi: &PyProcessMatrix) -> PyResult<f64> {
    Ok(classical::quantum_robustness(&chi.inner, &solver()?).map_err(py_err)?.beta)
}

/// Eight hidden states `σ_ξ` reproducing `chi`, or `None` when it is not classical.
#[pyfunction]
fn find_recipe(chi: &PyProcessMatrix) -> PyResult<Option<Vec<Rows>>> {
    Ok(match classical::find_recipe(&chi.inner, &solver()?).map_err(py_err)? {
        RecipeSearch::Found { recipe, .. } => Some(recipe.sigma().iter().map(to_rows).collect()),
        RecipeSearch::NotFound { .. } => None,
    })
}

#[pyfunction]
fn negativity(rho: Rows) -> PyResult<f64> {
    quantum::negativity(&density(rho)?).map_err(py_err)
}

/// Steerable weight of the Pauli X, Y, Z assemblage of a two-qubit state.
#[pyfunction]
fn steerable_weight(rho: Rows) -> PyResult<f64> {
    let asm = quantum::assemblage(&density(rho)?, &quantum::pauli_settings()).map_err(py_err)?;
    Ok(steering::steerable_weight(&asm, &solver()?).map_err(py_err)?.sw)
}

#[pyfunction]
fn certify(chi: &PyProcessMatrix) -> PyResult<PyReport> {
    let c = Certifier::new(solver()?).map_err(py_err)?;
    Ok(c.certify(&chi.inner, &[]).map_err(py_err)?.into())
}

/// Process reconstructed from simulated Pauli tomography of `chi`.
#[pyfunction]
#[pyo3(signature = (chi, shots, seed = 0))]
fn simulate_tomography(chi: &PyProcessMatrix, shots: u64, seed: u64) -> PyResult<PyProcessMatrix> {
    let records = tomography::simulate_process_tomography(&chi.inner, shots, seed).map_err(py_err)?;
    Ok(PyProcessMatrix { inner: tomography::reconstruct_process(&records).map_err(py_err)?.process })
}

/// Werner sweep as CSV text.
#[pyfunction]
#[pyo3(signature = (grid = "0:1:0.01", shots = None, seed = 0))]
fn werner_sweep(py: Python<'_>, grid: &str, shots: Option<u64>, seed: u64) -> PyResult<String> {
    let grid = Grid::parse(grid).map_err(py_err)?;
    let c = Certifier::new(solver()?).map_err(py_err)?;
    let noise = shots.map(|shots| ShotNoise { shots, seed });
    let rows = py.detach(|| report::werner_sweep(&c, &grid, noise)).map_err(py_err)?;
    Ok(report::to_csv(&rows))
}

#[pymodule]
pub fn telecert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProcessMatrix>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(chi_ideal, m)?)?;
    m.add_function(wrap_pyfunction!(mp_process, m)?)?;
    m.add_function(wrap_pyfunction!(werner, m)?)?;
    m.add_function(wrap_pyfunction!(resource_to_process, m)?)?;
    m.add_function(wrap_pyfunction!(process_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(avg_state_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(classical_bound, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_composition, m)?)?;
    m.add_function(wrap_pyfunction!(quantum_robustness, m)?)?;
    m.add_function(wrap_pyfunction!(find_recipe, m)?)?;
    m.add_function(wrap_pyfunction!(negativity, m)?)?;
    m.add_function(wrap_pyfunction!(steerable_weight, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_tomography, m)?)?;
    m.add_function(wrap_pyfunction!(werner_sweep, m)?)?;
    Ok(())
}
