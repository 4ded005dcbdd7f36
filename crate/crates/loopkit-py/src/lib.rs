//! Python bindings for the loopkit core.

use loopkit::lattice::Dims;
use loopkit::matchings::{self, ConnectivityPattern, Strategy};
use loopkit::potts::{sw_sample, PottsParams};
use loopkit::quantum::{
    assemble_h, kernel, psi_torus, schmidt_rank as rank_svd, BoundaryCondition, Region, TensorParams, C64,
    KERNEL_TOL, SCHMIDT_TOL,
};
use loopkit::selftest::{run_criteria, DEFAULT_SEED};
use loopkit::LoopError;
use num_bigint::BigUint;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(loopkit_py, GuardError, PyRuntimeError, "Raised when a size guard refuses the request.");

fn py_err(e: LoopError) -> PyErr {
    match e {
        LoopError::Guard { .. } => GuardError::new_err(e.to_string()),
        LoopError::Construction(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn open(n_h: usize, n_v: usize) -> PyResult<Dims> {
    Dims::open(n_h, n_v).map_err(py_err)
}

/// Number of allowed matchings on an open `n_h x n_v` patch.
#[pyfunction]
#[pyo3(signature = (n_h, n_v, strategy = "dp"))]
pub fn count_allowed(n_h: usize, n_v: usize, strategy: &str) -> PyResult<BigUint> {
    let s = Strategy::parse(strategy).map_err(py_err)?;
    Ok(matchings::count_allowed(open(n_h, n_v)?, s).map_err(py_err)?.value)
}

/// Whether a matching in text form is realisable on the patch.
#[pyfunction]
pub fn is_allowed(matching: &str, n_h: usize, n_v: usize) -> PyResult<bool> {
    let p = ConnectivityPattern::from_text(matching).map_err(py_err)?;
    matchings::is_allowed(&p, open(n_h, n_v)?).map_err(py_err)
}

/// Rows of the canonical tiling realising `matching`.
#[pyfunction]
pub fn canonical_pattern(matching: &str, n_h: usize, n_v: usize) -> PyResult<Vec<String>> {
    let p = ConnectivityPattern::from_text(matching).map_err(py_err)?;
    Ok(matchings::canonical_pattern(&p, open(n_h, n_v)?).map_err(py_err)?.rows())
}

/// Ground-space dimension of the parent Hamiltonian.
#[pyfunction]
#[pyo3(signature = (n_h, n_v, bc = "obc", lam = 1.0, variant = "a"))]
pub fn kernel_dimension(n_h: usize, n_v: usize, bc: &str, lam: f64, variant: &str) -> PyResult<usize> {
    let bc = BoundaryCondition::parse(bc).map_err(py_err)?;
    let d = match bc {
        BoundaryCondition::Torus => Dims::torus(n_h, n_v).map_err(py_err)?,
        _ => open(n_h, n_v)?,
    };
    let params = match variant {
        "a" => TensorParams::a(lam),
        "a-tilde" => TensorParams::a_tilde(lam),
        other => return Err(PyValueError::new_err(format!("unknown variant {:?}", other))),
    };
    let h = assemble_h(d, bc, params).map_err(py_err)?;
    Ok(kernel(&h.op, KERNEL_TOL, false).map_err(py_err)?.dimension)
}

/// Schmidt rank of the torus state across a rectangular region `(row, col, width, height)`.
#[pyfunction]
#[pyo3(signature = (n_h, n_v, region, lam = 1.0))]
pub fn schmidt_rank(n_h: usize, n_v: usize, region: (usize, usize, usize, usize), lam: f64) -> PyResult<usize> {
    let d = Dims::torus(n_h, n_v).map_err(py_err)?;
    let psi = psi_torus(d, C64::new(lam, 0.0), None).map_err(py_err)?;
    let (row, col, w, h) = region;
    rank_svd(&psi, &Region::new(row, col, w, h), SCHMIDT_TOL).map_err(py_err)
}

/// Boundary entropy of square patches up to `max_side`, with the fitted exponent.
#[pyfunction]
#[pyo3(signature = (max_side, fit_from = 16))]
pub fn entropy_scaling<'py>(py: Python<'py>, max_side: usize, fit_from: usize) -> PyResult<Bound<'py, PyDict>> {
    let s = matchings::entropy_scaling(max_side, fit_from).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("exponent", s.exponent)?;
    out.set_item("offset", s.offset)?;
    out.set_item("correction", s.correction)?;
    out.set_item("final_increment", s.final_increment)?;
    out.set_item("increments_shrinking", s.increments_shrinking)?;
    let rows: Vec<(usize, f64, f64, f64)> =
        s.rows.iter().map(|r| (r.side, r.log2_count, r.corrected, r.increment)).collect();
    out.set_item("rows", rows)?;
    Ok(out)
}

/// Swendsen-Wang estimate of the mean one-point function on the torus.
/// `beta` defaults to the self-dual point.
#[pyfunction]
#[pyo3(signature = (n_h, n_v, q, beta = None, sweeps = 10_000, burn_in = 1_000, seed = DEFAULT_SEED))]
pub fn potts_sample<'py>(
    py: Python<'py>,
    n_h: usize,
    n_v: usize,
    q: u32,
    beta: Option<f64>,
    sweeps: usize,
    burn_in: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let d = Dims::torus(n_h, n_v).map_err(py_err)?;
    let p = match beta {
        Some(b) => PottsParams::new(q, b),
        None => PottsParams::self_dual(q),
    }
    .map_err(py_err)?;
    let s = py.detach(|| sw_sample(d, p, sweeps, burn_in, seed)).map_err(py_err)?;
    let n = s.link_one_point.len() as f64;
    let out = PyDict::new(py);
    out.set_item("beta", p.beta)?;
    out.set_item("mean", s.mean_one_point.mean)?;
    out.set_item("stderr", s.mean_one_point.stderr)?;
    out.set_item("link_mean", s.link_one_point.iter().map(|e| e.mean).sum::<f64>() / n)?;
    Ok(out)
}

/// Runs acceptance criteria; an empty `only` runs all of them.
/// Returns `(number, name, passed, detail)` tuples.
#[pyfunction]
#[pyo3(signature = (only = Vec::new(), seed = DEFAULT_SEED))]
pub fn selftest(py: Python<'_>, only: Vec<u32>, seed: u64) -> Vec<(u32, String, bool, String)> {
    py.detach(|| run_criteria(&only, seed))
        .into_iter()
        .map(|r| (r.number, r.name.to_string(), r.passed, r.detail))
        .collect()
}

#[pymodule]
fn loopkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GuardError", m.py().get_type::<GuardError>())?;
    m.add_function(wrap_pyfunction!(count_allowed, m)?)?;
    m.add_function(wrap_pyfunction!(is_allowed, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(schmidt_rank, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(potts_sample, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
