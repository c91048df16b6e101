//! Python bindings: states are lists of complex amplitudes, reports are JSON
//! strings identical to the command-line output.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ontolab::bellchsh::{self, ChshSetting};
use ontolab::cli::{self, Args, Command};
use ontolab::dwigner;
use ontolab::feasopt::{self, RaySet};
use ontolab::qcore::{self, PureState};

fn py_err(e: ontolab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn state(amplitudes: Vec<Complex64>) -> PyResult<PureState> {
    PureState::new(amplitudes).map_err(py_err)
}

#[pyfunction]
fn born_probability(psi: Vec<Complex64>, phi: Vec<Complex64>) -> PyResult<f64> {
    qcore::born_probability(&state(psi)?, &state(phi)?).map_err(py_err)
}

/// Haar-random pure state from a seeded stream.
#[pyfunction]
fn random_state(dim: usize, seed: u64) -> PyResult<Vec<Complex64>> {
    let psi = qcore::random_pure_state(dim, seed).map_err(py_err)?;
    Ok(psi.amplitudes().to_vec())
}

/// Noncontextual assignment count; the bundled Cabello set when `rays_json` is omitted.
#[pyfunction]
#[pyo3(signature = (rays_json=None))]
fn ks_assignment_count(rays_json: Option<&str>) -> PyResult<u64> {
    let set = match rays_json {
        Some(text) => RaySet::from_json(text).map_err(py_err)?,
        None => feasopt::cabello18(),
    };
    Ok(feasopt::ks_assignment_count(&set).map_err(py_err)?.count)
}

/// CHSH value at eight `(polar, azimuth)` angles for `a, a', b, b'`, or the standard setting.
#[pyfunction]
#[pyo3(signature = (amplitudes, angles=None))]
fn chsh_value(amplitudes: Vec<Complex64>, angles: Option<[f64; 8]>) -> PyResult<f64> {
    let setting = angles.map(|a| ChshSetting::from_angles(&a)).unwrap_or_else(ChshSetting::standard);
    bellchsh::chsh_value(&state(amplitudes)?, &setting).map_err(py_err)
}

#[pyfunction]
fn horodecki_max(amplitudes: Vec<Complex64>) -> PyResult<f64> {
    bellchsh::horodecki_max(&state(amplitudes)?).map_err(py_err)
}

/// Grid search followed by refinement; returns the value and the eight angles.
#[pyfunction]
#[pyo3(signature = (amplitudes, steps=12, refine_iters=5, seed=0))]
fn chsh_grid_max(amplitudes: Vec<Complex64>, steps: usize, refine_iters: usize, seed: u64) -> PyResult<(f64, [f64; 8])> {
    let found = bellchsh::chsh_grid_max(&state(amplitudes)?, steps, refine_iters, seed).map_err(py_err)?;
    Ok((found.value, found.setting.angles()))
}

/// `W[q][p]` of a pure state in odd prime dimension.
#[pyfunction]
fn wigner(amplitudes: Vec<Complex64>) -> PyResult<Vec<Vec<f64>>> {
    let psi = state(amplitudes)?;
    let pps = dwigner::phase_point_operators(psi.dim()).map_err(py_err)?;
    let table = dwigner::wigner(&psi.projector().to_operator(), &pps).map_err(py_err)?;
    Ok(table.values().row_iter().map(|r| r.iter().copied().collect()).collect())
}

#[pyfunction]
fn negativity(amplitudes: Vec<Complex64>) -> PyResult<f64> {
    let psi = state(amplitudes)?;
    let pps = dwigner::phase_point_operators(psi.dim()).map_err(py_err)?;
    let table = dwigner::wigner(&psi.projector().to_operator(), &pps).map_err(py_err)?;
    Ok(dwigner::negativity(&table))
}

/// Runs a command-line command on document text (the bundled example when
/// omitted) and returns `(report_json, passed)`.
#[pyfunction]
#[pyo3(signature = (
    command, document=None, *, seed=None, tol=None, ontic_size=None, restarts=None,
    lattice=None, max_iters=None, grid_steps=None, refine_iters=None, sweep=false
))]
#[allow(clippy::too_many_arguments)]
fn run(
    command: &str,
    document: Option<&str>,
    seed: Option<u64>,
    tol: Option<f64>,
    ontic_size: Option<usize>,
    restarts: Option<usize>,
    lattice: Option<usize>,
    max_iters: Option<usize>,
    grid_steps: Option<usize>,
    refine_iters: Option<usize>,
    sweep: bool,
) -> PyResult<(String, bool)> {
    let args = Args {
        seed,
        tol,
        ontic_size,
        restarts,
        lattice,
        max_iters,
        grid_steps,
        refine_iters,
        sweep,
        ..Args::default()
    };
    let cmd = match command {
        "verify-model" => Command::VerifyModel(args),
        "theorem-check" => Command::TheoremCheck(args),
        "feasibility" => Command::Feasibility(args),
        "ks-search" => Command::KsSearch(args),
        "chsh" => Command::Chsh(args),
        "wigner" => Command::Wigner(args),
        "bohm" => Command::Bohm(args),
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    };
    let outcome = match document {
        Some(text) => cli::run_text(&cmd, "python", text),
        None => cli::run(&cmd),
    }
    .map_err(py_err)?;
    Ok((outcome.report.to_json(), outcome.report.passed))
}

#[pymodule]
fn pyontolab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(born_probability, m)?)?;
    m.add_function(wrap_pyfunction!(random_state, m)?)?;
    m.add_function(wrap_pyfunction!(ks_assignment_count, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_value, m)?)?;
    m.add_function(wrap_pyfunction!(horodecki_max, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_grid_max, m)?)?;
    m.add_function(wrap_pyfunction!(wigner, m)?)?;
    m.add_function(wrap_pyfunction!(negativity, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
