//! Python bindings: norms, the φ-transform, the pairing and the verification suites.
//! Signals are lists of complex (or real) samples whose length fixes the grid.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use carleson_core::cli::config::{ExponentSpec, KernelSpec};
use carleson_core::cli::report::Report;
use carleson_core::space_norms::CmoForm;
use carleson_core::verify::{run_suite as run_core_suite, Suite, SuiteParams};
use carleson_core::{duality_czo, luxemburg, phi_transform, space_norms};
use carleson_core::{CoeffField, DyadicInterval, Error, ExponentFunction, Grid, KernelFamily, Signal, WindowKind};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Precondition(_) | Error::Range(_) | Error::Domain(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn signal(values: Vec<Complex64>) -> PyResult<Signal> {
    let n = values.len();
    if n < 4 || !n.is_power_of_two() {
        return Err(PyValueError::new_err(format!("{n} samples is not a power of two of at least 4")));
    }
    Signal::new(Grid::new(n.trailing_zeros()).map_err(py_err)?, values).map_err(py_err)
}

fn exponent(grid: Grid, p: Vec<f64>) -> PyResult<ExponentFunction> {
    match p.as_slice() {
        [v] => ExponentFunction::constant(grid, *v),
        _ => ExponentFunction::new(grid, p),
    }
    .map_err(py_err)
}

fn family(grid: Grid, window: &str, j_min: u32, j_max: Option<u32>, shift: Option<u32>) -> PyResult<KernelFamily> {
    let window = match window {
        "meyer" | "meyer_smooth" => WindowKind::MeyerSmooth,
        "shannon" | "shannon_sharp" => WindowKind::ShannonSharp,
        other => return Err(PyValueError::new_err(format!("unknown window {other:?}"))),
    };
    KernelSpec { window, j_min, j_max, shift }.build(grid).map_err(py_err)
}

/// Luxemburg norm; `p` is one value (constant exponent) or one per sample.
#[pyfunction]
#[pyo3(signature = (values, p, rel_tol = luxemburg::DEFAULT_REL_TOL))]
fn luxemburg_norm(values: Vec<Complex64>, p: Vec<f64>, rel_tol: f64) -> PyResult<f64> {
    let f = signal(values)?;
    luxemburg::luxemburg_norm(&f, &exponent(f.grid(), p)?, rel_tol).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (values, p, window = "meyer", j_min = 1, j_max = None, shift = None))]
fn hardy_norm(values: Vec<Complex64>, p: Vec<f64>, window: &str, j_min: u32, j_max: Option<u32>, shift: Option<u32>) -> PyResult<f64> {
    let f = signal(values)?;
    let fam = family(f.grid(), window, j_min, j_max, shift)?;
    space_norms::hardy_norm(&f, &exponent(f.grid(), p)?, &fam).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (values, p, window = "meyer", j_min = 1, j_max = None, shift = None, discrete = false))]
fn cmo_norm(
    values: Vec<Complex64>,
    p: Vec<f64>,
    window: &str,
    j_min: u32,
    j_max: Option<u32>,
    shift: Option<u32>,
    discrete: bool,
) -> PyResult<f64> {
    let f = signal(values)?;
    let fam = family(f.grid(), window, j_min, j_max, shift)?;
    let form = if discrete { CmoForm::Discrete(Default::default()) } else { CmoForm::Integral };
    space_norms::cmo_norm(&f, &exponent(f.grid(), p)?, &fam, form).map_err(py_err)
}

/// Coefficients `⟨f, φ_Q⟩` as `(scale, position, value)` triples.
#[pyfunction]
#[pyo3(signature = (values, window = "meyer", j_min = 1, j_max = None, shift = None))]
fn analyze(values: Vec<Complex64>, window: &str, j_min: u32, j_max: Option<u32>, shift: Option<u32>) -> PyResult<Vec<(u32, usize, Complex64)>> {
    let f = signal(values)?;
    let fam = family(f.grid(), window, j_min, j_max, shift)?;
    let s = phi_transform::analyze(&f, &fam).map_err(py_err)?;
    Ok(s.iter().map(|(q, v)| (q.scale, q.position, *v)).collect())
}

/// `Σ s_Q ψ_Q` on the grid with `2^log2_size` points.
#[pyfunction]
#[pyo3(signature = (coefficients, log2_size, window = "meyer", j_min = 1, j_max = None, shift = None))]
fn synthesize(
    coefficients: Vec<(u32, usize, Complex64)>,
    log2_size: u32,
    window: &str,
    j_min: u32,
    j_max: Option<u32>,
    shift: Option<u32>,
) -> PyResult<Vec<Complex64>> {
    let grid = Grid::new(log2_size).map_err(py_err)?;
    let fam = family(grid, window, j_min, j_max, shift)?;
    let mut s = CoeffField::new((0, log2_size));
    for (j, k, v) in coefficients {
        s.insert(DyadicInterval::new(grid, j, k).map_err(py_err)?, v).map_err(py_err)?;
    }
    Ok(phi_transform::synthesize(&s, &fam).map_err(py_err)?.values().to_vec())
}

/// `L_g(f) = Σ_Q ⟨f, φ_Q⟩ conj⟨g, ψ_Q⟩`.
#[pyfunction]
#[pyo3(signature = (f, g, window = "meyer", j_min = 1, j_max = None, shift = None))]
fn pairing(f: Vec<Complex64>, g: Vec<Complex64>, window: &str, j_min: u32, j_max: Option<u32>, shift: Option<u32>) -> PyResult<Complex64> {
    let f = signal(f)?;
    let g = signal(g)?;
    let fam = family(f.grid(), window, j_min, j_max, shift)?;
    duality_czo::pairing(&f, &g, &fam).map_err(py_err)
}

#[pyfunction]
fn suite_names() -> Vec<&'static str> {
    Suite::ALL.iter().map(|s| s.name()).collect()
}

/// Runs one verification suite and returns its JSON report.
#[pyfunction]
#[pyo3(signature = (name, seed = 0, trials = None, grid = None, exponent = None))]
fn run_suite(name: &str, seed: u64, trials: Option<usize>, grid: Option<u32>, exponent: Option<&str>) -> PyResult<String> {
    let suite = Suite::from_name(name).map_err(py_err)?;
    let params = SuiteParams {
        seed,
        trials,
        grid,
        exponent: exponent.map(ExponentSpec::parse_inline).transpose().map_err(py_err)?,
        ..SuiteParams::default()
    };
    let checks = run_core_suite(suite, &params).map_err(py_err)?.into_parts().0;
    Ok(Report::new(serde_json::Value::String(name.to_string()), checks).to_json())
}

#[pymodule]
fn carleson(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RNG_ALGORITHM", carleson_core::rng::RNG_ALGORITHM)?;
    m.add_function(wrap_pyfunction!(luxemburg_norm, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_norm, m)?)?;
    m.add_function(wrap_pyfunction!(cmo_norm, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(pairing, m)?)?;
    m.add_function(wrap_pyfunction!(suite_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
