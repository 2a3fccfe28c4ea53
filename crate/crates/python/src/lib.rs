//! Python bindings: the `collapse_lab` extension module.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use collapse_lab_core::dynamics::{closed_form_trajectory, integrate, IntegratorSettings, PhaseModel};
use collapse_lab_core::ensemble::{run_ensemble_with_threads, OutcomeClass, SamplingSpec};
use collapse_lab_core::experiments::chsh::{self, ChshSetting};
use collapse_lab_core::experiments::interference::{self, InterferenceSpec, Source};
use collapse_lab_core::experiments::{malus, tau};
use collapse_lab_core::io::tables;
use collapse_lab_core::model::{self, BranchSigns, TwoStateConfig};
use collapse_lab_core::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NonFiniteState { .. }
        | Error::ResampleExhausted(_)
        | Error::SingularDenominator(_)
        | Error::ZeroVariance(_)
        | Error::DegeneratePhase { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_signs(s: &str) -> PyResult<BranchSigns> {
    s.parse().map_err(to_py)
}

/// Initial Born weights, reduction time and sampling conventions.
#[pyclass(name = "TwoStateConfig", frozen)]
struct PyTwoStateConfig {
    inner: TwoStateConfig,
}

#[pymethods]
impl PyTwoStateConfig {
    #[new]
    #[pyo3(signature = (x0_1, x0_2, tau_r, sampling_mode = "independent", amplitude_convention = "probability"))]
    fn new(x0_1: f64, x0_2: f64, tau_r: f64, sampling_mode: &str, amplitude_convention: &str) -> PyResult<Self> {
        let inner = TwoStateConfig::new([x0_1, x0_2], tau_r)
            .map_err(to_py)?
            .with_sampling_mode(sampling_mode.parse().map_err(to_py)?)
            .with_convention(amplitude_convention.parse().map_err(to_py)?);
        Ok(PyTwoStateConfig { inner })
    }

    #[getter]
    fn x0(&self) -> (f64, f64) {
        (self.inner.x0[0], self.inner.x0[1])
    }

    #[getter]
    fn tau_r(&self) -> f64 {
        self.inner.tau_r
    }

    #[getter]
    fn sampling_mode(&self) -> &'static str {
        self.inner.sampling_mode.as_str()
    }

    #[getter]
    fn amplitude_convention(&self) -> &'static str {
        self.inner.amplitude_convention.as_str()
    }

    /// Weights `(x1, x2)` at time `t` (seconds) on the given branch.
    fn weights_at(&self, signs: &str, t: f64) -> PyResult<(f64, f64)> {
        let [a, b] = model::weights_at(&self.inner, parse_signs(signs)?, t).map_err(to_py)?;
        Ok((a, b))
    }

    fn q_of_t(&self, signs: &str, t: f64) -> PyResult<f64> {
        model::q_of_t(&self.inner, parse_signs(signs)?, t).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "TwoStateConfig(x0_1={}, x0_2={}, tau_r={}, sampling_mode='{}', amplitude_convention='{}')",
            self.inner.x0[0],
            self.inner.x0[1],
            self.inner.tau_r,
            self.inner.sampling_mode.as_str(),
            self.inner.amplitude_convention.as_str()
        )
    }
}

/// Branch signs of both components for a pair of phases.
#[pyfunction]
#[pyo3(signature = (theta_1, theta_2, tol = model::DEFAULT_PHASE_TOL))]
fn branch_signs(theta_1: f64, theta_2: f64, tol: f64) -> PyResult<String> {
    let a = model::branch_sign(theta_1, tol).map_err(to_py)?;
    let b = model::branch_sign(theta_2, tol).map_err(to_py)?;
    Ok(BranchSigns::new(a, b).to_string())
}

/// Growth rates `(f1 * a1, f2 * a2)` of a sign pattern such as `"+-"`.
#[pyfunction]
fn coupling_rates(signs: &str) -> PyResult<(i32, i32)> {
    let r = model::coupling(parse_signs(signs)?).rate;
    Ok((r[0], r[1]))
}

#[pyfunction]
fn closed_form_x(x0: f64, rate: i32, t: f64, tau_r: f64) -> PyResult<f64> {
    model::closed_form_x(x0, rate, t, tau_r).map_err(to_py)
}

/// Trajectory as a dict of columns `t` (in tau_r units), `x1`, `x2`, `q`.
#[pyfunction]
#[pyo3(signature = (config, signs, t_end_over_tau = 10.0, step_over_tau = 1e-3, closed_form = false, omega = (0.0, 0.0)))]
fn trajectory<'py>(
    py: Python<'py>,
    config: PyRef<'py, PyTwoStateConfig>,
    signs: &str,
    t_end_over_tau: f64,
    step_over_tau: f64,
    closed_form: bool,
    omega: (f64, f64),
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.inner;
    let signs = parse_signs(signs)?;
    let settings = IntegratorSettings::in_tau_units(cfg.tau_r, step_over_tau, t_end_over_tau).map_err(to_py)?;
    let traj = py
        .detach(|| {
            if closed_form {
                closed_form_trajectory(&cfg, signs, &settings)
            } else {
                integrate(&cfg, signs, &PhaseModel::free([omega.0, omega.1]), &settings)
            }
        })
        .map_err(to_py)?;
    let table = tables::collapse_table(&traj, cfg.tau_r, false);
    let out = PyDict::new(py);
    for col in ["t", "x1", "x2", "q"] {
        out.set_item(col, table.float_column(col))?;
    }
    Ok(out)
}

/// Outcome counts and frequencies over `n_trajectories` sampled phase pairs.
#[pyfunction]
#[pyo3(signature = (config, n_trajectories, master_seed, threads = 0, t_end_over_tau = 30.0, step_over_tau = 1e-2))]
fn run_ensemble<'py>(
    py: Python<'py>,
    config: PyRef<'py, PyTwoStateConfig>,
    n_trajectories: u64,
    master_seed: u64,
    threads: usize,
    t_end_over_tau: f64,
    step_over_tau: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config.inner;
    let sampling = SamplingSpec::new(cfg.sampling_mode, n_trajectories, master_seed);
    let settings = IntegratorSettings::in_tau_units(cfg.tau_r, step_over_tau, t_end_over_tau).map_err(to_py)?;
    let stats = py
        .detach(|| run_ensemble_with_threads(&cfg, &sampling, &settings, threads))
        .map_err(to_py)?;
    let counts = PyDict::new(py);
    let freqs = PyDict::new(py);
    for class in OutcomeClass::ALL {
        counts.set_item(class.as_str(), stats.count(class))?;
        freqs.set_item(class.as_str(), stats.frequency(class))?;
    }
    let out = PyDict::new(py);
    out.set_item("counts", counts)?;
    out.set_item("frequencies", freqs)?;
    out.set_item("grow_frequency", (stats.grow_frequency(0), stats.grow_frequency(1)))?;
    out.set_item("grow_std_error", (stats.grow_std_error(0), stats.grow_std_error(1)))?;
    out.set_item("n_trajectories", stats.n_trajectories)?;
    out.set_item("master_seed", stats.master_seed)?;
    out.set_item("mode", stats.mode.as_str())?;
    out.set_item("mean_reduction_time", stats.mean_reduction_time)?;
    out.set_item("csv", tables::ensemble_table(&stats, cfg.x0).to_csv_string().map_err(|e| PyRuntimeError::new_err(e.to_string()))?)?;
    Ok(out)
}

/// Expected transmission behind the second polarizer at angle `eps` (rad).
#[pyfunction]
fn malus_expectation(eps: f64, t: f64, tau_r: f64) -> PyResult<f64> {
    malus::malus_expectation(eps, t, tau_r).map_err(to_py)
}

/// `(mean, std_error)` of a Monte Carlo transmission estimate.
#[pyfunction]
fn malus_monte_carlo(eps: f64, t: f64, tau_r: f64, n: u64, seed: u64) -> PyResult<(f64, f64)> {
    let e = malus::malus_monte_carlo(eps, t, tau_r, n, seed).map_err(to_py)?;
    Ok((e.mean, e.std_error))
}

/// CHSH value of the singlet; without angles the 45-degree rotated setting.
#[pyfunction]
#[pyo3(signature = (angles_deg = None))]
fn chsh_value(angles_deg: Option<(f64, f64, f64, f64)>) -> PyResult<f64> {
    let setting = match angles_deg {
        Some((a, ap, b, bp)) => ChshSetting::from_angles(a.to_radians(), ap.to_radians(), b.to_radians(), bp.to_radians()),
        None => ChshSetting::rotated_45(),
    };
    Ok(chsh::chsh_value(&setting).map_err(to_py)?.f)
}

#[pyfunction]
#[pyo3(signature = (n_strategies, seed, exhaustive = true))]
fn chsh_lhv_max(n_strategies: u64, seed: u64, exhaustive: bool) -> PyResult<f64> {
    Ok(chsh::chsh_lhv_max(n_strategies, seed, exhaustive).map_err(to_py)?.f_max)
}

/// Intensity on `screen` from sources at `positions` with `phases`.
#[pyfunction]
#[pyo3(signature = (positions, phases, distance, wavelength, screen, exact = false))]
fn interference_pattern(
    positions: Vec<f64>,
    phases: Vec<f64>,
    distance: f64,
    wavelength: f64,
    screen: Vec<f64>,
    exact: bool,
) -> PyResult<Vec<f64>> {
    if positions.len() != phases.len() {
        return Err(PyValueError::new_err("positions and phases differ in length"));
    }
    let spec = InterferenceSpec {
        sources: positions.into_iter().zip(phases).map(|(y, theta)| Source { y, theta }).collect(),
        distance,
        wavenumber: interference::wavenumber(wavelength),
        screen,
    };
    if exact {
        interference::interference_pattern_exact(&spec)
    } else {
        interference::interference_pattern(&spec)
    }
    .map_err(to_py)
}

#[pyfunction]
fn fringe_period(screen: Vec<f64>, intensity: Vec<f64>) -> Option<f64> {
    interference::fringe_period(&screen, &intensity)
}

#[pyfunction]
fn estimate_tau<'py>(py: Python<'py>, wavelength: f64) -> PyResult<Bound<'py, PyDict>> {
    let e = tau::estimate_tau(wavelength).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("wavelength", e.wavelength)?;
    out.set_item("photon_energy", e.photon_energy)?;
    out.set_item("hbar_over_e", e.hbar_over_e)?;
    out.set_item("quoted_order", e.quoted_order)?;
    out.set_item("upper_bound", e.upper_bound)?;
    Ok(out)
}

#[pymodule]
pub fn collapse_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTwoStateConfig>()?;
    m.add_function(wrap_pyfunction!(branch_signs, m)?)?;
    m.add_function(wrap_pyfunction!(coupling_rates, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_x, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(run_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(malus_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(malus_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_value, m)?)?;
    m.add_function(wrap_pyfunction!(chsh_lhv_max, m)?)?;
    m.add_function(wrap_pyfunction!(interference_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(fringe_period, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_tau, m)?)?;
    Ok(())
}
