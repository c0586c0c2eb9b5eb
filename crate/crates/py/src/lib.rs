//! Python bindings: the parameter set, the assembled system with its
//! spectral and time-domain operations, and the mesh-free oracles.
//!
//! Build with `cargo build --release -p bresse-py`; the resulting
//! `libbresse_py.so` imports as the module `bresse_py` (see
//! `python/smoke_test.py`).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use bresse::cli::smooth_initial_state;
use bresse::fem::FemSystem;
use bresse::generator::check_dissipativity;
use bresse::model::BresseParams;
use bresse::shooting::characteristic_function;
use bresse::spectral::{certify_stability_with_sweep, compute_spectrum, resolvent_norm};
use bresse::timeint::{fit_decay_rate, simulate};
use num_complex::Complex64 as c64;

fn numerics_err(e: bresse::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Physical constants and boundary gains of the beam.
#[pyclass(name = "Params", skip_from_py_object)]
#[derive(Clone)]
struct PyParams {
    inner: BresseParams,
}

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (rho1=1.0, rho2=1.0, kappa=1.0, k0=1.0, b=1.0, ell=0.5,
                        length=1.0, gamma1=1.0, gamma2=1.0, gamma3=1.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        rho1: f64,
        rho2: f64,
        kappa: f64,
        k0: f64,
        b: f64,
        ell: f64,
        length: f64,
        gamma1: f64,
        gamma2: f64,
        gamma3: f64,
    ) -> PyResult<Self> {
        let inner = BresseParams {
            rho1,
            rho2,
            kappa,
            k0,
            b,
            ell,
            length,
            gamma1,
            gamma2,
            gamma3,
        };
        inner
            .validate()
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { inner })
    }

    /// (shear, bending, longitudinal) propagation speeds.
    fn wave_speeds(&self) -> (f64, f64, f64) {
        let c = self.inner.wave_speeds();
        (c.shear, c.bending, c.longitudinal)
    }

    /// Channel impedances (the totally absorbing gains).
    fn impedances(&self) -> (f64, f64, f64) {
        let z = self.inner.impedances();
        (z[0], z[1], z[2])
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Assembled finite-element system on `n` elements.
#[pyclass(name = "System")]
struct PySystem {
    sys: FemSystem,
}

#[pymethods]
impl PySystem {
    #[new]
    fn new(params: &PyParams, n: usize) -> PyResult<Self> {
        let sys =
            FemSystem::build(params.inner, n).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Self { sys })
    }

    fn n_dofs(&self) -> usize {
        self.sys.n_dofs()
    }

    /// max |Re<AU,U> + v^T D v| / |U|^2 over seeded random states.
    fn dissipativity_defect(&self, trials: usize, seed: u64) -> PyResult<f64> {
        check_dissipativity(&self.sys, trials, seed).map_err(numerics_err)
    }

    /// All eigenvalues of the first-order operator as (re, im) pairs,
    /// sorted by decreasing real part.
    fn spectrum(&self) -> PyResult<Vec<(f64, f64)>> {
        let report = compute_spectrum(&self.sys).map_err(numerics_err)?;
        Ok(report.eigenvalues.iter().map(|z| (z.re, z.im)).collect())
    }

    fn spectral_abscissa(&self) -> PyResult<f64> {
        Ok(compute_spectrum(&self.sys)
            .map_err(numerics_err)?
            .spectral_abscissa)
    }

    /// Resolvent norm `|(i lambda - A)^{-1}|` in the energy norm.
    fn resolvent_norm(&self, lambda: f64) -> PyResult<f64> {
        resolvent_norm(lambda, &self.sys).map_err(numerics_err)
    }

    /// Integrates smooth seeded initial data and returns
    /// (times, energies, per-step boundary losses).
    fn simulate(
        &self,
        horizon: f64,
        dt: f64,
        seed: u64,
    ) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let initial = smooth_initial_state(&self.sys, seed);
        let trace = simulate(&initial, horizon, dt, &self.sys).map_err(numerics_err)?;
        Ok((trace.times, trace.energies, trace.boundary_losses))
    }

    /// Fitted decay rate of such a run over `[window_start, window_end]`:
    /// returns (mu, fit residual).
    #[pyo3(signature = (horizon, dt, seed, window_start, window_end))]
    fn decay_rate(
        &self,
        horizon: f64,
        dt: f64,
        seed: u64,
        window_start: f64,
        window_end: f64,
    ) -> PyResult<(f64, f64)> {
        let initial = smooth_initial_state(&self.sys, seed);
        let trace = simulate(&initial, horizon, dt, &self.sys).map_err(numerics_err)?;
        let fit = fit_decay_rate(&trace, (window_start, window_end)).map_err(numerics_err)?;
        Ok((fit.mu, fit.residual))
    }
}

/// Closed-form spectrum of the decoupled longitudinal wave (ell = 0) as
/// (re, im) pairs with nonnegative imaginary part.
#[pyfunction]
fn analytic_wave_spectrum(params: &PyParams, k_max: usize) -> PyResult<Vec<(f64, f64)>> {
    let modes = bresse::model::analytic_wave_spectrum(&params.inner, k_max)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(modes.iter().map(|z| (z.re, z.im)).collect())
}

/// Boundary determinant of the transfer-matrix method at s = re + i im.
#[pyfunction]
fn shooting_determinant(params: &PyParams, re: f64, im: f64) -> PyResult<(f64, f64)> {
    let value = characteristic_function(c64::new(re, im), &params.inner).map_err(numerics_err)?;
    Ok((value.re, value.im))
}

/// Full stability certificate as a JSON string.
#[pyfunction]
#[pyo3(signature = (params, n, lambda_max=200.0, sweep_count=33))]
fn certify(params: &PyParams, n: usize, lambda_max: f64, sweep_count: usize) -> PyResult<String> {
    let certificate = certify_stability_with_sweep(&params.inner, n, lambda_max, sweep_count)
        .map_err(numerics_err)?;
    serde_json_string(&certificate)
}

fn serde_json_string<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn bresse_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyParams>()?;
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(analytic_wave_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(shooting_determinant, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    Ok(())
}
