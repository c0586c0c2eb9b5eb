//! Batch front end: run configurations, subcommand drivers and report
//! emission. All numeric output is written as flat CSV/JSON files plus
//! deterministic SVG plots; a fixed config and seed reproduce the output
//! byte for byte.

pub mod plot;
pub mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::Array1;
use ndarray_linalg::c64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::FemSystem;
use crate::generator::{
    check_dissipativity, verify_boundary_estimates, verify_multiplier_identities, Generator,
    QFunction, StateVec,
};
use crate::model::BresseParams;
use crate::spectral::{certify_stability_with_sweep, compute_spectrum, resolvent_sweep};
use crate::timeint::{default_dt, fit_decay_rate, simulate};

use plot::PlotKind;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Numerics(#[from] crate::error::Error),
    #[error("malformed report {path}: {reason}")]
    MalformedReport { path: String, reason: String },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Named parameter presets. A scenario overrides only the fields it
/// names, after the config file and `--set` flags have been applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    #[default]
    Default,
    /// All three gains zero: conservative dynamics.
    Conservative,
    /// Zero curvature: straight-beam limit with a decoupled longitudinal
    /// wave.
    Timoshenko,
    /// Each gain set to its channel impedance.
    MatchedImpedance,
}

/// Flat on-disk config. Every key is optional; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    rho1: Option<f64>,
    rho2: Option<f64>,
    kappa: Option<f64>,
    k0: Option<f64>,
    b: Option<f64>,
    ell: Option<f64>,
    length: Option<f64>,
    gamma1: Option<f64>,
    gamma2: Option<f64>,
    gamma3: Option<f64>,
    n: Option<usize>,
    dt: Option<f64>,
    horizon: Option<f64>,
    fit_window_start: Option<f64>,
    fit_window_end: Option<f64>,
    lambda_max: Option<f64>,
    sweep_count: Option<usize>,
    scenario: Option<Scenario>,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
}

/// Resolved run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub params: BresseParams,
    pub n: usize,
    /// Time step; `None` selects `h / (2 c_max)`.
    pub dt: Option<f64>,
    pub horizon: f64,
    pub fit_window: (f64, f64),
    pub lambda_max: f64,
    pub sweep_count: usize,
    pub scenario: Scenario,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: BresseParams::default(),
            n: 64,
            dt: None,
            horizon: 8.0,
            fit_window: (2.0, 5.0),
            lambda_max: 200.0,
            sweep_count: 41,
            scenario: Scenario::Default,
            seed: 7,
            out_dir: default_out_dir(),
        }
    }
}

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "BRESSE_OUT_DIR";

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("bresse-out"))
}

/// Loads the configuration: defaults, then the optional JSON file, then
/// `--set key=value` overrides, then the scenario preset; the result is
/// re-validated. Errors name the offending field.
pub fn parse_config(
    path: Option<&Path>,
    sets: &[String],
    out_override: Option<&Path>,
) -> CliResult<RunConfig> {
    let mut map: BTreeMap<String, serde_json::Value> = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => BTreeMap::new(),
    };
    for entry in sets {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set needs KEY=VALUE, got `{entry}`")))?;
        let parsed = serde_json::from_str::<serde_json::Value>(value)
            .unwrap_or_else(|_| serde_json::Value::String(value.to_string()));
        map.insert(key.trim().to_string(), parsed);
    }
    let file: ConfigFile =
        serde_json::from_value(serde_json::Value::Object(map.into_iter().collect()))
            .map_err(|e| CliError::Config(e.to_string()))?;

    let defaults = RunConfig::default();
    let mut params = BresseParams::default();
    params.rho1 = file.rho1.unwrap_or(params.rho1);
    params.rho2 = file.rho2.unwrap_or(params.rho2);
    params.kappa = file.kappa.unwrap_or(params.kappa);
    params.k0 = file.k0.unwrap_or(params.k0);
    params.b = file.b.unwrap_or(params.b);
    params.ell = file.ell.unwrap_or(params.ell);
    params.length = file.length.unwrap_or(params.length);
    params.gamma1 = file.gamma1.unwrap_or(params.gamma1);
    params.gamma2 = file.gamma2.unwrap_or(params.gamma2);
    params.gamma3 = file.gamma3.unwrap_or(params.gamma3);

    let scenario = file.scenario.unwrap_or_default();
    match scenario {
        Scenario::Default => {}
        Scenario::Conservative => {
            params.gamma1 = 0.0;
            params.gamma2 = 0.0;
            params.gamma3 = 0.0;
        }
        Scenario::Timoshenko => {
            params.ell = 0.0;
        }
        Scenario::MatchedImpedance => {
            let z = params.impedances();
            params.gamma1 = z[0];
            params.gamma2 = z[1];
            params.gamma3 = z[2];
        }
    }

    let config = RunConfig {
        params,
        n: file.n.unwrap_or(defaults.n),
        dt: file.dt,
        horizon: file.horizon.unwrap_or(defaults.horizon),
        fit_window: (
            file.fit_window_start.unwrap_or(defaults.fit_window.0),
            file.fit_window_end.unwrap_or(defaults.fit_window.1),
        ),
        lambda_max: file.lambda_max.unwrap_or(defaults.lambda_max),
        sweep_count: file.sweep_count.unwrap_or(defaults.sweep_count),
        scenario,
        seed: file.seed.unwrap_or(defaults.seed),
        out_dir: out_override
            .map(Path::to_path_buf)
            .or(file.out_dir)
            .unwrap_or(defaults.out_dir),
    };
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> CliResult<()> {
        self.params
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if self.n == 0 {
            return Err(CliError::Config(
                "n: element count must be at least 1".into(),
            ));
        }
        if let Some(dt) = self.dt {
            if !dt.is_finite() || dt <= 0.0 {
                return Err(CliError::Config(format!("dt: must be positive, got {dt}")));
            }
        }
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(CliError::Config(format!(
                "horizon: must be positive, got {}",
                self.horizon
            )));
        }
        if !self.lambda_max.is_finite() || self.lambda_max <= 0.0 {
            return Err(CliError::Config(format!(
                "lambda_max: must be positive, got {}",
                self.lambda_max
            )));
        }
        if self.sweep_count < 2 {
            return Err(CliError::Config(
                "sweep_count: need at least 2 grid points".into(),
            ));
        }
        Ok(())
    }

    pub fn build_system(&self) -> CliResult<FemSystem> {
        Ok(FemSystem::build(self.params, self.n)?)
    }

    pub fn effective_dt(&self, sys: &FemSystem) -> f64 {
        self.dt.unwrap_or_else(|| default_dt(sys))
    }
}

/// Smooth seeded initial data: the first three clamped sine modes per
/// field with coefficients drawn from the seed, for both displacements
/// and velocities.
pub fn smooth_initial_state(sys: &FemSystem, seed: u64) -> StateVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = sys.n();
    let length = sys.grid.length();
    let mut field = |_| {
        let coeffs: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        Array1::from_iter((0..n).map(|j| {
            let x = sys.grid.node(j);
            coeffs
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    a * ((k + 1) as f64 * std::f64::consts::PI * (length - x) / length).sin()
                })
                .sum::<f64>()
        }))
    };
    let mut u = Array1::<f64>::zeros(3 * n);
    let mut v = Array1::<f64>::zeros(3 * n);
    for block in 0..3 {
        u.slice_mut(ndarray::s![block * n..(block + 1) * n])
            .assign(&field(block));
    }
    for block in 0..3 {
        v.slice_mut(ndarray::s![block * n..(block + 1) * n])
            .assign(&field(block));
    }
    StateVec::from_real(u, v)
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub mu: f64,
    pub fit_residual: f64,
    pub fit_window: (f64, f64),
    pub dt: f64,
    pub steps: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub max_balance_defect: f64,
    pub params: BresseParams,
    pub n: usize,
    pub seed: u64,
}

/// `simulate`: energy trace CSV, JSON summary with the fitted decay rate,
/// and a log-energy plot.
pub fn run_simulate(config: &RunConfig) -> CliResult<SimulateSummary> {
    let sys = config.build_system()?;
    let dt = config.effective_dt(&sys);
    let initial = smooth_initial_state(&sys, config.seed);
    let trace = simulate(&initial, config.horizon, dt, &sys)?;
    let window = (
        config.fit_window.0.min(config.horizon * 0.5),
        config.fit_window.1.min(config.horizon),
    );
    let fit = fit_decay_rate(&trace, window)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let csv = config.out_dir.join("trace.csv");
    report::write_trace_csv(&csv, &trace)?;
    plot::emit_plot(&csv, PlotKind::Energy, &config.out_dir.join("energy.svg"))?;
    let summary = SimulateSummary {
        mu: fit.mu,
        fit_residual: fit.residual,
        fit_window: window,
        dt,
        steps: trace.boundary_losses.len(),
        initial_energy: trace.energies[0],
        final_energy: *trace.energies.last().unwrap(),
        max_balance_defect: trace.max_balance_defect(),
        params: config.params,
        n: config.n,
        seed: config.seed,
    };
    report::write_json(&config.out_dir.join("simulate_summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct SpectrumSummary {
    pub spectral_abscissa: f64,
    pub imag_axis_clearance: f64,
    pub n: usize,
    pub count: usize,
    pub params: BresseParams,
}

/// `spectrum`: eigenvalue CSV (re, im), JSON summary with the abscissa,
/// and a complex-plane plot.
pub fn run_spectrum(config: &RunConfig) -> CliResult<SpectrumSummary> {
    let sys = config.build_system()?;
    let report_data = compute_spectrum(&sys)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let csv = config.out_dir.join("spectrum.csv");
    report::write_spectrum_csv(&csv, &report_data.eigenvalues)?;
    plot::emit_plot(
        &csv,
        PlotKind::Spectrum,
        &config.out_dir.join("spectrum.svg"),
    )?;
    let summary = SpectrumSummary {
        spectral_abscissa: report_data.spectral_abscissa,
        imag_axis_clearance: report_data.imag_axis_clearance,
        n: config.n,
        count: report_data.eigenvalues.len(),
        params: config.params,
    };
    report::write_json(&config.out_dir.join("spectrum_summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub sup_norm: f64,
    pub argmax: f64,
    pub lambda_max: f64,
    pub count: usize,
    pub n: usize,
}

/// `sweep`: resolvent-norm CSV over the symmetric frequency grid, JSON
/// summary with the sup, and a norm-versus-frequency plot.
pub fn run_sweep(config: &RunConfig) -> CliResult<SweepSummary> {
    let sys = config.build_system()?;
    let sweep = resolvent_sweep(config.lambda_max, config.sweep_count, &sys)?;
    std::fs::create_dir_all(&config.out_dir)?;
    let csv = config.out_dir.join("sweep.csv");
    report::write_sweep_csv(&csv, &sweep)?;
    plot::emit_plot(&csv, PlotKind::Sweep, &config.out_dir.join("sweep.svg"))?;
    let summary = SweepSummary {
        sup_norm: sweep.sup_norm,
        argmax: sweep.argmax,
        lambda_max: config.lambda_max,
        count: sweep.lambdas.len(),
        n: config.n,
    };
    report::write_json(&config.out_dir.join("sweep_summary.json"), &summary)?;
    Ok(summary)
}

/// `certify`: writes the certificate JSON; the exit status of the
/// subcommand equals the certificate verdict.
pub fn run_certify(config: &RunConfig) -> CliResult<crate::spectral::StabilityCertificate> {
    let certificate = certify_stability_with_sweep(
        &config.params,
        config.n,
        config.lambda_max,
        config.sweep_count,
    )?;
    std::fs::create_dir_all(&config.out_dir)?;
    report::write_json(&config.out_dir.join("certificate.json"), &certificate)?;
    Ok(certificate)
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub pass: bool,
    /// max |Re<AU,U> + v^T D v| / |U|^2 over seeded random states.
    pub dissipativity_max_relative: f64,
    pub dissipativity_bound: f64,
    /// Multiplier-identity defects on a mesh-doubling ladder at the probe
    /// frequency, coarsest first: (n, phi, psi, w).
    pub multiplier_lambda: f64,
    pub multiplier_residuals: Vec<(usize, f64, f64, f64)>,
    /// Worst per-identity shrink factor between consecutive meshes.
    pub multiplier_min_factor: f64,
    pub multiplier_factor_bound: f64,
    /// Boundary-trace ratios over integer frequencies 1..=100: maxima on
    /// the lower and upper halves of the sweep, per ratio.
    pub boundary_max_lower: [f64; 3],
    pub boundary_max_upper: [f64; 3],
    pub failures: Vec<String>,
}

const DISSIPATIVITY_BOUND: f64 = 1e-11;
const MULTIPLIER_FACTOR_BOUND: f64 = 1.8;

/// Smooth deterministic load used by the identity verifiers; sampling the
/// same six functions on every mesh keeps the refinement study
/// mesh-consistent.
pub fn smooth_load(sys: &FemSystem) -> StateVec {
    let n = sys.n();
    let length = sys.grid.length();
    let pi = std::f64::consts::PI;
    let shapes: [Box<dyn Fn(f64) -> f64>; 6] = [
        Box::new(move |x| (pi * (length - x) / length).sin()),
        Box::new(move |x| (2.0 * pi * x / length).sin() * (length - x)),
        Box::new(move |x| x * (length - x)),
        Box::new(move |x| (pi * x / length).cos() * (length - x)),
        Box::new(move |x| (3.0 * pi * (length - x) / length).sin()),
        Box::new(move |x| (length - x) * (length - x) * x),
    ];
    let mut u = Array1::<c64>::zeros(3 * n);
    let mut v = Array1::<c64>::zeros(3 * n);
    for j in 0..n {
        let x = sys.grid.node(j);
        for block in 0..3 {
            u[block * n + j] = c64::new(shapes[block](x), 0.0);
            v[block * n + j] = c64::new(shapes[3 + block](x), 0.0);
        }
    }
    StateVec { u, v }
}

/// `verify`: residual checks of the dissipativity identity, the
/// multiplier identities and the boundary-trace estimates.
pub fn run_verify(config: &RunConfig) -> CliResult<VerifyReport> {
    let mut failures = Vec::new();

    let sys = config.build_system()?;
    let dissipativity = check_dissipativity(&sys, 200, config.seed)?;
    if dissipativity > DISSIPATIVITY_BOUND {
        failures.push(format!(
            "dissipativity defect {dissipativity:.3e} exceeds {DISSIPATIVITY_BOUND:.1e}"
        ));
    }

    let multiplier_lambda = 5.0;
    let mut ladder = Vec::new();
    let mut meshes: Vec<usize> = vec![config.n / 4, config.n / 2, config.n];
    meshes.retain(|&m| m >= 4);
    for &m in &meshes {
        let sub = FemSystem::build(config.params, m)?;
        let generator = Generator::new(sub.clone())?;
        let load = smooth_load(&sub);
        let q = QFunction::x_minus_length(&sub);
        let r = verify_multiplier_identities(multiplier_lambda, &load, &generator, &q)?;
        ladder.push((m, r.phi, r.psi, r.w));
    }
    let mut min_factor = f64::INFINITY;
    for pair in ladder.windows(2) {
        let (_, c1, c2, c3) = pair[0];
        let (_, f1, f2, f3) = pair[1];
        for (coarse, fine) in [(c1, f1), (c2, f2), (c3, f3)] {
            if fine > 0.0 {
                min_factor = min_factor.min(coarse / fine);
            }
        }
    }
    if ladder.len() >= 2 && min_factor < MULTIPLIER_FACTOR_BOUND {
        failures.push(format!(
            "multiplier residual shrink factor {min_factor:.3} below {MULTIPLIER_FACTOR_BOUND}"
        ));
    }

    let generator = Generator::new(sys.clone())?;
    let load = smooth_load(&sys);
    let mut max_lower = [0.0f64; 3];
    let mut max_upper = [0.0f64; 3];
    for k in 1..=100 {
        let lambda = k as f64;
        let ratios = verify_boundary_estimates(lambda, &load, &generator)?;
        let target = if k <= 50 {
            &mut max_lower
        } else {
            &mut max_upper
        };
        target[0] = target[0].max(ratios.velocity);
        target[1] = target[1].max(ratios.displacement);
        target[2] = target[2].max(ratios.derivative);
    }
    for i in 0..3 {
        if max_upper[i] > 2.0 * max_lower[i] {
            failures.push(format!(
                "boundary ratio {i} grows along the sweep: upper {:.3e} vs lower {:.3e}",
                max_upper[i], max_lower[i]
            ));
        }
    }

    let report_data = VerifyReport {
        pass: failures.is_empty(),
        dissipativity_max_relative: dissipativity,
        dissipativity_bound: DISSIPATIVITY_BOUND,
        multiplier_lambda,
        multiplier_residuals: ladder,
        multiplier_min_factor: min_factor,
        multiplier_factor_bound: MULTIPLIER_FACTOR_BOUND,
        boundary_max_lower: max_lower,
        boundary_max_upper: max_upper,
        failures,
    };
    std::fs::create_dir_all(&config.out_dir)?;
    report::write_json(&config.out_dir.join("verify.json"), &report_data)?;
    Ok(report_data)
}
