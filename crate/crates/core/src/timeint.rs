//! Implicit-midpoint time integration of the semi-discrete system and
//! decay-rate extraction from the resulting energy traces.
//!
//! The midpoint rule applied to `M v' = -(K u + D v)`, `u' = v` satisfies
//! a per-step energy identity that mirrors the boundary-dissipation law of
//! the continuous model exactly:
//!
//! `E_{n+1} - E_n = -dt * v_mid^T D v_mid`.
//!
//! Each step solves one SPD system with the fixed matrix
//! `M + (dt/2) D + (dt^2/4) K`, factored once per (system, dt).

use ndarray::prelude::*;
use ndarray_linalg::{c64, CholeskyFactorized, FactorizeC, SolveC, UPLO};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::FemSystem;
use crate::generator::{discrete_energy, real_mat_vec, StateVec};
use crate::model::BresseParams;

/// Time series of the discrete energy and the per-step boundary losses.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyTrace {
    /// Sample instants, `t_n = n dt`, length `steps + 1`.
    pub times: Vec<f64>,
    /// Energy at each instant, length `steps + 1`.
    pub energies: Vec<f64>,
    /// Energy removed through the boundary during step n,
    /// `dt * v_mid^T D v_mid >= 0`; length `steps`.
    pub boundary_losses: Vec<f64>,
    /// Parameter snapshot of the run.
    pub params: BresseParams,
    pub dt: f64,
}

impl EnergyTrace {
    /// Largest per-step defect of the energy balance,
    /// `max_n |E_{n+1} - E_n + loss_n|`.
    pub fn max_balance_defect(&self) -> f64 {
        self.energies
            .windows(2)
            .zip(&self.boundary_losses)
            .map(|(e, loss)| (e[1] - e[0] + loss).abs())
            .fold(0.0, f64::max)
    }
}

/// Midpoint stepper with the per-(dt, system) factorization cached.
pub struct MidpointStepper<'a> {
    stiffness: &'a Array2<f64>,
    damping: &'a Array2<f64>,
    dt: f64,
    step_chol: CholeskyFactorized<ndarray::OwnedRepr<f64>>,
}

impl<'a> MidpointStepper<'a> {
    pub fn new(sys: &'a FemSystem, dt: f64) -> Result<Self> {
        Self::from_blocks(&sys.mass, &sys.stiffness, &sys.damping, dt)
    }

    /// Stepper over an explicit (M, K, D) triple; lets single-field
    /// subsystems (such as the decoupled longitudinal wave) integrate
    /// without dragging the full three-field system along.
    pub fn from_blocks(
        mass: &Array2<f64>,
        stiffness: &'a Array2<f64>,
        damping: &'a Array2<f64>,
        dt: f64,
    ) -> Result<Self> {
        if !dt.is_finite() || dt == 0.0 {
            return Err(Error::InvalidParam {
                name: "dt",
                reason: format!("time step must be nonzero and finite, got {dt}"),
            });
        }
        // M + (dt/2) D + (dt^2/4) K is SPD for every dt (also for
        // negative dt with D = 0, which the reversibility tests use).
        let g = mass + &(0.5 * dt * damping) + &(0.25 * dt * dt * stiffness);
        let step_chol = g.factorizec(UPLO::Lower)?;
        Ok(Self {
            stiffness,
            damping,
            dt,
            step_chol,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances one step and reports the boundary loss of the step.
    pub fn step(&self, state: &StateVec) -> Result<(StateVec, f64)> {
        let dt = self.dt;
        // [M + (dt/2)D + (dt^2/4)K] dv = -dt [K (u + (dt/2) v) + D v]
        let predictor = &state.u + &state.v.mapv(|z| z * 0.5 * dt);
        let rhs = (real_mat_vec(self.stiffness, &predictor) + real_mat_vec(self.damping, &state.v))
            .mapv(|z| z * -dt);
        let dv_re = self.step_chol.solvec(&rhs.mapv(|z| z.re))?;
        let dv_im = self.step_chol.solvec(&rhs.mapv(|z| z.im))?;
        let dv = Array1::from_iter(
            dv_re
                .iter()
                .zip(dv_im.iter())
                .map(|(&r, &i)| c64::new(r, i)),
        );
        let v_mid = &state.v + &dv.mapv(|z| 0.5 * z);
        let u_next = &state.u + &v_mid.mapv(|z| dt * z);
        let v_next = &state.v + &dv;
        let dvm = real_mat_vec(self.damping, &v_mid);
        let loss = dt
            * v_mid
                .iter()
                .zip(dvm.iter())
                .map(|(&a, &b)| (a.conj() * b).re)
                .sum::<f64>();
        Ok((
            StateVec {
                u: u_next,
                v: v_next,
            },
            loss,
        ))
    }
}

/// One midpoint step of size `dt`. For repeated stepping prefer
/// [`MidpointStepper`], which factors the step matrix once.
pub fn step_midpoint(state: &StateVec, dt: f64, sys: &FemSystem) -> Result<StateVec> {
    Ok(MidpointStepper::new(sys, dt)?.step(state)?.0)
}

/// Integrates from `initial` over `ceil(horizon/dt)` steps and records the
/// energy trace.
pub fn simulate(initial: &StateVec, horizon: f64, dt: f64, sys: &FemSystem) -> Result<EnergyTrace> {
    if !horizon.is_finite() || horizon <= 0.0 || !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidParam {
            name: "horizon",
            reason: format!("need horizon > 0 and dt > 0, got horizon {horizon}, dt {dt}"),
        });
    }
    let stepper = MidpointStepper::new(sys, dt)?;
    let steps = (horizon / dt).ceil() as usize;
    let mut times = Vec::with_capacity(steps + 1);
    let mut energies = Vec::with_capacity(steps + 1);
    let mut losses = Vec::with_capacity(steps);
    let mut state = initial.clone();
    times.push(0.0);
    energies.push(discrete_energy(&state, sys)?);
    for n in 0..steps {
        let (next, loss) = stepper.step(&state)?;
        state = next;
        times.push((n + 1) as f64 * dt);
        energies.push(discrete_energy(&state, sys)?);
        losses.push(loss);
    }
    Ok(EnergyTrace {
        times,
        energies,
        boundary_losses: losses,
        params: sys.params,
        dt,
    })
}

/// Exponential decay rate fitted to a trace window.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    /// `E(t) ~ exp(-2 mu t)`: mu is minus half the least-squares slope of
    /// `ln E` over the window.
    pub mu: f64,
    /// Euclidean norm of the residual of the linear fit.
    pub residual: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Least-squares fit of `ln E(t)` over `window = [t_a, t_b]`.
///
/// Fails when the window clips fewer than two samples or when an energy in
/// the window is nonpositive (the trace decayed to round-off; shrink the
/// window).
pub fn fit_decay_rate(trace: &EnergyTrace, window: (f64, f64)) -> Result<DecayFit> {
    let (start, end) = window;
    if end.is_nan() || start.is_nan() || end <= start {
        return Err(Error::BadFitWindow {
            start,
            end,
            reason: "window must satisfy t_a < t_b",
        });
    }
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (&t, &e) in trace.times.iter().zip(&trace.energies) {
        if t < start || t > end {
            continue;
        }
        if e <= 0.0 {
            return Err(Error::BadFitWindow {
                start,
                end,
                reason: "nonpositive energy in window (decayed to round-off)",
            });
        }
        ts.push(t);
        logs.push(e.ln());
    }
    if ts.len() < 2 {
        return Err(Error::BadFitWindow {
            start,
            end,
            reason: "window contains fewer than two samples",
        });
    }
    let n = ts.len() as f64;
    let mean_t = ts.iter().sum::<f64>() / n;
    let mean_l = logs.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut stl = 0.0;
    for (&t, &l) in ts.iter().zip(&logs) {
        stt += (t - mean_t) * (t - mean_t);
        stl += (t - mean_t) * (l - mean_l);
    }
    let slope = if stt > 0.0 { stl / stt } else { 0.0 };
    let intercept = mean_l - slope * mean_t;
    let residual = ts
        .iter()
        .zip(&logs)
        .map(|(&t, &l)| {
            let r = l - (slope * t + intercept);
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(DecayFit {
        mu: -0.5 * slope,
        residual,
        window,
        samples: ts.len(),
    })
}

/// Accuracy-motivated default step: half a transit of the fastest wave
/// across one element. The scheme itself is unconditionally stable.
pub fn default_dt(sys: &FemSystem) -> f64 {
    sys.grid.h() / (2.0 * sys.params.wave_speeds().max())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sys(n: usize) -> FemSystem {
        FemSystem::build(BresseParams::default(), n).unwrap()
    }

    #[test]
    fn zero_state_stays_zero() {
        let sys = sys(8);
        let z = StateVec::zeros(sys.n_dofs());
        let stepped = step_midpoint(&z, 0.05, &sys).unwrap();
        assert_eq!(discrete_energy(&stepped, &sys).unwrap(), 0.0);
    }

    #[test]
    fn undamped_step_conserves_energy() {
        let p = BresseParams {
            gamma1: 0.0,
            gamma2: 0.0,
            gamma3: 0.0,
            ..Default::default()
        };
        let sys = FemSystem::build(p, 24).unwrap();
        let s = StateVec::random_real(sys.n_dofs(), 5);
        let e0 = discrete_energy(&s, &sys).unwrap();
        let stepped = step_midpoint(&s, 0.07, &sys).unwrap();
        let e1 = discrete_energy(&stepped, &sys).unwrap();
        assert_relative_eq!(e0, e1, max_relative = 1e-12);
    }

    #[test]
    fn one_step_energy_balance() {
        let sys = sys(24);
        let s = StateVec::random_real(sys.n_dofs(), 9);
        let stepper = MidpointStepper::new(&sys, 0.03).unwrap();
        let e0 = discrete_energy(&s, &sys).unwrap();
        let (next, loss) = stepper.step(&s).unwrap();
        let e1 = discrete_energy(&next, &sys).unwrap();
        assert!(loss >= 0.0);
        assert_relative_eq!(e1 - e0, -loss, max_relative = 1e-12);
    }

    #[test]
    fn unconditional_stability_for_large_steps() {
        let sys = sys(16);
        let s = StateVec::random_real(sys.n_dofs(), 1);
        let e0 = discrete_energy(&s, &sys).unwrap();
        for dt in [0.5, 2.0, 10.0, 100.0] {
            let trace = simulate(&s, 5.0 * dt, dt, &sys).unwrap();
            for &e in &trace.energies {
                assert!(e <= e0 * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn undamped_stepping_is_time_reversible() {
        let p = BresseParams {
            gamma1: 0.0,
            gamma2: 0.0,
            gamma3: 0.0,
            ..Default::default()
        };
        let sys = FemSystem::build(p, 16).unwrap();
        let s = StateVec::random_real(sys.n_dofs(), 4);
        let forward = step_midpoint(&s, 0.05, &sys).unwrap();
        let back = step_midpoint(&forward, -0.05, &sys).unwrap();
        let diff = crate::generator::energy_norm(&back.sub(&s), &sys).unwrap();
        let scale = crate::generator::energy_norm(&s, &sys).unwrap();
        assert!(diff <= 1e-10 * scale, "reversibility defect {diff}");
    }

    #[test]
    fn trace_is_monotone_under_dissipation() {
        let sys = sys(16);
        let s = StateVec::random_real(sys.n_dofs(), 2);
        let trace = simulate(&s, 2.0, 0.01, &sys).unwrap();
        for pair in trace.energies.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-13));
        }
        assert!(trace.max_balance_defect() <= 1e-12 * trace.energies[0]);
    }

    #[test]
    fn synthetic_exponential_is_fit_exactly() {
        let mu = 0.3;
        let dt = 0.01;
        let times: Vec<f64> = (0..2001).map(|n| n as f64 * dt).collect();
        let energies: Vec<f64> = times.iter().map(|t| (-2.0 * mu * t).exp()).collect();
        let trace = EnergyTrace {
            boundary_losses: vec![0.0; times.len() - 1],
            times,
            energies,
            params: BresseParams::default(),
            dt,
        };
        let fit = fit_decay_rate(&trace, (0.0, 20.0)).unwrap();
        assert_relative_eq!(fit.mu, mu, max_relative = 1e-10);
        assert!(fit.residual <= 1e-10);
    }

    #[test]
    fn constant_trace_fits_zero_rate() {
        let times: Vec<f64> = (0..101).map(|n| n as f64 * 0.1).collect();
        let trace = EnergyTrace {
            boundary_losses: vec![0.0; 100],
            energies: vec![2.5; 101],
            times,
            params: BresseParams::default(),
            dt: 0.1,
        };
        let fit = fit_decay_rate(&trace, (0.0, 10.0)).unwrap();
        assert!(fit.mu.abs() <= 1e-15);
    }

    #[test]
    fn fit_rejects_bad_windows() {
        let trace = EnergyTrace {
            times: vec![0.0, 0.1, 0.2],
            energies: vec![1.0, 0.5, 0.0],
            boundary_losses: vec![0.5, 0.5],
            params: BresseParams::default(),
            dt: 0.1,
        };
        assert!(fit_decay_rate(&trace, (0.3, 0.1)).is_err());
        assert!(fit_decay_rate(&trace, (0.0, 0.2)).is_err()); // zero energy inside
        assert!(fit_decay_rate(&trace, (0.05, 0.08)).is_err()); // no samples
    }

    #[test]
    fn fitted_rate_is_scale_invariant() {
        let sys = sys(12);
        let s = StateVec::random_real(sys.n_dofs(), 3);
        let doubled = s.scaled(c64::new(2.0, 0.0));
        let t1 = simulate(&s, 3.0, 0.02, &sys).unwrap();
        let t2 = simulate(&doubled, 3.0, 0.02, &sys).unwrap();
        let f1 = fit_decay_rate(&t1, (0.5, 3.0)).unwrap();
        let f2 = fit_decay_rate(&t2, (0.5, 3.0)).unwrap();
        assert_relative_eq!(f1.mu, f2.mu, max_relative = 1e-9);
    }
}
