//! Integrator behavior on physically meaningful runs: total absorption at
//! matched impedance, and coherence of the fitted decay rate with the
//! spectrum on eigenmode initial data.

use bresse::fem::FemSystem;
use bresse::generator::StateVec;
use bresse::model::BresseParams;
use bresse::timeint::{fit_decay_rate, simulate, MidpointStepper};
use ndarray::prelude::*;
use ndarray_linalg::{c64, Eig};

#[test]
fn matched_impedance_absorbs_a_wave_pulse_completely() {
    // Straight beam, only the longitudinal channel damped, with the gain
    // equal to the channel impedance sqrt(k0 rho1): an incoming wave is
    // absorbed without reflection. After one full traversal (both split
    // halves of the pulse have reached x = 0) the residual energy is
    // grid-dispersion leftovers only. With ell = 0 the longitudinal field
    // decouples, so only its block is integrated.
    let p = BresseParams {
        ell: 0.0,
        gamma1: 0.0,
        gamma2: 0.0,
        gamma3: 1.0, // = sqrt(k0 rho1)
        ..Default::default()
    };
    assert_eq!(p.gamma3, p.impedances()[2]);
    let n = 1024;
    let sys = FemSystem::build(p, n).unwrap();
    let (mass, stiffness, damping) = sys.w_block();
    let mut u = Array1::<f64>::zeros(n);
    for j in 0..n {
        let x = sys.grid.node(j);
        let s: f64 = (x - 0.5) / 0.35;
        if s.abs() < 1.0 {
            u[j] = (0.5 * std::f64::consts::PI * s).cos().powi(8);
        }
    }
    let energy_of = |state: &StateVec| -> f64 {
        let ur = state.u.mapv(|z| z.re);
        let vr = state.v.mapv(|z| z.re);
        0.5 * (ur.dot(&stiffness.dot(&ur)) + vr.dot(&mass.dot(&vr)))
    };
    let mut state = StateVec::from_real(u, Array1::zeros(n));
    let initial_energy = energy_of(&state);
    let dt = 5e-4;
    let travel_time = 2.0 * p.length / p.wave_speeds().longitudinal;
    let stepper = MidpointStepper::from_blocks(&mass, &stiffness, &damping, dt).unwrap();
    let steps = ((travel_time + 0.4) / dt).ceil() as usize;
    for _ in 0..steps {
        state = stepper.step(&state).unwrap().0;
    }
    let drop = energy_of(&state) / initial_energy;
    assert!(
        drop <= 1e-10,
        "matched absorber left E(T)/E0 = {drop:.3e} (expected >= 10 orders of decay)"
    );
}

#[test]
fn eigenmode_initial_data_decays_at_its_eigenvalue_rate() {
    // Drive the system with the real part of the least-damped eigenvector;
    // the energy then decays cleanly at twice the eigenvalue's real part
    // even over a long late window.
    let sys = FemSystem::build(BresseParams::default(), 64).unwrap();
    let generator = bresse::generator::Generator::new(sys.clone()).unwrap();
    let a = generator.dense_matrix();
    let (eigs, vecs) = a.eig().unwrap();

    // Rightmost eigenvalue among the low-frequency (mesh-resolved) modes.
    let mut best: Option<(usize, c64)> = None;
    for (i, &z) in eigs.iter().enumerate() {
        if z.im.abs() <= 1.0 {
            match best {
                Some((_, b)) if b.re >= z.re => {}
                _ => best = Some((i, z)),
            }
        }
    }
    let (index, lambda) = best.expect("a low-frequency mode exists");
    assert!(lambda.re < 0.0);

    let n = sys.n_dofs();
    let column = vecs.column(index);
    let u = Array1::from_iter(column.iter().take(n).map(|z| z.re));
    let v = Array1::from_iter(column.iter().skip(n).map(|z| z.re));
    let initial = StateVec::from_real(u, v);

    let trace = simulate(&initial, 15.0, 1e-3, &sys).unwrap();
    let fit = fit_decay_rate(&trace, (5.0, 15.0)).unwrap();
    let expected = -lambda.re;
    let rel = (fit.mu - expected).abs() / expected;
    assert!(
        rel <= 0.02,
        "fitted mu {} vs eigenvalue rate {expected} (rel {rel})",
        fit.mu
    );
}
