//! Solver round-trips and residual verifiers of the first-order operator.

use bresse::cli::smooth_load;
use bresse::error::Error;
use bresse::fem::FemSystem;
use bresse::generator::{
    energy_norm, verify_boundary_estimates, verify_multiplier_identities, Generator, QFunction,
    StateVec,
};
use bresse::model::BresseParams;
use bresse::spectral::conservative_frequencies;
use ndarray_linalg::c64;

fn build(n: usize) -> Generator {
    Generator::new(FemSystem::build(BresseParams::default(), n).unwrap()).unwrap()
}

#[test]
fn static_solve_round_trip_on_random_loads() {
    let generator = build(32);
    let sys = &generator.sys;
    for seed in [1u64, 2, 3] {
        let load = StateVec::random_complex(sys.n_dofs(), seed);
        let solution = generator.solve_static(&load).unwrap();
        let reapplied = generator.apply(&solution).unwrap();
        let defect = energy_norm(&reapplied.sub(&load), sys).unwrap();
        let scale = energy_norm(&load, sys).unwrap();
        assert!(defect <= 1e-10 * scale, "seed {seed}: defect {defect}");

        // Two-sided inverse: solving for the image of a state returns it.
        let state = StateVec::random_complex(sys.n_dofs(), seed + 100);
        let recovered = generator
            .solve_static(&generator.apply(&state).unwrap())
            .unwrap();
        let back = energy_norm(&recovered.sub(&state), sys).unwrap();
        let state_scale = energy_norm(&state, sys).unwrap();
        assert!(back <= 1e-10 * state_scale, "seed {seed}: defect {back}");
    }
}

#[test]
fn resolvent_residual_is_small_across_frequencies() {
    let generator = build(32);
    let sys = &generator.sys;
    let load = StateVec::random_complex(sys.n_dofs(), 9);
    let norm_f = energy_norm(&load, sys).unwrap();
    for lambda in [0.5, 1.0, 5.0, 20.0, 100.0] {
        let solution = generator.solve_resolvent(lambda, &load).unwrap();
        let au = generator.apply(&solution).unwrap();
        let il = c64::new(0.0, lambda);
        let residual_state = StateVec {
            u: solution.u.mapv(|z| il * z) - &au.u - &load.u,
            v: solution.v.mapv(|z| il * z) - &au.v - &load.v,
        };
        let residual = energy_norm(&residual_state, sys).unwrap();
        assert!(
            residual <= 1e-10 * norm_f,
            "lambda {lambda}: residual {residual}"
        );
    }
}

#[test]
fn reduced_and_block_resolvents_agree() {
    let generator = build(24);
    let sys = &generator.sys;
    let load = StateVec::random_complex(sys.n_dofs(), 12);
    for lambda in [0.7, 6.0, 40.0] {
        let reduced = generator.solve_resolvent(lambda, &load).unwrap();
        let block = generator.solve_resolvent_block(lambda, &load).unwrap();
        let diff = energy_norm(&reduced.sub(&block), sys).unwrap();
        let scale = energy_norm(&reduced, sys).unwrap();
        assert!(
            diff <= 1e-9 * scale,
            "lambda {lambda}: routes differ by {diff}"
        );
    }
}

#[test]
fn undamped_resolvent_fails_at_a_conservative_frequency() {
    let p = BresseParams {
        gamma1: 0.0,
        gamma2: 0.0,
        gamma3: 0.0,
        ..Default::default()
    };
    let sys = FemSystem::build(p, 24).unwrap();
    let omega = conservative_frequencies(&sys).unwrap()[0];
    let generator = Generator::new(sys.clone()).unwrap();
    let load = StateVec::random_real(sys.n_dofs(), 4);
    match generator.solve_resolvent(omega, &load) {
        Err(Error::NearSingular { lambda }) => assert_eq!(lambda, omega),
        other => panic!("expected near-singularity at {omega}, got {other:?}"),
    }
}

#[test]
fn boundary_ratios_stay_bounded_and_survive_gain_scaling() {
    for gain in [1.0, 10.0] {
        let p = BresseParams {
            gamma1: gain,
            gamma2: gain,
            gamma3: gain,
            ..Default::default()
        };
        let sys = FemSystem::build(p, 48).unwrap();
        let generator = Generator::new(sys.clone()).unwrap();
        let load = smooth_load(&sys);
        let mut max_lower = [0.0f64; 3];
        let mut max_upper = [0.0f64; 3];
        for k in 1..=60 {
            let r = verify_boundary_estimates(k as f64, &load, &generator).unwrap();
            let bucket = if k <= 30 {
                &mut max_lower
            } else {
                &mut max_upper
            };
            bucket[0] = bucket[0].max(r.velocity);
            bucket[1] = bucket[1].max(r.displacement);
            bucket[2] = bucket[2].max(r.derivative);
        }
        for i in 0..3 {
            assert!(max_lower[i].is_finite() && max_upper[i].is_finite());
            assert!(
                max_upper[i] <= 2.0 * max_lower[i],
                "gain {gain}: ratio {i} grows along the sweep: {max_lower:?} vs {max_upper:?}"
            );
        }
    }
}

#[test]
fn multiplier_residuals_shrink_under_refinement() {
    let p = BresseParams::default();
    let q_of = QFunction::x_minus_length;
    let mut previous: Option<[f64; 3]> = None;
    for n in [16usize, 32, 64] {
        let sys = FemSystem::build(p, n).unwrap();
        let generator = Generator::new(sys.clone()).unwrap();
        let load = smooth_load(&sys);
        let r = verify_multiplier_identities(5.0, &load, &generator, &q_of(&sys)).unwrap();
        let current = [r.phi, r.psi, r.w];
        if let Some(prev) = previous {
            for i in 0..3 {
                assert!(
                    current[i] < prev[i],
                    "identity {i} did not shrink: {prev:?} -> {current:?} at n = {n}"
                );
            }
        }
        previous = Some(current);
    }
}
