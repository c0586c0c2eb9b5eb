//! Transfer-matrix (shooting) eigenvalue analysis of the continuous
//! system: for a trial eigenvalue `s` the three fields satisfy a
//! constant-coefficient first-order ODE in space, propagated exactly by a
//! matrix exponential. Eigenvalues are the zeros of a 3x3 boundary
//! determinant. This path never discretizes space, so it serves as the
//! mesh-free oracle for the finite-element spectra.

use ndarray::prelude::*;
use ndarray_linalg::c64;

use crate::error::Result;
use crate::expm::expm;
use crate::model::BresseParams;

/// First-order coefficient matrix of the spatial ODE for
/// `X = (phi, psi, w, phi_x, psi_x, w_x)` at trial eigenvalue `s`
/// (time dependence `e^{s t}`):
///
/// `phi'' = ((s^2 rho1 + k0 ell^2)/kappa) phi - psi_x - ((kappa+k0) ell/kappa) w_x`
/// `psi'' = ((s^2 rho2 + kappa)/b) psi + (kappa/b) phi_x + (kappa ell/b) w`
/// `w''   = ((s^2 rho1 + kappa ell^2)/k0) w + ((kappa+k0) ell/k0) phi_x + (kappa ell/k0) psi`
pub fn ode_matrix(s: c64, p: &BresseParams) -> Array2<c64> {
    let mut a = Array2::<c64>::zeros((6, 6));
    let one = c64::new(1.0, 0.0);
    a[[0, 3]] = one;
    a[[1, 4]] = one;
    a[[2, 5]] = one;
    let s2 = s * s;
    a[[3, 0]] = (s2 * p.rho1 + p.k0 * p.ell * p.ell) / p.kappa;
    a[[3, 4]] = -one;
    a[[3, 5]] = c64::new(-(p.kappa + p.k0) * p.ell / p.kappa, 0.0);
    a[[4, 1]] = (s2 * p.rho2 + p.kappa) / p.b;
    a[[4, 3]] = c64::new(p.kappa / p.b, 0.0);
    a[[4, 2]] = c64::new(p.kappa * p.ell / p.b, 0.0);
    a[[5, 2]] = (s2 * p.rho1 + p.kappa * p.ell * p.ell) / p.k0;
    a[[5, 3]] = c64::new((p.kappa + p.k0) * p.ell / p.k0, 0.0);
    a[[5, 1]] = c64::new(p.kappa * p.ell / p.k0, 0.0);
    a
}

/// Propagator of the spatial ODE across the beam, `exp(L A(s))`.
pub fn transfer_matrix(s: c64, p: &BresseParams) -> Result<Array2<c64>> {
    expm(&ode_matrix(s, p).mapv(|z| z * p.length))
}

/// Boundary determinant whose zeros are the eigenvalues of the damped
/// continuous operator.
///
/// A 3-dimensional family of initial values at x = 0 satisfies the three
/// feedback conditions; parametrizing it by unit boundary displacements
/// `(phi, psi, w)(0) = e_i` fixes the slopes as
///
/// `phi_x(0) = gamma1 s phi(0)/kappa - psi(0) - ell w(0)`
/// `psi_x(0) = gamma2 s psi(0)/b`
/// `w_x(0)   = gamma3 s w(0)/k0 + ell phi(0)`.
///
/// Each member is propagated to x = L; the determinant of their clamped
/// traces `(phi, psi, w)(L)` vanishes exactly on the spectrum.
pub fn characteristic_function(s: c64, p: &BresseParams) -> Result<c64> {
    let t = transfer_matrix(s, p)?;
    let mut traces = Array2::<c64>::zeros((3, 3));
    for i in 0..3 {
        let mut x0 = Array1::<c64>::zeros(6);
        x0[i] = c64::new(1.0, 0.0);
        let (phi0, psi0, w0) = (x0[0], x0[1], x0[2]);
        x0[3] = p.gamma1 * s * phi0 / p.kappa - psi0 - p.ell * w0;
        x0[4] = p.gamma2 * s * psi0 / p.b;
        x0[5] = p.gamma3 * s * w0 / p.k0 + p.ell * phi0;
        let xl = t.dot(&x0);
        for row in 0..3 {
            traces[[row, i]] = xl[row];
        }
    }
    Ok(det3(&traces))
}

fn det3(m: &Array2<c64>) -> c64 {
    m[[0, 0]] * (m[[1, 1]] * m[[2, 2]] - m[[1, 2]] * m[[2, 1]])
        - m[[0, 1]] * (m[[1, 0]] * m[[2, 2]] - m[[1, 2]] * m[[2, 0]])
        + m[[0, 2]] * (m[[1, 0]] * m[[2, 1]] - m[[1, 1]] * m[[2, 0]])
}

/// One refined root of the characteristic function.
#[derive(Debug, Clone, Copy)]
pub struct RefinedRoot {
    pub seed: c64,
    pub root: c64,
    /// |F| at the accepted iterate.
    pub residual: f64,
    pub iterations: usize,
}

/// Outcome of refining a batch of seeds.
#[derive(Debug, Clone, Default)]
pub struct ShootingRefinement {
    pub converged: Vec<RefinedRoot>,
    pub failed_seeds: Vec<c64>,
}

const MAX_SECANT_ITERATIONS: usize = 80;

fn secant_refine(seed: c64, p: &BresseParams, tol: f64) -> Result<Option<RefinedRoot>> {
    let mut s0 = seed;
    // Offset start that works for seeds at or near the origin too.
    let mut s1 = seed * c64::new(1.0 + 1e-6, 0.0) + c64::new(1e-6, 1e-6);
    let mut f0 = characteristic_function(s0, p)?;
    let mut f1 = characteristic_function(s1, p)?;
    if f0.norm() == 0.0 {
        return Ok(Some(RefinedRoot {
            seed,
            root: s0,
            residual: 0.0,
            iterations: 0,
        }));
    }
    for it in 1..=MAX_SECANT_ITERATIONS {
        let denom = f1 - f0;
        if denom.norm() == 0.0 {
            return Ok(None);
        }
        // The secant step f / f' estimates the distance to the root.
        let step = f1 * (s1 - s0) / denom;
        let s2 = s1 - step;
        s0 = s1;
        f0 = f1;
        s1 = s2;
        f1 = characteristic_function(s1, p)?;
        if step.norm() <= tol * s1.norm().max(1.0) {
            return Ok(Some(RefinedRoot {
                seed,
                root: s1,
                residual: f1.norm(),
                iterations: it,
            }));
        }
        if !s1.re.is_finite() || !s1.im.is_finite() {
            return Ok(None);
        }
    }
    Ok(None)
}

/// Secant refinement of each seed towards a zero of the characteristic
/// function. Converged roots are deduplicated within `1e-8 * max(1, |s|)`;
/// seeds that fail to converge are reported, not fatal.
pub fn find_eigen_shooting(
    seeds: &[c64],
    p: &BresseParams,
    tol: f64,
) -> Result<ShootingRefinement> {
    let mut out = ShootingRefinement::default();
    for &seed in seeds {
        match secant_refine(seed, p, tol)? {
            Some(found) => {
                let duplicate = out.converged.iter().any(|other| {
                    (other.root - found.root).norm() <= 1e-8 * found.root.norm().max(1.0)
                });
                if !duplicate {
                    out.converged.push(found);
                }
            }
            None => out.failed_seeds.push(seed),
        }
    }
    Ok(out)
}
