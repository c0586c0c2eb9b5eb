//! Physical parameters of the curved-beam (Bresse) model and closed-form
//! quantities of the continuous system: total energy, boundary dissipation
//! rate, wave speeds and the decoupled-wave spectrum used as an oracle.
//!
//! The model couples three fields on (0, L): vertical displacement `phi`,
//! shear angle `psi` and longitudinal displacement `w`, through the
//! curvature `ell = 1/R`. The end x = L is clamped; the end x = 0 carries
//! velocity feedback with gains `gamma1, gamma2, gamma3`.

use ndarray::Array1;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical constants and boundary gains.
///
/// Units are documentation only; all computations are carried out on the
/// plain floating-point values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BresseParams {
    /// Mass density times cross-section area (kg/m).
    pub rho1: f64,
    /// Mass density times second moment of area (kg m).
    pub rho2: f64,
    /// Shear stiffness (N).
    pub kappa: f64,
    /// Longitudinal stiffness (N).
    pub k0: f64,
    /// Bending stiffness (N m^2).
    pub b: f64,
    /// Curvature 1/R (1/m); `ell = 0` is the straight-beam limit.
    pub ell: f64,
    /// Beam length (m).
    pub length: f64,
    /// Velocity feedback gain on `phi` at x = 0.
    pub gamma1: f64,
    /// Velocity feedback gain on `psi` at x = 0.
    pub gamma2: f64,
    /// Velocity feedback gain on `w` at x = 0.
    pub gamma3: f64,
}

impl Default for BresseParams {
    /// Order-one parameter set with equal wave speeds and all three
    /// boundary channels strictly dissipative.
    fn default() -> Self {
        Self {
            rho1: 1.0,
            rho2: 1.0,
            kappa: 1.0,
            k0: 1.0,
            b: 1.0,
            ell: 0.5,
            length: 1.0,
            gamma1: 1.0,
            gamma2: 1.0,
            gamma3: 1.0,
        }
    }
}

impl BresseParams {
    /// Checks the admissibility of the parameter set: the stiffness and
    /// density constants and the length must be strictly positive, the
    /// curvature and the gains nonnegative.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho1", self.rho1),
            ("rho2", self.rho2),
            ("kappa", self.kappa),
            ("k0", self.k0),
            ("b", self.b),
            ("length", self.length),
        ];
        for (name, value) in positive {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidParam {
                    name,
                    reason: format!("must be strictly positive, got {value}"),
                });
            }
        }
        let nonneg = [
            ("ell", self.ell),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
        ];
        for (name, value) in nonneg {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidParam {
                    name,
                    reason: format!("must be nonnegative, got {value}"),
                });
            }
        }
        Ok(())
    }

    /// The three propagation speeds.
    pub fn wave_speeds(&self) -> WaveSpeeds {
        WaveSpeeds {
            shear: (self.kappa / self.rho1).sqrt(),
            bending: (self.b / self.rho2).sqrt(),
            longitudinal: (self.k0 / self.rho1).sqrt(),
        }
    }

    /// Boundary gains as an array, ordered (phi, psi, w).
    pub fn gammas(&self) -> [f64; 3] {
        [self.gamma1, self.gamma2, self.gamma3]
    }

    /// Characteristic impedances of the three channels: the gain value
    /// for which an uncoupled channel absorbs incoming waves completely.
    pub fn impedances(&self) -> [f64; 3] {
        [
            (self.kappa * self.rho1).sqrt(),
            (self.b * self.rho2).sqrt(),
            (self.k0 * self.rho1).sqrt(),
        ]
    }
}

/// Propagation speeds of the three channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSpeeds {
    /// sqrt(kappa/rho1), the shear-wave speed of the `phi` equation.
    pub shear: f64,
    /// sqrt(b/rho2), the bending-wave speed of the `psi` equation.
    pub bending: f64,
    /// sqrt(k0/rho1), the longitudinal-wave speed of the `w` equation.
    pub longitudinal: f64,
}

impl WaveSpeeds {
    pub fn max(&self) -> f64 {
        self.shear.max(self.bending).max(self.longitudinal)
    }

    pub fn min(&self) -> f64 {
        self.shear.min(self.bending).min(self.longitudinal)
    }
}

/// Instantaneous energy flux through the controlled boundary,
/// `-(gamma1 |v1|^2 + gamma2 |v2|^2 + gamma3 |v3|^2) <= 0`,
/// for the three boundary velocities at x = 0.
pub fn dissipation_rate(boundary_velocities: [f64; 3], p: &BresseParams) -> f64 {
    let [v1, v2, v3] = boundary_velocities;
    -(p.gamma1 * v1 * v1 + p.gamma2 * v2 * v2 + p.gamma3 * v3 * v3)
}

/// Quadrature rule used by [`continuous_energy`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Composite trapezoid within each element; piecewise-linear fields
    /// contribute their element slopes to the derivative terms.
    Trapezoid,
    /// Per-element Simpson rule. Exact for the piecewise-linear
    /// interpolant, hence identical to the finite-element energy
    /// `(u^T K u + v^T M v)/2` up to round-off.
    ElementExact,
}

/// One triple of nodal field samples on the grid nodes x_0..x_N
/// (N elements, N+1 nodes including the clamped node at x = L).
#[derive(Debug, Clone)]
pub struct NodalFields {
    pub phi: Array1<f64>,
    pub psi: Array1<f64>,
    pub w: Array1<f64>,
}

impl NodalFields {
    pub fn zeros(n_nodes: usize) -> Self {
        Self {
            phi: Array1::zeros(n_nodes),
            psi: Array1::zeros(n_nodes),
            w: Array1::zeros(n_nodes),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.phi.len()
    }

    fn check(&self, n_nodes: usize) -> Result<()> {
        for f in [&self.phi, &self.psi, &self.w] {
            if f.len() != n_nodes {
                return Err(Error::DimensionMismatch {
                    expected: n_nodes,
                    got: f.len(),
                });
            }
        }
        Ok(())
    }
}

/// Total energy of the sampled state,
///
/// `E = 1/2 int rho1 |W1|^2 + rho2 |W2|^2 + rho1 |W3|^2
///      + kappa |phi_x + psi + ell w|^2 + b |psi_x|^2 + k0 |w_x - ell phi|^2 dx`,
///
/// evaluated on the piecewise-linear interpolant of the nodal samples with
/// the requested quadrature. Both fields must be sampled on the same
/// uniform grid of `n+1` nodes spanning `[0, length]`.
pub fn continuous_energy(
    disp: &NodalFields,
    vel: &NodalFields,
    p: &BresseParams,
    quadrature: Quadrature,
) -> Result<f64> {
    let n_nodes = disp.n_nodes();
    if n_nodes < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: n_nodes,
        });
    }
    disp.check(n_nodes)?;
    vel.check(n_nodes)?;
    let n = n_nodes - 1;
    let h = p.length / n as f64;

    // Pointwise energy density given nodal values and the element slopes.
    let density =
        |phi: f64, psi: f64, w: f64, vp: f64, vs: f64, vw: f64, sp: f64, ss: f64, sw: f64| {
            let shear_strain = sp + psi + p.ell * w;
            let stretch = sw - p.ell * phi;
            p.rho1 * vp * vp
                + p.rho2 * vs * vs
                + p.rho1 * vw * vw
                + p.kappa * shear_strain * shear_strain
                + p.b * ss * ss
                + p.k0 * stretch * stretch
        };

    let mut total = 0.0;
    for e in 0..n {
        let (i, j) = (e, e + 1);
        let sp = (disp.phi[j] - disp.phi[i]) / h;
        let ss = (disp.psi[j] - disp.psi[i]) / h;
        let sw = (disp.w[j] - disp.w[i]) / h;
        let g_left = density(
            disp.phi[i],
            disp.psi[i],
            disp.w[i],
            vel.phi[i],
            vel.psi[i],
            vel.w[i],
            sp,
            ss,
            sw,
        );
        let g_right = density(
            disp.phi[j],
            disp.psi[j],
            disp.w[j],
            vel.phi[j],
            vel.psi[j],
            vel.w[j],
            sp,
            ss,
            sw,
        );
        total += match quadrature {
            Quadrature::Trapezoid => h * 0.5 * (g_left + g_right),
            Quadrature::ElementExact => {
                let g_mid = density(
                    0.5 * (disp.phi[i] + disp.phi[j]),
                    0.5 * (disp.psi[i] + disp.psi[j]),
                    0.5 * (disp.w[i] + disp.w[j]),
                    0.5 * (vel.phi[i] + vel.phi[j]),
                    0.5 * (vel.psi[i] + vel.psi[j]),
                    0.5 * (vel.w[i] + vel.w[j]),
                    sp,
                    ss,
                    sw,
                );
                h / 6.0 * (g_left + 4.0 * g_mid + g_right)
            }
        };
    }
    Ok(0.5 * total)
}

/// Point spectrum of the decoupled longitudinal wave (`ell = 0`) with a
/// clamped end at x = L and velocity feedback `gamma3` at x = 0.
///
/// Separated solutions `e^{st} y(x)` satisfy the reflection relation
/// `e^{-2 s L / c} = (Z + gamma3) / (gamma3 - Z)` with `c = sqrt(k0/rho1)`
/// and impedance `Z = sqrt(k0 rho1)`. For `gamma3 = Z` the relation has no
/// finite root (total absorption) and the list is empty. Otherwise the
/// roots form a vertical lattice: all share
/// `Re s = -(c/2L) ln((gamma3+Z)/|gamma3-Z|)` and their imaginary parts are
/// spaced by `pi c / L`, offset by `pi c / 2L` when `gamma3 < Z`.
///
/// Returns the `k_max` roots with nonnegative imaginary part, ordered by
/// increasing frequency; the spectrum is closed under conjugation.
pub fn analytic_wave_spectrum(p: &BresseParams, k_max: usize) -> Result<Vec<c64>> {
    if p.ell != 0.0 {
        return Err(Error::CurvatureNotZero(p.ell));
    }
    p.validate()?;
    let c = (p.k0 / p.rho1).sqrt();
    let z = (p.k0 * p.rho1).sqrt();
    let g = p.gamma3;
    if g == z {
        return Ok(Vec::new());
    }
    let re = -(c / (2.0 * p.length)) * ((g + z) / (g - z).abs()).ln();
    let spacing = std::f64::consts::PI * c / p.length;
    let offset = if g > z { 0.0 } else { 0.5 * spacing };
    Ok((0..k_max)
        .map(|k| c64::new(re, offset + k as f64 * spacing))
        .collect())
}

/// Residual of the reflection relation for a candidate eigenvalue of the
/// decoupled wave: zero exactly on the analytic spectrum.
pub fn wave_reflection_residual(s: c64, p: &BresseParams) -> f64 {
    let c = (p.k0 / p.rho1).sqrt();
    let z = (p.k0 * p.rho1).sqrt();
    let lhs = (-2.0 * s * p.length / c).exp() * (p.gamma3 - z);
    (lhs - (z + p.gamma3)).norm()
}
