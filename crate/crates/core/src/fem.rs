//! Piecewise-linear finite elements on a uniform grid.
//!
//! The stiffness matrix is the Gram matrix of the coupled strain form
//!
//! `B(u, t) = kappa (phi_x + psi + ell w, t1_x + t2 + ell t3)
//!          + b (psi_x, t2_x) + k0 (w_x - ell phi, t3_x - ell t1)`,
//!
//! assembled with exact per-element integration, so the semi-discrete
//! system `M u'' + D u' + K u = 0` inherits the boundary-dissipation
//! identity of the continuous model exactly. The clamped end x = L is
//! eliminated; the controlled end x = 0 carries the rank-3 damping matrix.
//!
//! Degrees of freedom are ordered `[phi_0..phi_{N-1}, psi_0.., w_0..]`,
//! one block per field, node 0 first.

use ndarray::prelude::*;
use ndarray_linalg::{EigValsh, UPLO};

use crate::error::{Error, Result};
use crate::model::BresseParams;

/// Uniform grid on [0, length] with `n_elems` elements.
///
/// Node j sits at `j * h`. The clamped node is x_N = length; the
/// controlled node is x_0 = 0. Each field keeps `n_elems` unknowns
/// (nodes 0..N-1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n_elems: usize,
    h: f64,
    length: f64,
}

impl Grid {
    pub fn new(length: f64, n_elems: usize) -> Result<Self> {
        if n_elems == 0 {
            return Err(Error::InvalidParam {
                name: "n",
                reason: "element count must be at least 1".into(),
            });
        }
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidParam {
                name: "length",
                reason: format!("length must be positive, got {length}"),
            });
        }
        Ok(Self {
            n_elems,
            h: length / n_elems as f64,
            length,
        })
    }

    pub fn n_elems(&self) -> usize {
        self.n_elems
    }

    /// Mesh width.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Coordinate of node j, j = 0..=n_elems.
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    /// All node coordinates including the clamped node.
    pub fn nodes(&self) -> Array1<f64> {
        Array1::from_iter((0..=self.n_elems).map(|j| self.node(j)))
    }

    /// Unknowns per field after eliminating the clamped node.
    pub fn dofs_per_field(&self) -> usize {
        self.n_elems
    }
}

/// 2x2 table of exact integrals of products of the two hat functions on
/// one element.
type ElementTable = [[f64; 2]; 2];

// Exact element integrals for the two hat functions on one element of
// width h; `eta1` is the left hat, `eta2` the right one.
// VAL[i][j]   = int eta_i eta_j          (h/3, h/6 pattern)
// DER[i][j]   = int eta_i' eta_j'        (+-1/h)
// MIX[i][j]   = int eta_i' eta_j         (+-1/2, independent of h)
fn element_integrals(h: f64) -> (ElementTable, ElementTable, ElementTable) {
    let val = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
    let der = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
    let mix = [[-0.5, -0.5], [0.5, 0.5]];
    (val, der, mix)
}

/// Consistent (or lumped) mass matrix: block-diagonal with the scalar
/// piecewise-linear mass matrix scaled by rho1, rho2, rho1.
pub fn assemble_mass(p: &BresseParams, grid: &Grid, lumped: bool) -> Array2<f64> {
    let n = grid.dofs_per_field();
    let (val, _, _) = element_integrals(grid.h());
    let mut block = Array2::<f64>::zeros((n, n));
    for e in 0..grid.n_elems() {
        let idx = [e, e + 1];
        for a in 0..2 {
            for c in 0..2 {
                let (i, j) = (idx[a], idx[c]);
                if i < n && j < n {
                    block[[i, j]] += val[a][c];
                }
            }
        }
    }
    if lumped {
        let sums = block.sum_axis(Axis(1));
        block = Array2::from_diag(&sums);
    }
    let mut mass = Array2::<f64>::zeros((3 * n, 3 * n));
    for (field, rho) in [(0, p.rho1), (1, p.rho2), (2, p.rho1)] {
        let off = field * n;
        mass.slice_mut(s![off..off + n, off..off + n])
            .assign(&(rho * &block));
    }
    mass
}

/// Stiffness matrix: Gram matrix of the coupled strain form over the
/// piecewise-linear basis, clamped dof eliminated. Entry (i, j) couples
/// test function i with trial function j; the result is exactly symmetric
/// by construction of the per-element contributions.
pub fn assemble_stiffness(p: &BresseParams, grid: &Grid) -> Array2<f64> {
    let n = grid.dofs_per_field();
    let ell = p.ell;
    let (val, der, mix) = element_integrals(grid.h());
    let mut k = Array2::<f64>::zeros((3 * n, 3 * n));
    for e in 0..grid.n_elems() {
        let idx = [e, e + 1];
        for a in 0..2 {
            // trial local node
            for c in 0..2 {
                // test local node
                let (i, j) = (idx[a], idx[c]);
                if i >= n || j >= n {
                    continue;
                }
                // phi-phi: kappa phi_x u_x + k0 ell^2 phi u
                k[[j, i]] += p.kappa * der[a][c] + p.k0 * ell * ell * val[a][c];
                // psi-psi: b psi_x v_x + kappa psi v
                k[[n + j, n + i]] += p.b * der[a][c] + p.kappa * val[a][c];
                // w-w: k0 w_x p_x + kappa ell^2 w p
                k[[2 * n + j, 2 * n + i]] += p.k0 * der[a][c] + p.kappa * ell * ell * val[a][c];
                // trial phi against test psi: kappa phi_x v
                k[[n + j, i]] += p.kappa * mix[a][c];
                // trial psi against test phi: kappa psi u_x
                k[[j, n + i]] += p.kappa * mix[c][a];
                // trial phi against test w: kappa ell phi_x p - k0 ell phi p_x
                k[[2 * n + j, i]] += p.kappa * ell * mix[a][c] - p.k0 * ell * mix[c][a];
                // trial w against test phi: kappa ell w u_x - k0 ell w_x u
                k[[j, 2 * n + i]] += p.kappa * ell * mix[c][a] - p.k0 * ell * mix[a][c];
                // trial psi against test w and vice versa: kappa ell psi p
                k[[2 * n + j, n + i]] += p.kappa * ell * val[a][c];
                k[[n + j, 2 * n + i]] += p.kappa * ell * val[a][c];
            }
        }
    }
    k
}

/// Boundary damping matrix: diagonal, `gamma_j` at the x = 0 dof of each
/// field, zero elsewhere.
pub fn assemble_damping(p: &BresseParams, grid: &Grid) -> Array2<f64> {
    let n = grid.dofs_per_field();
    let mut d = Array2::<f64>::zeros((3 * n, 3 * n));
    d[[0, 0]] = p.gamma1;
    d[[n, n]] = p.gamma2;
    d[[2 * n, 2 * n]] = p.gamma3;
    d
}

/// Smallest eigenvalue of the assembled stiffness matrix. The caller
/// asserts positivity (discrete coercivity of the strain form).
pub fn check_coercivity(stiffness: &Array2<f64>) -> Result<f64> {
    let eigs = stiffness.eigvalsh(UPLO::Lower)?;
    eigs.iter()
        .copied()
        .reduce(f64::min)
        .ok_or(Error::CoercivityLost)
}

/// Assembled matrices of the semi-discrete system together with the grid
/// and the parameter snapshot.
#[derive(Debug, Clone)]
pub struct FemSystem {
    pub mass: Array2<f64>,
    pub stiffness: Array2<f64>,
    pub damping: Array2<f64>,
    pub grid: Grid,
    pub params: BresseParams,
    pub lumped: bool,
}

impl FemSystem {
    /// Validates the parameters and assembles mass, stiffness and damping
    /// with consistent mass.
    pub fn build(params: BresseParams, n_elems: usize) -> Result<Self> {
        Self::build_with_mass(params, n_elems, false)
    }

    pub fn build_with_mass(params: BresseParams, n_elems: usize, lumped: bool) -> Result<Self> {
        params.validate()?;
        let grid = Grid::new(params.length, n_elems)?;
        Ok(Self {
            mass: assemble_mass(&params, &grid, lumped),
            stiffness: assemble_stiffness(&params, &grid),
            damping: assemble_damping(&params, &grid),
            grid,
            params,
            lumped,
        })
    }

    /// Unknowns per field.
    pub fn n(&self) -> usize {
        self.grid.dofs_per_field()
    }

    /// Total unknowns (3 fields).
    pub fn n_dofs(&self) -> usize {
        3 * self.grid.dofs_per_field()
    }

    /// The (mass, stiffness, damping) sub-blocks of the longitudinal
    /// field. With `ell = 0` the `w` equation decouples and this triple is
    /// a self-contained boundary-damped wave discretization.
    pub fn w_block(&self) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        let n = self.n();
        let r = 2 * n..3 * n;
        (
            self.mass.slice(s![r.clone(), r.clone()]).to_owned(),
            self.stiffness.slice(s![r.clone(), r.clone()]).to_owned(),
            self.damping.slice(s![r.clone(), r]).to_owned(),
        )
    }
}
