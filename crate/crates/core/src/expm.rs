//! Dense complex matrix exponential by scaling and squaring with Pade
//! approximants (degrees 3/5/7/9/13, switched on the 1-norm).

use ndarray::prelude::*;
use ndarray_linalg::{c64, Solve};

use crate::error::Result;

fn one_norm(a: &Array2<c64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        worst = worst.max(s);
    }
    worst
}

fn identity(n: usize) -> Array2<c64> {
    Array2::from_diag(&Array1::from_elem(n, c64::new(1.0, 0.0)))
}

fn pade_uv(a: &Array2<c64>, coeffs: &[f64]) -> (Array2<c64>, Array2<c64>) {
    let n = a.nrows();
    let a2 = a.dot(a);
    let mut even = identity(n).mapv(|z| z * coeffs[0]);
    let mut odd = identity(n).mapv(|z| z * coeffs[1]);
    let mut power = identity(n);
    for k in (2..coeffs.len()).step_by(2) {
        power = power.dot(&a2);
        even = even + power.mapv(|z| z * coeffs[k]);
        if k + 1 < coeffs.len() {
            odd = odd + power.mapv(|z| z * coeffs[k + 1]);
        }
    }
    (a.dot(&odd), even)
}

fn pade13_uv(a: &Array2<c64>) -> (Array2<c64>, Array2<c64>) {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let id = identity(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let u_inner = a6.mapv(|z| z * B[13]) + a4.mapv(|z| z * B[11]) + a2.mapv(|z| z * B[9]);
    let u = a.dot(
        &(a6.dot(&u_inner)
            + a6.mapv(|z| z * B[7])
            + a4.mapv(|z| z * B[5])
            + a2.mapv(|z| z * B[3])
            + id.mapv(|z| z * B[1])),
    );
    let v_inner = a6.mapv(|z| z * B[12]) + a4.mapv(|z| z * B[10]) + a2.mapv(|z| z * B[8]);
    let v = a6.dot(&v_inner)
        + a6.mapv(|z| z * B[6])
        + a4.mapv(|z| z * B[4])
        + a2.mapv(|z| z * B[2])
        + id.mapv(|z| z * B[0]);
    (u, v)
}

/// exp(A) for a square complex matrix.
pub fn expm(a: &Array2<c64>) -> Result<Array2<c64>> {
    let norm = one_norm(a);
    let (u, v, squarings) = if norm < 1.495_585_217_958_292e-2 {
        let (u, v) = pade_uv(a, &[120.0, 60.0, 12.0, 1.0]);
        (u, v, 0u32)
    } else if norm < 2.539_398_330_063_23e-1 {
        let (u, v) = pade_uv(a, &[30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0]);
        (u, v, 0)
    } else if norm < 9.504_178_996_162_932e-1 {
        let (u, v) = pade_uv(
            a,
            &[
                17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
            ],
        );
        (u, v, 0)
    } else if norm < 2.097_847_961_257_068 {
        let (u, v) = pade_uv(
            a,
            &[
                17643225600.0,
                8821612800.0,
                2075673600.0,
                302702400.0,
                30270240.0,
                2162160.0,
                110880.0,
                3960.0,
                90.0,
                1.0,
            ],
        );
        (u, v, 0)
    } else {
        const MAX_NORM: f64 = 5.371_920_351_148_152;
        let squarings = ((norm / MAX_NORM).log2().ceil() as i32).max(0) as u32;
        let scaled = a.mapv(|z| z * 2f64.powi(-(squarings as i32)));
        let (u, v) = pade13_uv(&scaled);
        (u, v, squarings)
    };

    // Pade approximant: (V - U)^{-1} (V + U), solved column by column.
    let numer = &v + &u;
    let denom = &v - &u;
    let n = a.nrows();
    let mut result = Array2::<c64>::zeros((n, n));
    for j in 0..n {
        let col = denom.solve(&numer.column(j).to_owned())?;
        result.column_mut(j).assign(&col);
    }
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    Ok(result)
}
