//! Cyclic Jacobi diagonalization of a complex Hermitian matrix.
//!
//! Each rotation annihilates one off-diagonal pair `(p, q)` with the unitary
//! `U = D·R·D*`, where `D` strips the phase of `a_pq` and `R` is the classic
//! real Jacobi rotation. Sweeps run in row-cyclic order, so the result is a
//! deterministic function of the input bits.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SpectraError};

/// Convergence: off-diagonal Frobenius norm below `OFF_TOL · ‖A‖_F`.
const OFF_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

fn off_norm(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Returns unsorted eigenvalues and the unitary whose columns are the
/// matching eigenvectors.
pub(super) fn diagonalize(input: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let n = input.nrows();
    let mut a = input.clone();
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let target = OFF_TOL * a.norm();

    for sweep in 0..=MAX_SWEEPS {
        let off = off_norm(&a);
        if off <= target {
            let values = (0..n).map(|i| a[(i, i)].re).collect();
            return Ok((values, v));
        }
        if sweep == MAX_SWEEPS {
            return Err(SpectraError::NoConvergence { off_norm: off });
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q, sweep);
            }
        }
    }
    unreachable!()
}

fn rotate(a: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize, sweep: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    // After a few sweeps an element negligible against both diagonal entries
    // is dropped outright.
    if sweep > 3 && app.abs() + 100.0 * b == app.abs() && aqq.abs() + 100.0 * b == aqq.abs() {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }

    let theta = (aqq - app) / (2.0 * b);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let omega = apq / b;

    // U_pp = c, U_pq = s·ω, U_qp = −s·ω̄, U_qq = c.
    let u_pq = omega * s;
    let u_qp = -omega.conj() * s;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * u_qp.conj();
        a[(q, k)] = apk * u_pq.conj() + aqk * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(app - t * b, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * b, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * c;
    }
}
