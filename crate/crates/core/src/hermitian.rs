//! Dense Hermitian matrices, ordered eigendecomposition and the Weyl check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, SpectraError};
use crate::rng::SplitMix64;

mod jacobi;

/// Relative asymmetry accepted (and symmetrized away) at construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Slack used when testing Weyl's inequality in floating point.
pub const WEYL_SLACK: f64 = 1e-9;

/// A dense N×N complex self-adjoint matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    data: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Validates `data` and replaces it by `(A + A*) / 2`.
    ///
    /// Asymmetry up to `1e-12 · max|a_ij|` is rounding noise and is removed;
    /// anything larger is rejected.
    pub fn new(data: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = data.shape();
        if rows != cols {
            return Err(SpectraError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(SpectraError::EmptyMatrix);
        }
        let mut scale = 0.0f64;
        for j in 0..cols {
            for i in 0..rows {
                let z = data[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(SpectraError::NonFinite { row: i, col: j });
                }
                scale = scale.max(z.norm());
            }
        }
        let mut asymmetry = 0.0f64;
        for j in 0..cols {
            for i in 0..=j {
                asymmetry = asymmetry.max((data[(i, j)] - data[(j, i)].conj()).norm());
            }
        }
        let limit = SYMMETRY_TOL * scale;
        if asymmetry > limit {
            return Err(SpectraError::NotHermitian { asymmetry, limit });
        }
        let mut sym = data;
        for j in 0..cols {
            sym[(j, j)] = Complex64::new(sym[(j, j)].re, 0.0);
            for i in 0..j {
                let avg = (sym[(i, j)] + sym[(j, i)].conj()) * 0.5;
                sym[(i, j)] = avg;
                sym[(j, i)] = avg.conj();
            }
        }
        Ok(Self { data: sym })
    }

    pub fn from_real(data: DMatrix<f64>) -> Result<Self> {
        Self::new(data.map(|x| Complex64::new(x, 0.0)))
    }

    /// Row-major real entries.
    pub fn from_real_rows(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(SpectraError::DimensionMismatch { expected: n * n, found: entries.len() });
        }
        Self::from_real(DMatrix::from_row_slice(n, n, entries))
    }

    /// Row-major real and imaginary parts.
    pub fn from_complex_rows(n: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        for part in [re, im] {
            if part.len() != n * n {
                return Err(SpectraError::DimensionMismatch { expected: n * n, found: part.len() });
            }
        }
        let entries: Vec<Complex64> = re.iter().zip(im).map(|(&x, &y)| Complex64::new(x, y)).collect();
        Self::new(DMatrix::from_row_slice(n, n, &entries))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self::new(m)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n))
    }

    /// Seeded random Hermitian matrix with entries uniform in `[-1, 1)`.
    ///
    /// Fill order is row-major over the upper triangle: the diagonal entry
    /// draws one real, each strictly upper entry draws real then imaginary.
    pub fn random(rng: &mut SplitMix64, n: usize) -> Result<Self> {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                if i == j {
                    m[(i, i)] = Complex64::new(rng.uniform(-1.0, 1.0), 0.0);
                } else {
                    let z = Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
                    m[(i, j)] = z;
                    m[(j, i)] = z.conj();
                }
            }
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[(i, j)]
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(SpectraError::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { data: &self.data - &other.data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        Ok(Self { data: &self.data + &other.data })
    }

    /// Multiplication by a real scalar keeps the matrix Hermitian.
    pub fn scale(&self, c: f64) -> Self {
        Self { data: self.data.map(|z| z * c) }
    }

    pub fn shift(&self, sigma: f64) -> Self {
        let mut data = self.data.clone();
        for i in 0..data.nrows() {
            data[(i, i)].re += sigma;
        }
        Self { data }
    }

    /// `W · A · W*` for a square `W` of matching size.
    pub fn conjugate_by(&self, w: &DMatrix<Complex64>) -> Result<Self> {
        if w.nrows() != self.dim() || w.ncols() != self.dim() {
            return Err(SpectraError::DimensionMismatch { expected: self.dim(), found: w.nrows() });
        }
        Self::new(w * &self.data * w.adjoint())
    }

    /// Largest entry magnitude; the scale used for symmetrization.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn eig(&self) -> EigenDecomposition {
        eig_ordered(self)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_ordered(self).values
    }

    pub fn op_norm(&self) -> f64 {
        op_norm(self)
    }
}

/// Ascending eigenvalues with matching orthonormal eigenvectors (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    /// `‖A − Q·diag(values)·Q*‖` measured in the operator norm.
    pub fn reconstruction_error(&self, a: &HermitianMatrix) -> f64 {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= v;
            }
        }
        let diff = a.as_matrix() - scaled * self.vectors.adjoint();
        spectral_norm(&diff)
    }

    /// `‖Q*Q − I‖` in the operator norm.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.values.len();
        let gram = self.vectors.adjoint() * &self.vectors - DMatrix::<Complex64>::identity(n, n);
        spectral_norm(&gram)
    }
}

/// Eigendecomposition with eigenvalues sorted ascending.
///
/// Panics only if the Jacobi iteration exhausts its sweep cap, which does not
/// happen for finite Hermitian input; see [`try_eig_ordered`].
pub fn eig_ordered(a: &HermitianMatrix) -> EigenDecomposition {
    try_eig_ordered(a).expect("cyclic Jacobi failed to converge on a Hermitian matrix")
}

pub fn try_eig_ordered(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    let (values, vectors) = jacobi::diagonalize(a.as_matrix())?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let n = values.len();
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = DMatrix::from_fn(n, n, |r, c| vectors[(r, order[c])]);
    Ok(EigenDecomposition { values: sorted_values, vectors: sorted_vectors })
}

/// Operator (spectral) norm: `max_i |μ_i(A)|`.
pub fn op_norm(a: &HermitianMatrix) -> f64 {
    let values = eig_ordered(a).values;
    values.first().unwrap().abs().max(values.last().unwrap().abs())
}

/// Eigendecomposition of the Hermitian Gram matrix `M·M*`: its eigenvalues are
/// the squared singular values of `M` and its eigenvectors the left singular
/// vectors.
pub(crate) fn left_gram_eig(m: &DMatrix<Complex64>) -> Result<EigenDecomposition> {
    let gram = HermitianMatrix { data: symmetrize(m * m.adjoint()) };
    try_eig_ordered(&gram)
}

/// Spectral norm of an arbitrary square complex matrix via the Hermitian Gram
/// matrix `M*M`.
pub(crate) fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    let gram = m.adjoint() * m;
    let gram = HermitianMatrix { data: symmetrize(gram) };
    let top = eig_ordered(&gram).values.last().copied().unwrap_or(0.0);
    top.max(0.0).sqrt()
}

fn symmetrize(m: DMatrix<Complex64>) -> DMatrix<Complex64> {
    let adj = m.adjoint();
    (m + adj) * Complex64::new(0.5, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylReport {
    /// `max_j |μ_j(A) − μ_j(B)|` over ordered eigenvalues.
    pub gap: f64,
    /// `‖A − B‖`.
    pub bound: f64,
    pub holds: bool,
}

pub fn weyl_check(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<WeylReport> {
    let diff = a.sub(b)?;
    let mu_a = eig_ordered(a).values;
    let mu_b = eig_ordered(b).values;
    let gap = mu_a.iter().zip(&mu_b).fold(0.0f64, |g, (x, y)| g.max((x - y).abs()));
    let bound = op_norm(&diff);
    Ok(WeylReport { gap, bound, holds: gap <= bound + WEYL_SLACK * (1.0 + bound) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_sorted() {
        let a = HermitianMatrix::from_diagonal(&[3.0, 1.0, 2.0]).unwrap();
        let e = a.eig();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        assert!(e.reconstruction_error(&a) < 1e-14);
    }

    #[test]
    fn pauli_x() {
        let a = HermitianMatrix::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let v = a.eigenvalues();
        assert_abs_diff_eq!(v[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.op_norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn complex_2x2_closed_form() {
        // [[1, 2i], [-2i, 1]] has eigenvalues 1 ± 2.
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(1.0, 0.0)]);
        let a = HermitianMatrix::new(m).unwrap();
        let e = a.eig();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 3.0, epsilon = 1e-14);
        assert!(e.reconstruction_error(&a) < 1e-14);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = SplitMix64::new(5);
        let a = HermitianMatrix::random(&mut rng, 5).unwrap();
        let e = a.eig();
        let scale = 1.0 + a.op_norm();
        assert!(e.reconstruction_error(&a) <= 1e-10 * scale);
        assert!(e.orthonormality_error() <= 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn op_norm_examples() {
        let a = HermitianMatrix::from_diagonal(&[-3.0, 2.0]).unwrap();
        assert_eq!(a.op_norm(), 3.0);
    }

    #[test]
    fn op_norm_matches_gram_oracle() {
        // Independent route: nalgebra's Hermitian eigensolver on A*A.
        let mut rng = SplitMix64::new(11);
        for n in 1..=7 {
            let a = HermitianMatrix::random(&mut rng, n).unwrap();
            let gram = a.as_matrix().adjoint() * a.as_matrix();
            let top = gram.symmetric_eigenvalues().iter().cloned().fold(f64::MIN, f64::max);
            assert_abs_diff_eq!(a.op_norm(), top.sqrt(), epsilon = 1e-10);
        }
    }

    #[test]
    fn eigenvalues_match_nalgebra() {
        let mut rng = SplitMix64::new(99);
        for n in [1, 2, 3, 8, 16, 40] {
            let a = HermitianMatrix::random(&mut rng, n).unwrap();
            let mut oracle: Vec<f64> = a.as_matrix().clone().symmetric_eigenvalues().iter().cloned().collect();
            oracle.sort_by(f64::total_cmp);
            let ours = a.eigenvalues();
            for (x, y) in ours.iter().zip(&oracle) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn degenerate_cluster() {
        let a = HermitianMatrix::from_diagonal(&[2.0, 2.0, 2.0]).unwrap();
        let e = a.eig();
        assert_eq!(e.values, vec![2.0; 3]);
        assert!(e.orthonormality_error() < 1e-15);

        // Rotated degenerate block.
        let mut rng = SplitMix64::new(3);
        let b = HermitianMatrix::random(&mut rng, 4).unwrap();
        let w = b.eig().vectors;
        let d = HermitianMatrix::from_diagonal(&[1.0, 1.0, -1.0, 4.0]).unwrap();
        let a = d.conjugate_by(&w).unwrap();
        let e = a.eig();
        for (x, y) in e.values.iter().zip([-1.0, 1.0, 1.0, 4.0]) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-12);
        }
        assert!(e.reconstruction_error(&a) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
        assert!(matches!(HermitianMatrix::new(m), Err(SpectraError::NotHermitian { .. })));
        let m = DMatrix::from_row_slice(1, 2, &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(HermitianMatrix::new(m), Err(SpectraError::NotSquare { .. })));
        assert!(matches!(HermitianMatrix::zeros(0), Err(SpectraError::EmptyMatrix)));
        let m = DMatrix::from_element(1, 1, c(f64::NAN, 0.0));
        assert!(matches!(HermitianMatrix::new(m), Err(SpectraError::NonFinite { .. })));
    }

    #[test]
    fn symmetrizes_rounding_noise() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 1e-15), c(1.0, 0.0), c(1.0 + 1e-13, 0.0), c(2.0, 0.0)],
        );
        let a = HermitianMatrix::new(m).unwrap();
        assert_eq!(a.get(0, 0).im, 0.0);
        assert_eq!(a.get(0, 1), a.get(1, 0).conj());
    }

    #[test]
    fn weyl_examples() {
        let a = HermitianMatrix::from_diagonal(&[0.0, 1.0]).unwrap();
        let b = HermitianMatrix::from_diagonal(&[0.1, 1.0]).unwrap();
        let r = weyl_check(&a, &b).unwrap();
        assert_abs_diff_eq!(r.gap, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(r.bound, 0.1, epsilon = 1e-15);
        assert!(r.holds);

        // Ordered comparison: (-0.2, 0.2) vs (-0.3, 0.3).
        let a = HermitianMatrix::from_diagonal(&[0.2, -0.2]).unwrap();
        let b = HermitianMatrix::from_diagonal(&[0.3, -0.3]).unwrap();
        let r = weyl_check(&a, &b).unwrap();
        assert_abs_diff_eq!(r.gap, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(r.bound, 0.1, epsilon = 1e-15);
        assert!(r.holds);

        let c3 = HermitianMatrix::zeros(3).unwrap();
        assert!(matches!(weyl_check(&a, &c3), Err(SpectraError::DimensionMismatch { .. })));
    }

    #[test]
    fn deterministic_bits() {
        let mut rng = SplitMix64::new(42);
        let a = HermitianMatrix::random(&mut rng, 6).unwrap();
        let e1 = a.eig();
        let e2 = a.clone().eig();
        assert_eq!(e1, e2);
    }
}
