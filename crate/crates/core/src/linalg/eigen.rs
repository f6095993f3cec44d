use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{ComplexMatrix, MatrixError};

/// Real spectrum of a Hermitian matrix, eigenvalues sorted descending.
///
/// When present, `eigenvectors` holds one normalized eigenvector per column,
/// in the same order as `eigenvalues`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<ComplexMatrix>,
}

impl HermitianSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    /// `sum_i lambda_i v_i v_i^dagger`, if eigenvectors were requested.
    pub fn reconstruct(&self) -> Option<ComplexMatrix> {
        let vecs = self.eigenvectors.as_ref()?;
        let n = self.dim();
        Some(ComplexMatrix::from_fn(n, n, |i, j| {
            self.eigenvalues
                .iter()
                .enumerate()
                .map(|(k, &l)| vecs[(i, k)] * vecs[(j, k)].conj() * l)
                .sum()
        }))
    }
}

fn to_nalgebra(a: &ComplexMatrix) -> DMatrix<Complex64> {
    // Solve on the exact Hermitian part; the residual has already been checked.
    let n = a.rows();
    DMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5)
}

fn iteration_cap(n: usize) -> usize {
    1000 * n.max(1)
}

/// Full Hermitian eigendecomposition.
///
/// Fails with `NotSquare` or `NotHermitian` when `a` deviates from its
/// adjoint by more than `herm_tol` in any entry.
pub fn hermitian_eigen(
    a: &ComplexMatrix,
    herm_tol: f64,
    with_vectors: bool,
) -> Result<HermitianSpectrum, MatrixError> {
    let n = a.ensure_hermitian(herm_tol)?;
    if n == 0 {
        return Ok(HermitianSpectrum {
            eigenvalues: Vec::new(),
            eigenvectors: with_vectors.then(|| ComplexMatrix::zeros(0, 0)),
        });
    }
    let m = to_nalgebra(a);
    if !with_vectors {
        let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(|x, y| y.total_cmp(x));
        return Ok(HermitianSpectrum {
            eigenvalues: values,
            eigenvectors: None,
        });
    }

    let eig = SymmetricEigen::try_new(m, f64::EPSILON, iteration_cap(n))
        .ok_or(MatrixError::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianSpectrum {
        eigenvalues,
        eigenvectors: Some(vectors),
    })
}

/// Eigenvalues only, descending.
pub fn eigenvalues(a: &ComplexMatrix, herm_tol: f64) -> Result<Vec<f64>, MatrixError> {
    hermitian_eigen(a, herm_tol, false).map(|s| s.eigenvalues)
}

pub fn min_eigenvalue(a: &ComplexMatrix, herm_tol: f64) -> Result<f64, MatrixError> {
    hermitian_eigen(a, herm_tol, false).map(|s| s.min())
}

#[cfg(test)]
mod tests {
    use super::super::testutil::random_hermitian;
    use super::super::{partial_transpose, DEFAULT_HERM_TOL};
    use super::*;

    #[test]
    fn diagonal_spectrum_sorted() {
        let m = ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0]);
        let s = hermitian_eigen(&m, DEFAULT_HERM_TOL, false).unwrap();
        assert_eq!(s.eigenvalues, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn pauli_x() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let s = eigenvalues(&m, DEFAULT_HERM_TOL).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && (s[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_and_negative_diag_minimum() {
        assert_eq!(
            min_eigenvalue(&ComplexMatrix::identity(5), DEFAULT_HERM_TOL).unwrap(),
            1.0
        );
        let m = ComplexMatrix::from_real_diag(&[1.0, -2.0]);
        assert_eq!(min_eigenvalue(&m, DEFAULT_HERM_TOL).unwrap(), -2.0);
    }

    #[test]
    fn rejects_non_square_and_non_hermitian() {
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(
            hermitian_eigen(&m, 1e-10, false),
            Err(MatrixError::NotSquare { rows: 2, cols: 3 })
        ));
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        match hermitian_eigen(&m, 1e-10, false) {
            Err(MatrixError::NotHermitian { residual }) => assert_eq!(residual, 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trace_identity_on_random_hermitian() {
        for seed in 0..10 {
            let h = random_hermitian(12, seed);
            let sum: f64 = eigenvalues(&h, DEFAULT_HERM_TOL).unwrap().iter().sum();
            assert!((sum - h.trace().re).abs() < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn eigenvectors_orthonormal_and_reconstruct() {
        for (n, seed) in [(3, 1), (9, 2), (27, 3), (81, 4)] {
            let h = random_hermitian(n, seed);
            let s = hermitian_eigen(&h, DEFAULT_HERM_TOL, true).unwrap();
            assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            let v = s.eigenvectors.as_ref().unwrap();
            let gram = &v.dagger() * v;
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
            assert!(s.reconstruct().unwrap().max_abs_diff(&h) < 1e-9);
        }
    }

    #[test]
    fn transposed_bell_projector_has_minus_one_third() {
        let d = 3;
        let mut psi = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            psi[i * d + i] = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        let pt = partial_transpose(&ComplexMatrix::outer(&psi, &psi), d, d).unwrap();
        let ev = eigenvalues(&pt, DEFAULT_HERM_TOL).unwrap();
        let plus = ev
            .iter()
            .filter(|&&x| (x - 1.0 / 3.0).abs() < 1e-12)
            .count();
        let minus = ev
            .iter()
            .filter(|&&x| (x + 1.0 / 3.0).abs() < 1e-12)
            .count();
        assert_eq!((plus, minus), (6, 3));
        assert!((min_eigenvalue(&pt, DEFAULT_HERM_TOL).unwrap() + 1.0 / 3.0).abs() < 1e-12);
    }
}
