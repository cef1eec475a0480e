//! Dense Hermitian eigendecompositions (LAPACK-backed) and derived
//! matrix functions such as `exp(z H)`.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use super::C64;
use crate::{PamError, Result};

/// Eigendecomposition of a Hermitian matrix with eigenvalues ascending.
pub fn eigh_ascending(a: &Array2<C64>) -> Result<(Vec<f64>, Array2<C64>)> {
    let (vals, vecs) = a
        .eigh(UPLO::Lower)
        .map_err(|e| PamError::Linalg(format!("zheev failed: {e}")))?;
    // With a row-major input the backend effectively diagonalizes the
    // conjugate matrix; conjugating the returned columns restores
    // `A v_k = lambda_k v_k`.
    Ok((vals.to_vec(), vecs.mapv(|z| z.conj())))
}

/// Real symmetric eigendecomposition with eigenvalues ascending.
pub fn eigh_real_ascending(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>)> {
    let (vals, vecs) = a
        .eigh(UPLO::Lower)
        .map_err(|e| PamError::Linalg(format!("dsyev failed: {e}")))?;
    Ok((vals.to_vec(), vecs))
}

/// Largest entry modulus of a dense complex matrix.
pub fn max_abs_dense(a: &Array2<C64>) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Cached Hermitian eigendecomposition `H = V diag(vals) V^dagger`.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub vals: Vec<f64>,
    pub vecs: Array2<C64>,
}

impl HermitianEig {
    /// Decompose `a`, verifying Hermiticity up to `herm_tol` in max norm.
    pub fn new(a: &Array2<C64>, herm_tol: f64) -> Result<Self> {
        let n = a.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
            }
        }
        if worst > herm_tol {
            return Err(PamError::Hermiticity(format!(
                "matrix fails Hermiticity check: residual {worst:.3e} > {herm_tol:.3e}"
            )));
        }
        let (vals, vecs) = eigh_ascending(a)?;
        Ok(Self { vals, vecs })
    }

    pub fn dim(&self) -> usize {
        self.vals.len()
    }

    /// `exp(z H)` as a dense matrix.
    pub fn expm(&self, z: C64) -> Array2<C64> {
        let n = self.dim();
        // Scale columns of V by exp(z * lambda), then multiply by V^dagger.
        let mut scaled = self.vecs.clone();
        for (j, &l) in self.vals.iter().enumerate() {
            let f = (z * l).exp();
            for i in 0..n {
                scaled[(i, j)] *= f;
            }
        }
        let vh = self.vecs.t().mapv(|v| v.conj());
        scaled.dot(&vh)
    }

    /// `exp(z H) v` without forming the full exponential.
    pub fn apply_expm(&self, z: C64, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let vv = Array1::from(v.to_vec());
        let vh = self.vecs.t().mapv(|x| x.conj());
        let mut coeffs = vh.dot(&vv);
        for (c, &l) in coeffs.iter_mut().zip(&self.vals) {
            *c *= (z * l).exp();
        }
        self.vecs.dot(&coeffs).to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_is_ascending_and_accurate() {
        let n = 5;
        let mut a = Array2::<C64>::zeros((n, n));
        for i in 0..n {
            a[(i, i)] = C64::new((n - i) as f64, 0.0);
            if i + 1 < n {
                a[(i, i + 1)] = C64::new(0.3, 0.7);
                a[(i + 1, i)] = C64::new(0.3, -0.7);
            }
        }
        let (vals, vecs) = eigh_ascending(&a).unwrap();
        for w in vals.windows(2) {
            assert!(w[0] <= w[1]);
        }
        // Residual of the first eigenpair.
        let v0: Vec<C64> = (0..n).map(|i| vecs[(i, 0)]).collect();
        let mut r = 0.0f64;
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += a[(i, j)] * v0[j];
            }
            r = r.max((acc - v0[i] * vals[0]).norm());
        }
        assert!(r < 1e-12);
    }

    #[test]
    fn expm_of_diagonal() {
        let mut a = Array2::<C64>::zeros((2, 2));
        a[(0, 0)] = C64::new(1.0, 0.0);
        a[(1, 1)] = C64::new(-2.0, 0.0);
        let eig = HermitianEig::new(&a, 1e-12).unwrap();
        let e = eig.expm(C64::new(-0.5, 0.0));
        assert!((e[(0, 0)].re - (-0.5f64).exp()).abs() < 1e-14);
        assert!((e[(1, 1)].re - 1.0f64.exp()).abs() < 1e-14);
        assert!(e[(0, 1)].norm() < 1e-15);
        let v = eig.apply_expm(C64::new(-0.5, 0.0), &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!((v[0].re - (-0.5f64).exp()).abs() < 1e-14);
        assert!((v[1].re - 1.0f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn hermiticity_check_rejects() {
        let mut a = Array2::<C64>::zeros((2, 2));
        a[(0, 1)] = C64::new(1.0, 0.0);
        assert!(HermitianEig::new(&a, 1e-12).is_err());
    }
}

