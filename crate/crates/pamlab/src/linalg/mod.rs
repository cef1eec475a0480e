//! Shared linear algebra: complex CSR matrices, dense Hermitian
//! eigendecompositions, and Lanczos-based iterative solvers.

mod csr;
mod dense;
mod lanczos;

pub use csr::CsrMatrix;
pub use dense::{eigh_ascending, eigh_real_ascending, max_abs_dense, HermitianEig};
pub use lanczos::{expm_action_krylov, lanczos_lowest, LanczosOutcome};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// `sum_i conj(a_i) b_i` (physicist convention: conjugate-linear in the
/// first argument).
pub fn zdot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a complex vector.
pub fn znorm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha * x`.
pub fn zaxpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Normalize a vector in place; returns the original norm.
pub fn normalize(a: &mut [C64]) -> f64 {
    let n = znorm(a);
    if n > 0.0 {
        let inv = 1.0 / n;
        for x in a.iter_mut() {
            *x *= inv;
        }
    }
    n
}
