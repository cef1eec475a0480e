//! Lanczos iteration with full reorthogonalization: extremal eigenpairs of
//! sparse Hermitian matrices and Krylov approximation of `exp(tH) v`.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{eigh_real_ascending, normalize, zaxpy, zdot, znorm, C64, CsrMatrix};
use crate::{PamError, Result};

/// Result of [`lanczos_lowest`].
#[derive(Clone, Debug)]
pub struct LanczosOutcome {
    /// The `k` lowest Ritz values, ascending.
    pub eigenvalues: Vec<f64>,
    /// Ritz vector for the lowest eigenvalue, unit norm.
    pub ground: Vec<C64>,
    /// Number of Lanczos steps performed.
    pub iterations: usize,
    /// Exact residual `||H x - lambda x||` of the returned ground pair.
    pub residual: f64,
    /// Whether the Ritz values stabilized below the requested tolerance.
    pub converged: bool,
}

fn random_unit_vector(dim: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    normalize(&mut v);
    v
}

/// Orthogonalize `w` against every column in `basis` (two passes of
/// classical Gram-Schmidt, which is adequate at these dimensions).
fn reorthogonalize(w: &mut [C64], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for b in basis {
            let p = zdot(b, w);
            zaxpy(-p, b, w);
        }
    }
}

struct Tridiagonal {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl Tridiagonal {
    fn eig(&self) -> Result<(Vec<f64>, Array2<f64>)> {
        let m = self.alpha.len();
        let mut t = Array2::<f64>::zeros((m, m));
        for i in 0..m {
            t[(i, i)] = self.alpha[i];
            if i + 1 < m {
                t[(i, i + 1)] = self.beta[i];
                t[(i + 1, i)] = self.beta[i];
            }
        }
        eigh_real_ascending(&t)
    }
}

/// Compute the `k` lowest eigenvalues (and the ground vector) of a sparse
/// Hermitian matrix by a seeded Lanczos iteration with full
/// reorthogonalization.
pub fn lanczos_lowest(
    h: &CsrMatrix,
    k: usize,
    max_iter: usize,
    tol: f64,
    seed: u64,
) -> Result<LanczosOutcome> {
    let dim = h.nrows();
    if h.ncols() != dim {
        return Err(PamError::Linalg("lanczos requires a square matrix".into()));
    }
    if dim == 0 || k == 0 {
        return Err(PamError::Linalg("lanczos on empty problem".into()));
    }
    let k = k.min(dim);
    let max_iter = max_iter.min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut basis: Vec<Vec<C64>> = vec![random_unit_vector(dim, &mut rng)];
    let mut tri = Tridiagonal {
        alpha: Vec::new(),
        beta: Vec::new(),
    };
    let mut prev_ritz: Option<Vec<f64>> = None;
    let mut converged = false;

    let mut j = 0;
    while j < max_iter {
        let vj = basis[j].clone();
        let mut w = h.matvec(&vj);
        let a = zdot(&vj, &w).re;
        tri.alpha.push(a);
        zaxpy(C64::new(-a, 0.0), &vj, &mut w);
        if j > 0 {
            let b = tri.beta[j - 1];
            let prev = basis[j - 1].clone();
            zaxpy(C64::new(-b, 0.0), &prev, &mut w);
        }
        reorthogonalize(&mut w, &basis);
        let b = znorm(&w);
        j += 1;

        // Convergence check on the k lowest Ritz values.
        let check_now = j >= k && (j % 5 == 0 || j == max_iter || b < 1e-13);
        if check_now {
            let (ritz, _) = tri.eig()?;
            let head: Vec<f64> = ritz.iter().take(k).copied().collect();
            if let Some(prev) = &prev_ritz {
                let scale = 1.0f64.max(head[0].abs());
                let drift = head
                    .iter()
                    .zip(prev)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                if drift < tol * scale {
                    converged = true;
                }
            }
            prev_ritz = Some(head);
            if converged {
                break;
            }
        }

        if j == max_iter {
            break;
        }
        if b < 1e-13 {
            // Invariant subspace exhausted: restart with a fresh direction
            // or stop if the whole space is spanned.
            if basis.len() >= dim {
                break;
            }
            let mut fresh = random_unit_vector(dim, &mut rng);
            reorthogonalize(&mut fresh, &basis);
            if normalize(&mut fresh) < 1e-13 {
                break;
            }
            tri.beta.push(0.0);
            basis.push(fresh);
        } else {
            let mut v = w;
            for x in v.iter_mut() {
                *x /= b;
            }
            tri.beta.push(b);
            basis.push(v);
        }
    }

    let (ritz, s) = tri.eig()?;
    let m = tri.alpha.len();
    if m == dim {
        // The Krylov basis spans the whole space, so the tridiagonal
        // eigenproblem is the full problem and the result is exact
        // regardless of how the drift check ended.
        converged = true;
    }
    let mut ground = vec![C64::new(0.0, 0.0); dim];
    for (i, b) in basis.iter().take(m).enumerate() {
        zaxpy(C64::new(s[(i, 0)], 0.0), b, &mut ground);
    }
    normalize(&mut ground);
    let hx = h.matvec(&ground);
    let lambda = ritz[0];
    let residual = hx
        .iter()
        .zip(&ground)
        .map(|(y, x)| (y - x * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt();

    Ok(LanczosOutcome {
        eigenvalues: ritz.into_iter().take(k).collect(),
        ground,
        iterations: m,
        residual,
        converged,
    })
}

/// Krylov approximation of `exp(t H) v` for Hermitian `H` using an
/// `m`-step Lanczos basis seeded by `v` itself.
pub fn expm_action_krylov(h: &CsrMatrix, v: &[C64], t: f64, m: usize) -> Result<Vec<C64>> {
    let dim = h.nrows();
    assert_eq!(v.len(), dim);
    let vnorm = znorm(v);
    if vnorm == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); dim]);
    }
    let mut v0 = v.to_vec();
    normalize(&mut v0);
    let mut basis = vec![v0];
    let mut tri = Tridiagonal {
        alpha: Vec::new(),
        beta: Vec::new(),
    };
    let steps = m.min(dim);
    for j in 0..steps {
        let vj = basis[j].clone();
        let mut w = h.matvec(&vj);
        let a = zdot(&vj, &w).re;
        tri.alpha.push(a);
        zaxpy(C64::new(-a, 0.0), &vj, &mut w);
        if j > 0 {
            let b = tri.beta[j - 1];
            let prev = basis[j - 1].clone();
            zaxpy(C64::new(-b, 0.0), &prev, &mut w);
        }
        reorthogonalize(&mut w, &basis);
        let b = znorm(&w);
        if j + 1 == steps || b < 1e-13 {
            break;
        }
        let mut next = w;
        for x in next.iter_mut() {
            *x /= b;
        }
        tri.beta.push(b);
        basis.push(next);
    }
    let (vals, u) = tri.eig()?;
    let mdim = tri.alpha.len();
    // coeffs = U exp(t Lambda) U^T e1, scaled by ||v||.
    let mut coeffs = vec![0.0f64; mdim];
    for (l, &lam) in vals.iter().enumerate() {
        let f = (t * lam).exp();
        for i in 0..mdim {
            coeffs[i] += u[(i, l)] * f * u[(0, l)];
        }
    }
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (i, b) in basis.iter().take(mdim).enumerate() {
        zaxpy(C64::new(coeffs[i] * vnorm, 0.0), b, &mut out);
    }
    Ok(out)
}
