//! Truncated phonon modes, quadratures, the position frame and the phase
//! operators `exp(+- i Phi_x)` entering the deformed Hamiltonian.
//!
//! Each site carries one harmonic mode truncated at occupation `n_max`
//! (local dimension `n_max + 1`). The full phonon index is a base-
//! `(n_max + 1)` word with site 0 as the most significant digit. The
//! quadratures are `q = (b* + b)/sqrt(2)` and `p = i(b* - b)/sqrt(2)`; on
//! the truncated space they satisfy
//! `[q, p] = i (1 - (n_max + 1) |n_max><n_max|)` per mode, exactly.

use ndarray::Array2;

use crate::linalg::{eigh_real_ascending, C64, CsrMatrix};
use crate::{PamError, Result};

/// Default occupation cutoff.
pub const DEFAULT_N_MAX: usize = 6;

/// Truncated multi-mode phonon space with cached single-mode operators.
#[derive(Clone, Debug)]
pub struct PhononSpace {
    n_sites: usize,
    n_max: usize,
}

impl PhononSpace {
    pub fn new(n_sites: usize, n_max: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(PamError::InvalidParams("zero phonon modes".into()));
        }
        if n_max == 0 {
            return Err(PamError::InvalidParams(
                "phonon cutoff n_max must be at least 1".into(),
            ));
        }
        Ok(Self { n_sites, n_max })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Local dimension `n_max + 1` of one mode.
    pub fn mode_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Total dimension `(n_max + 1)^{n_sites}`.
    pub fn dim(&self) -> usize {
        self.mode_dim().pow(self.n_sites as u32)
    }

    /// Single-mode annihilation operator `b` (`b[k-1][k] = sqrt(k)`).
    pub fn b_single(&self) -> Array2<C64> {
        let d = self.mode_dim();
        let mut m = Array2::zeros((d, d));
        for k in 1..d {
            m[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
        }
        m
    }

    /// Single-mode position quadrature `q = (b* + b)/sqrt(2)`.
    pub fn q_single(&self) -> Array2<C64> {
        let b = self.b_single();
        let d = self.mode_dim();
        Array2::from_shape_fn((d, d), |(i, j)| {
            (b[(i, j)] + b[(j, i)].conj()) / 2.0_f64.sqrt()
        })
    }

    /// Single-mode momentum quadrature `p = i (b* - b)/sqrt(2)`.
    pub fn p_single(&self) -> Array2<C64> {
        let b = self.b_single();
        let d = self.mode_dim();
        Array2::from_shape_fn((d, d), |(i, j)| {
            C64::new(0.0, 1.0) * (b[(j, i)].conj() - b[(i, j)]) / 2.0_f64.sqrt()
        })
    }

    /// Occupation digits of a full phonon index (site 0 most significant).
    pub fn occupations(&self, mut idx: usize) -> Vec<usize> {
        let d = self.mode_dim();
        let mut occ = vec![0usize; self.n_sites];
        for x in (0..self.n_sites).rev() {
            occ[x] = idx % d;
            idx /= d;
        }
        occ
    }

    /// Total occupation of a full phonon index.
    pub fn total_occupation(&self, idx: usize) -> usize {
        self.occupations(idx).iter().sum()
    }

    /// Embed a single-mode operator at site `x`.
    pub fn op_at_site(&self, single: &Array2<C64>, x: usize) -> CsrMatrix {
        debug_assert!(x < self.n_sites);
        let d = self.mode_dim();
        let left = CsrMatrix::identity(d.pow(x as u32));
        let right = CsrMatrix::identity(d.pow((self.n_sites - 1 - x) as u32));
        left.kron(&CsrMatrix::from_dense(single, 0.0)).kron(&right)
    }

    pub fn b(&self, x: usize) -> CsrMatrix {
        self.op_at_site(&self.b_single(), x)
    }

    pub fn b_dag(&self, x: usize) -> CsrMatrix {
        self.b(x).adjoint()
    }

    pub fn q(&self, x: usize) -> CsrMatrix {
        self.op_at_site(&self.q_single(), x)
    }

    pub fn p(&self, x: usize) -> CsrMatrix {
        self.op_at_site(&self.p_single(), x)
    }

    /// Total phonon number `N_p = sum_x b*_x b_x` (diagonal).
    pub fn number_op(&self) -> CsrMatrix {
        let diag: Vec<C64> = (0..self.dim())
            .map(|i| C64::new(self.total_occupation(i) as f64, 0.0))
            .collect();
        CsrMatrix::from_diagonal(&diag)
    }

    /// Identity on the full phonon space.
    pub fn identity(&self) -> CsrMatrix {
        CsrMatrix::identity(self.dim())
    }

    /// The vacuum vector `|0...0>`.
    pub fn vacuum(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.dim()];
        v[0] = C64::new(1.0, 0.0);
        v
    }

    /// Phase operator `exp(sign * i * (sqrt(2) g / omega0) q_x)`, the exact
    /// exponential of the truncated quadrature; unitarity is verified.
    pub fn phase_operator(&self, x: usize, sign: f64, g: f64, omega0: f64) -> Result<CsrMatrix> {
        if omega0 <= 0.0 {
            return Err(PamError::InvalidParams("omega0 must be positive".into()));
        }
        let theta = sign * 2.0_f64.sqrt() * g / omega0;
        let frame = PositionFrame::new(self)?;
        let d = self.mode_dim();
        // U diag(exp(i theta lambda)) U^T on one mode.
        let mut single = Array2::<C64>::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    let phase = C64::new(0.0, theta * frame.nodes()[k]).exp();
                    acc += C64::new(frame.u1()[(i, k)] * frame.u1()[(j, k)], 0.0) * phase;
                }
                single[(i, j)] = acc;
            }
        }
        // Unitarity check on the single-mode factor.
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += single[(k, i)].conj() * single[(k, j)];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - expect).norm());
            }
        }
        if worst > 1e-12 {
            return Err(PamError::Unitarity(format!(
                "phase operator unitarity residual {worst:.3e}"
            )));
        }
        Ok(self.op_at_site(&single, x))
    }
}

/// Eigenbasis of the truncated position quadrature, one mode at a time.
///
/// Nodes are ascending and symmetric about zero; eigenvector columns are
/// normalized with a positive vacuum component, so the number-state vacuum
/// has strictly positive coordinates in this frame.
#[derive(Clone, Debug)]
pub struct PositionFrame {
    n_sites: usize,
    n_max: usize,
    nodes: Vec<f64>,
    u1: Array2<f64>,
}

impl PositionFrame {
    pub fn new(space: &PhononSpace) -> Result<Self> {
        let d = space.mode_dim();
        let q = space.q_single();
        let qr = Array2::from_shape_fn((d, d), |(i, j)| q[(i, j)].re);
        let (nodes, mut u1) = eigh_real_ascending(&qr)?;
        for k in 0..d {
            if u1[(0, k)] < 0.0 {
                for i in 0..d {
                    u1[(i, k)] = -u1[(i, k)];
                }
            }
            if u1[(0, k)] == 0.0 {
                return Err(PamError::Linalg(
                    "position frame column with vanishing vacuum component".into(),
                ));
            }
        }
        Ok(Self {
            n_sites: space.n_sites(),
            n_max: space.n_max(),
            nodes,
            u1,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn mode_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn dim(&self) -> usize {
        self.mode_dim().pow(self.n_sites as u32)
    }

    /// Single-mode nodes, ascending.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Single-mode eigenvector matrix (columns are frame vectors).
    pub fn u1(&self) -> &Array2<f64> {
        &self.u1
    }

    /// Node vector `(q-value at each site)` of a full frame index.
    pub fn node_vector(&self, mut idx: usize) -> Vec<f64> {
        let d = self.mode_dim();
        let mut out = vec![0.0; self.n_sites];
        for x in (0..self.n_sites).rev() {
            out[x] = self.nodes[idx % d];
            idx /= d;
        }
        out
    }

    /// Full-frame transform `U = u1 (x) ... (x) u1` as a dense real matrix.
    pub fn u_full(&self) -> Array2<f64> {
        let mut u = Array2::from_elem((1, 1), 1.0);
        for _ in 0..self.n_sites {
            let (r, c) = u.dim();
            let d = self.mode_dim();
            let mut next = Array2::zeros((r * d, c * d));
            for i in 0..r {
                for j in 0..c {
                    for a in 0..d {
                        for b in 0..d {
                            next[(i * d + a, j * d + b)] = u[(i, j)] * self.u1[(a, b)];
                        }
                    }
                }
            }
            u = next;
        }
        u
    }

    /// Transform phonon columns of a `(rows x dim)` coefficient matrix from
    /// the number basis to the frame basis: `C -> C U`.
    pub fn to_frame_columns(&self, c: &Array2<C64>) -> Array2<C64> {
        let u = self.u_full();
        let (r, d) = c.dim();
        assert_eq!(d, self.dim());
        Array2::from_shape_fn((r, d), |(i, k)| {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                acc += c[(i, j)] * u[(j, k)];
            }
            acc
        })
    }

    /// Inverse of [`PositionFrame::to_frame_columns`] (`U` is orthogonal).
    pub fn from_frame_columns(&self, c: &Array2<C64>) -> Array2<C64> {
        let u = self.u_full();
        let (r, d) = c.dim();
        assert_eq!(d, self.dim());
        Array2::from_shape_fn((r, d), |(i, k)| {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                acc += c[(i, j)] * u[(k, j)];
            }
            acc
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_dense;

    #[test]
    fn truncated_commutator_is_exact() {
        for n_max in [1, 2, 4, 6] {
            let sp = PhononSpace::new(1, n_max).unwrap();
            let q = sp.q(0).to_dense();
            let p = sp.p(0).to_dense();
            let comm = q.dot(&p) - p.dot(&q);
            let d = n_max + 1;
            let mut expect = Array2::<C64>::eye(d).mapv(|v| v * C64::new(0.0, 1.0));
            expect[(d - 1, d - 1)] =
                C64::new(0.0, 1.0) * (1.0 - d as f64);
            assert!(max_abs_dense(&(comm - expect)) < 1e-12, "n_max = {n_max}");
        }
    }

    #[test]
    fn frame_nodes_for_small_cutoffs() {
        // n_max = 1: q = [[0, 1/sqrt2], [1/sqrt2, 0]] -> nodes +-1/sqrt2.
        let sp = PhononSpace::new(1, 1).unwrap();
        let fr = PositionFrame::new(&sp).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert!((fr.nodes()[0] + s).abs() < 1e-12);
        assert!((fr.nodes()[1] - s).abs() < 1e-12);

        // n_max = 2: nodes {-sqrt(3/2), 0, sqrt(3/2)}.
        let sp = PhononSpace::new(1, 2).unwrap();
        let fr = PositionFrame::new(&sp).unwrap();
        let r = (1.5f64).sqrt();
        assert!((fr.nodes()[0] + r).abs() < 1e-12);
        assert!(fr.nodes()[1].abs() < 1e-12);
        assert!((fr.nodes()[2] - r).abs() < 1e-12);
    }

    #[test]
    fn frame_is_symmetric_and_vacuum_positive() {
        for n_max in [1, 2, 3, 4, 6] {
            let sp = PhononSpace::new(1, n_max).unwrap();
            let fr = PositionFrame::new(&sp).unwrap();
            let d = n_max + 1;
            for k in 0..d {
                assert!(
                    (fr.nodes()[k] + fr.nodes()[d - 1 - k]).abs() < 1e-12,
                    "nodes symmetric about zero"
                );
                assert!(fr.u1()[(0, k)] > 0.0, "vacuum row positive");
            }
            for w in fr.nodes().windows(2) {
                assert!(w[0] < w[1], "nodes ascending");
            }
        }
    }

    #[test]
    fn phase_operator_unitary_and_reduces_to_identity() {
        let sp = PhononSpace::new(2, 3).unwrap();
        let u = sp.phase_operator(1, 1.0, 0.4, 1.0).unwrap();
        let prod = u.adjoint().matmul(&u);
        let diff = prod.add_scaled(
            C64::new(1.0, 0.0),
            &CsrMatrix::identity(sp.dim()),
            C64::new(-1.0, 0.0),
        );
        assert!(diff.max_abs() < 1e-12);
        // g = 0 gives the identity exactly.
        let id = sp.phase_operator(0, 1.0, 0.0, 1.0).unwrap();
        let diff = id.add_scaled(
            C64::new(1.0, 0.0),
            &CsrMatrix::identity(sp.dim()),
            C64::new(-1.0, 0.0),
        );
        assert!(diff.max_abs() < 1e-12);
    }

    #[test]
    fn multimode_indexing() {
        let sp = PhononSpace::new(2, 2).unwrap();
        assert_eq!(sp.dim(), 9);
        // Index 5 = 1 * 3 + 2 -> occupations (1, 2).
        assert_eq!(sp.occupations(5), vec![1, 2]);
        assert_eq!(sp.total_occupation(5), 3);
        // N_p diagonal agrees.
        let np = sp.number_op().to_dense();
        assert_eq!(np[(5, 5)], C64::new(3.0, 0.0));
    }

    #[test]
    fn frame_round_trip() {
        let sp = PhononSpace::new(2, 2).unwrap();
        let fr = PositionFrame::new(&sp).unwrap();
        let c = Array2::from_shape_fn((3, sp.dim()), |(i, j)| {
            C64::new((i + j) as f64, (i as f64) - (j as f64))
        });
        let back = fr.from_frame_columns(&fr.to_frame_columns(&c));
        assert!(max_abs_dense(&(back - c)) < 1e-12);
    }
}
