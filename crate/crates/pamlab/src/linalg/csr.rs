//! Deterministic compressed-sparse-row matrices over `Complex64`.
//!
//! Entries within each row are stored in strictly increasing column order
//! and duplicate triplets are merged during construction, so two operators
//! assembled from the same mathematical expression compare bit-for-bit.

use ndarray::Array2;

use super::C64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sparse complex matrix in CSR layout.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<C64>,
}

impl CsrMatrix {
    /// Empty (all-zero) matrix of the given shape.
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            vals: vec![C64::new(1.0, 0.0); n],
        }
    }

    /// Diagonal matrix from a slice.
    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::identity(n);
        m.vals.copy_from_slice(diag);
        m.prune();
        m
    }

    /// Build from (row, col, value) triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut t: Vec<(usize, usize, C64)>) -> Self {
        t.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut vals: Vec<C64> = Vec::with_capacity(t.len());
        let mut rows: Vec<usize> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            debug_assert!(r < nrows && c < ncols, "triplet out of bounds");
            if let (Some(&lr), Some(&lc)) = (rows.last(), col_idx.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            col_idx.push(c);
            vals.push(v);
        }
        // Drop entries that cancelled exactly.
        let mut k = 0;
        for i in 0..vals.len() {
            if vals[i].norm_sqr() != 0.0 {
                rows[k] = rows[i];
                col_idx[k] = col_idx[i];
                vals[k] = vals[i];
                k += 1;
            }
        }
        rows.truncate(k);
        col_idx.truncate(k);
        vals.truncate(k);
        for &r in &rows {
            row_ptr[r + 1] += 1;
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// Convert a dense matrix, keeping entries with modulus above `drop_tol`
    /// (use `0.0` to keep every nonzero exactly).
    pub fn from_dense(a: &Array2<C64>, drop_tol: f64) -> Self {
        let (nr, nc) = a.dim();
        let mut t = Vec::new();
        for r in 0..nr {
            for c in 0..nc {
                let v = a[(r, c)];
                if v.norm() > drop_tol {
                    t.push((r, c, v));
                }
            }
        }
        Self::from_triplets(nr, nc, t)
    }

    /// Dense copy.
    pub fn to_dense(&self) -> Array2<C64> {
        let mut a = Array2::zeros((self.nrows, self.ncols));
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                a[(r, self.col_idx[k])] = self.vals[k];
            }
        }
        a
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterator over `(col, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.vals[k]))
    }

    fn row_dot(&self, r: usize, x: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.vals[k] * x[self.col_idx[k]];
        }
        acc
    }

    /// Matrix-vector product, sequential implementation.
    pub fn matvec_serial(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        (0..self.nrows).map(|r| self.row_dot(r, x)).collect()
    }

    /// Matrix-vector product over row chunks in parallel.
    #[cfg(feature = "parallel")]
    pub fn matvec_parallel(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        (0..self.nrows)
            .into_par_iter()
            .map(|r| self.row_dot(r, x))
            .collect()
    }

    /// Matrix-vector product; dispatches on the `parallel` feature.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        #[cfg(feature = "parallel")]
        {
            // Parallelism only pays off once rows carry real work.
            if self.nrows >= 4096 {
                return self.matvec_parallel(x);
            }
        }
        self.matvec_serial(x)
    }

    /// `alpha * self + beta * other`.
    pub fn add_scaled(&self, alpha: C64, other: &Self, beta: C64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.push((r, c, alpha * v));
            }
            for (c, v) in other.row(r) {
                t.push((r, c, beta * v));
            }
        }
        Self::from_triplets(self.nrows, self.ncols, t)
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "matmul dimension mismatch");
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        let mut scratch = vec![C64::new(0.0, 0.0); other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                for (c2, v2) in other.row(c) {
                    if scratch[c2].norm_sqr() == 0.0 {
                        touched.push(c2);
                    }
                    scratch[c2] += v * v2;
                }
            }
            touched.sort_unstable();
            for &c2 in &touched {
                if scratch[c2].norm_sqr() != 0.0 {
                    col_idx.push(c2);
                    vals.push(scratch[c2]);
                }
                scratch[c2] = C64::new(0.0, 0.0);
            }
            touched.clear();
            row_ptr[r + 1] = col_idx.len();
        }
        Self {
            nrows: self.nrows,
            ncols: other.ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.push((c, r, v.conj()));
            }
        }
        Self::from_triplets(self.ncols, self.nrows, t)
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        let nrows = self.nrows * other.nrows;
        let ncols = self.ncols * other.ncols;
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(self.nnz() * other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() * other.nnz());
        for ra in 0..self.nrows {
            for rb in 0..other.nrows {
                // Columns come out sorted because both row slices are sorted.
                for (ca, va) in self.row(ra) {
                    for (cb, vb) in other.row(rb) {
                        col_idx.push(ca * other.ncols + cb);
                        vals.push(va * vb);
                    }
                }
                row_ptr[ra * other.nrows + rb + 1] = col_idx.len();
            }
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// Multiply every entry by `alpha`.
    pub fn scaled(&self, alpha: C64) -> Self {
        let mut m = self.clone();
        for v in m.vals.iter_mut() {
            *v *= alpha;
        }
        m.prune();
        m
    }

    /// Largest entry modulus (0 for the empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max_{ij} |A_{ij} - conj(A_{ji})|`; zero for exactly Hermitian input.
    pub fn hermiticity_residual(&self) -> f64 {
        self.add_scaled(C64::new(1.0, 0.0), &self.adjoint(), C64::new(-1.0, 0.0))
            .max_abs()
    }

    /// Remove stored entries that are exactly zero.
    fn prune(&mut self) {
        if self.vals.iter().all(|v| v.norm_sqr() != 0.0) {
            return;
        }
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                t.push((r, c, v));
            }
        }
        *self = Self::from_triplets(self.nrows, self.ncols, t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triplets_merge_and_sort() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![
                (1, 1, c(2.0, 0.0)),
                (0, 1, c(1.0, 0.0)),
                (0, 1, c(3.0, 0.0)),
                (0, 0, c(1.0, 0.0)),
                (1, 0, c(1.0, 0.0)),
                (1, 0, c(-1.0, 0.0)),
            ],
        );
        assert_eq!(m.nnz(), 3);
        let d = m.to_dense();
        assert_eq!(d[(0, 1)], c(4.0, 0.0));
        assert_eq!(d[(1, 0)], c(0.0, 0.0));
    }

    #[test]
    fn matmul_matches_dense() {
        let a = CsrMatrix::from_triplets(
            2,
            3,
            vec![(0, 0, c(1.0, 1.0)), (0, 2, c(2.0, 0.0)), (1, 1, c(0.0, -1.0))],
        );
        let b = CsrMatrix::from_triplets(
            3,
            2,
            vec![(0, 1, c(1.0, 0.0)), (1, 0, c(3.0, 0.0)), (2, 1, c(0.0, 2.0))],
        );
        let ab = a.matmul(&b).to_dense();
        let dense = a.to_dense().dot(&b.to_dense());
        for i in 0..2 {
            for j in 0..2 {
                assert!((ab[(i, j)] - dense[(i, j)]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn kron_matches_dense() {
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0, 0.0)), (1, 0, c(2.0, 0.0))]);
        let b = CsrMatrix::identity(3);
        let k = a.kron(&b);
        assert_eq!(k.nrows(), 6);
        let kd = k.to_dense();
        assert_eq!(kd[(0, 3)], c(1.0, 0.0));
        assert_eq!(kd[(5, 2)], c(2.0, 0.0));
        assert_eq!(k.nnz(), 6);
    }

    #[test]
    fn adjoint_and_hermiticity() {
        let h = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, c(0.0, 1.0)), (1, 0, c(0.0, -1.0)), (0, 0, c(3.0, 0.0))],
        );
        assert_eq!(h.hermiticity_residual(), 0.0);
        let g = CsrMatrix::from_triplets(2, 2, vec![(0, 1, c(0.0, 1.0))]);
        assert!(g.hermiticity_residual() > 0.9);
    }

    #[test]
    fn matvec_serial_parallel_agree() {
        let m = CsrMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, c(1.0, 0.0)), (1, 2, c(0.0, 1.0)), (2, 1, c(2.0, -1.0))],
        );
        let x = vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, -1.0)];
        let s = m.matvec_serial(&x);
        #[cfg(feature = "parallel")]
        {
            let p = m.matvec_parallel(&x);
            assert_eq!(s, p);
        }
        assert_eq!(s, m.matvec(&x));
    }
}
