//! Compressed sparse row matrices and the direct solver used by the
//! eigensolver and the inf-sup estimator.

mod assembler;
mod cholesky;
mod market;
mod ordering;

pub use assembler::CsrAssembler;
pub use cholesky::{CholeskyError, EnvelopeCholesky};
pub use market::{read_matrix_market, write_matrix_market};
pub use ordering::reverse_cuthill_mckee;

use nalgebra::DMatrix;

/// Row-major compressed sparse matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

/// Coordinate-format accumulator; duplicates are summed on conversion.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, ..Default::default() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            rows: Vec::with_capacity(cap),
            cols: Vec::with_capacity(cap),
            vals: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.rows.push(i);
        self.cols.push(j);
        self.vals.push(v);
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.nrows + 1];
        for &r in &self.rows {
            counts[r + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; self.vals.len()];
        let mut vals = vec![0.0; self.vals.len()];
        for k in 0..self.vals.len() {
            let r = self.rows[k];
            cols[next[r]] = self.cols[k];
            vals[next[r]] = self.vals[k];
            next[r] += 1;
        }
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::with_capacity(self.vals.len());
        let mut data = Vec::with_capacity(self.vals.len());
        indptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..self.nrows {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_unstable_by_key(|e| e.0);
            for &(c, v) in &scratch {
                if indices.len() > indptr[i] && *indices.last().unwrap() == c {
                    *data.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self { nrows: n, ncols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), data: vec![1.0; n] }
    }

    /// Builds a matrix from raw parts; column indices must be sorted per row.
    pub fn from_parts(nrows: usize, ncols: usize, indptr: Vec<usize>, indices: Vec<usize>, data: Vec<f64>) -> Self {
        assert_eq!(indptr.len(), nrows + 1);
        assert_eq!(indices.len(), data.len());
        Self { nrows, ncols, indptr, indices, data }
    }

    pub fn from_dense(m: &DMatrix<f64>, drop_tol: f64) -> Self {
        let mut t = Triplets::new(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v.abs() > drop_tol {
                    t.push(i, j, v);
                }
            }
        }
        t.to_csr()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.data[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    /// `y = self * x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k]];
            }
            y[i] = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec(x, &mut y);
        y
    }

    /// `y += alpha * self^T * x`.
    pub fn mul_vec_t_acc(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for i in 0..self.nrows {
            let xi = alpha * x[i];
            if xi == 0.0 {
                continue;
            }
            for k in self.indptr[i]..self.indptr[i + 1] {
                y[self.indices[k]] += self.data[k] * xi;
            }
        }
    }

    pub fn apply_t(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        self.mul_vec_t_acc(1.0, x, &mut y);
        y
    }

    /// Product with a dense column-major block of vectors.
    pub fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.ncols);
        let mut y = DMatrix::zeros(self.nrows, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            let mut yc = y.column_mut(c);
            for i in 0..self.nrows {
                let mut s = 0.0;
                for k in self.indptr[i]..self.indptr[i + 1] {
                    s += self.data[k] * xc[self.indices[k]];
                }
                yc[i] = s;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let c = self.indices[k];
                indices[next[c]] = i;
                data[next[c]] = self.data[k];
                next[c] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, indptr: counts, indices, data }
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut marker = vec![usize::MAX; other.ncols];
        let mut acc = vec![0.0; other.ncols];
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        let mut cols: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            cols.clear();
            for k in self.indptr[i]..self.indptr[i + 1] {
                let a = self.data[k];
                let r = self.indices[k];
                for kk in other.indptr[r]..other.indptr[r + 1] {
                    let c = other.indices[kk];
                    if marker[c] != i {
                        marker[c] = i;
                        acc[c] = 0.0;
                        cols.push(c);
                    }
                    acc[c] += a * other.data[kk];
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                indices.push(c);
                data.push(acc[c]);
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: other.ncols, indptr, indices, data }
    }

    /// `alpha * self + beta * other`.
    pub fn add(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut data = Vec::with_capacity(self.nnz().max(other.nnz()));
        indptr.push(0);
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut a, mut b) = (0, 0);
            while a < ca.len() || b < cb.len() {
                let take_a = b >= cb.len() || (a < ca.len() && ca[a] < cb[b]);
                let take_b = a >= ca.len() || (b < cb.len() && cb[b] < ca[a]);
                if take_a {
                    indices.push(ca[a]);
                    data.push(alpha * va[a]);
                    a += 1;
                } else if take_b {
                    indices.push(cb[b]);
                    data.push(beta * vb[b]);
                    b += 1;
                } else {
                    indices.push(ca[a]);
                    data.push(alpha * va[a] + beta * vb[b]);
                    a += 1;
                    b += 1;
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, indptr, indices, data }
    }

    pub fn scaled(&self, alpha: f64) -> CsrMatrix {
        let mut m = self.clone();
        m.data.iter_mut().for_each(|v| *v *= alpha);
        m
    }

    /// Removes entries with magnitude at most `tol`.
    pub fn pruned(&self, tol: f64) -> CsrMatrix {
        let mut t = Triplets::with_capacity(self.nrows, self.ncols, self.nnz());
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                if x.abs() > tol {
                    t.push(i, j, x);
                }
            }
        }
        t.to_csr()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                m[(i, self.indices[k])] += self.data[k];
            }
        }
        m
    }

    /// Rows picked in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> CsrMatrix {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for &r in rows {
            let (c, v) = self.row(r);
            indices.extend_from_slice(c);
            data.extend_from_slice(v);
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: rows.len(), ncols: self.ncols, indptr, indices, data }
    }

    /// Columns picked in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            map[c] = k;
        }
        let mut t = Triplets::with_capacity(self.nrows, cols.len(), self.nnz());
        for i in 0..self.nrows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                if map[j] != usize::MAX {
                    t.push(i, map[j], x);
                }
            }
        }
        t.to_csr()
    }

    /// Indices of columns holding at least one entry above `tol` in magnitude.
    pub fn nonzero_columns(&self, tol: f64) -> Vec<usize> {
        let mut used = vec![false; self.ncols];
        for (k, &c) in self.indices.iter().enumerate() {
            if self.data[k].abs() > tol {
                used[c] = true;
            }
        }
        (0..self.ncols).filter(|&j| used[j]).collect()
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let t = self.transpose();
        let d = self.add(1.0, &t, -1.0);
        let m = self.max_abs();
        if m == 0.0 {
            0.0
        } else {
            d.max_abs() / m
        }
    }

    /// Block-diagonal stacking.
    pub fn block_diag(blocks: &[&CsrMatrix]) -> CsrMatrix {
        let nrows = blocks.iter().map(|b| b.nrows).sum();
        let ncols = blocks.iter().map(|b| b.ncols).sum();
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let mut off = 0;
        for b in blocks {
            for i in 0..b.nrows {
                let (c, v) = b.row(i);
                indices.extend(c.iter().map(|&j| j + off));
                data.extend_from_slice(v);
                indptr.push(indices.len());
            }
            off += b.ncols;
        }
        CsrMatrix { nrows, ncols, indptr, indices, data }
    }

    /// Horizontal concatenation `[a | b | ...]`.
    pub fn hstack(blocks: &[&CsrMatrix]) -> CsrMatrix {
        let nrows = blocks.first().map_or(0, |b| b.nrows);
        assert!(blocks.iter().all(|b| b.nrows == nrows));
        let ncols = blocks.iter().map(|b| b.ncols).sum();
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for i in 0..nrows {
            let mut off = 0;
            for b in blocks {
                let (c, v) = b.row(i);
                indices.extend(c.iter().map(|&j| j + off));
                data.extend_from_slice(v);
                off += b.ncols;
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows, ncols, indptr, indices, data }
    }

    /// Vertical concatenation.
    pub fn vstack(blocks: &[&CsrMatrix]) -> CsrMatrix {
        let ncols = blocks.first().map_or(0, |b| b.ncols);
        assert!(blocks.iter().all(|b| b.ncols == ncols));
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for b in blocks {
            for i in 0..b.nrows {
                let (c, v) = b.row(i);
                indices.extend_from_slice(c);
                data.extend_from_slice(v);
                indptr.push(indices.len());
            }
        }
        CsrMatrix { nrows: indptr.len() - 1, ncols, indptr, indices, data }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = [0.0f64; 4];
    let n4 = a.len() / 4 * 4;
    for k in (0..n4).step_by(4) {
        s[0] += a[k] * b[k];
        s[1] += a[k + 1] * b[k + 1];
        s[2] += a[k + 2] * b[k + 2];
        s[3] += a[k + 3] * b[k + 3];
    }
    let mut t = (s[0] + s[1]) + (s[2] + s[3]);
    for k in n4..a.len() {
        t += a[k] * b[k];
    }
    t
}
