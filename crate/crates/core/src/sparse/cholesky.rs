use super::{dot, reverse_cuthill_mckee, CsrMatrix};
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CholeskyError {
    #[error("matrix must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("matrix is not positive definite: pivot {pivot:e} at row {row}")]
    NotPositiveDefinite { row: usize, pivot: f64 },
}

/// Rows per dense block; updates between blocks run through `dgemm`.
const BLOCK: usize = 64;

/// Rows `r0..r1` of the factor, stored row-major over columns `c0..r1`.
#[derive(Debug, Clone)]
struct RowBlock {
    r0: usize,
    r1: usize,
    c0: usize,
    data: Vec<f64>,
}

impl RowBlock {
    fn width(&self) -> usize {
        self.r1 - self.c0
    }
}

/// Cholesky factor `P A P^T = L L^T` of a sparse symmetric positive definite
/// matrix, stored as a variable-band envelope under a reverse Cuthill–McKee
/// ordering. Fill stays inside the envelope, so the factor is exact.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    perm: Vec<usize>,
    iperm: Vec<usize>,
    blocks: Vec<RowBlock>,
}

impl EnvelopeCholesky {
    /// Factors `a`, which must be symmetric; only its lower triangle (after
    /// reordering) is read.
    pub fn factor(a: &CsrMatrix) -> Result<Self, CholeskyError> {
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with_permutation(a, perm)
    }

    /// Factors with a caller-supplied ordering, `perm[new] = old`.
    pub fn factor_with_permutation(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self, CholeskyError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(CholeskyError::NotSquare(n, a.ncols()));
        }
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for r in 0..n {
            for &c in a.row(r).0 {
                let (i, j) = (iperm[r], iperm[c]);
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                if lo < first[hi] {
                    first[hi] = lo;
                }
            }
        }
        let nblocks = n.div_ceil(BLOCK);
        let mut blocks: Vec<RowBlock> = (0..nblocks)
            .map(|b| {
                let r0 = b * BLOCK;
                let r1 = (r0 + BLOCK).min(n);
                let c0 = first[r0..r1].iter().copied().min().unwrap();
                RowBlock { r0, r1, c0, data: vec![0.0; (r1 - r0) * (r1 - c0)] }
            })
            .collect();
        for r in 0..n {
            let (cols, vals) = a.row(r);
            let i = iperm[r];
            let blk = &mut blocks[i / BLOCK];
            let w = blk.width();
            for (&c, &v) in cols.iter().zip(vals) {
                let j = iperm[c];
                if j <= i {
                    blk.data[(i - blk.r0) * w + (j - blk.c0)] = v;
                }
            }
        }
        for bi in 0..nblocks {
            let (done, rest) = blocks.split_at_mut(bi);
            factor_block(&mut rest[0], done)?;
        }
        Ok(Self { n, perm, iperm, blocks })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored factor entries.
    pub fn stored_entries(&self) -> usize {
        self.blocks.iter().map(|b| b.data.len()).sum()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        self.solve_permuted(&mut y, 1);
        let mut x = vec![0.0; self.n];
        for (old, &new) in self.iperm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    /// Solves for every column of `b`.
    pub fn solve_many(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(b.nrows(), self.n);
        let k = b.ncols();
        let mut y = vec![0.0; self.n * k];
        for (new, &old) in self.perm.iter().enumerate() {
            for c in 0..k {
                y[new * k + c] = b[(old, c)];
            }
        }
        self.solve_permuted(&mut y, k);
        let mut x = DMatrix::zeros(self.n, k);
        for (old, &new) in self.iperm.iter().enumerate() {
            for c in 0..k {
                x[(old, c)] = y[new * k + c];
            }
        }
        x
    }

    /// Forward and backward substitution on row-major right-hand sides.
    fn solve_permuted(&self, y: &mut [f64], k: usize) {
        for blk in &self.blocks {
            let m = blk.r1 - blk.r0;
            let w = blk.width();
            let off = blk.r0 - blk.c0;
            if off > 0 {
                // SAFETY: rows c0..r0 and r0..r1 of `y` are disjoint, and all
                // strides stay inside the buffers.
                unsafe {
                    let yp = y.as_mut_ptr();
                    matrixmultiply::dgemm(
                        m,
                        off,
                        k,
                        -1.0,
                        blk.data.as_ptr(),
                        w as isize,
                        1,
                        yp.add(blk.c0 * k),
                        k as isize,
                        1,
                        1.0,
                        yp.add(blk.r0 * k),
                        k as isize,
                        1,
                    );
                }
            }
            for ii in 0..m {
                let row = &blk.data[ii * w + off..ii * w + off + ii + 1];
                let (head, tail) = y.split_at_mut((blk.r0 + ii) * k);
                let yi = &mut tail[..k];
                for (jj, &l) in row[..ii].iter().enumerate() {
                    if l != 0.0 {
                        let yj = &head[(blk.r0 + jj) * k..(blk.r0 + jj + 1) * k];
                        for c in 0..k {
                            yi[c] -= l * yj[c];
                        }
                    }
                }
                let d = row[ii];
                for v in yi.iter_mut() {
                    *v /= d;
                }
            }
        }
        for blk in self.blocks.iter().rev() {
            let m = blk.r1 - blk.r0;
            let w = blk.width();
            let off = blk.r0 - blk.c0;
            for ii in (0..m).rev() {
                let row = &blk.data[ii * w + off..ii * w + off + ii + 1];
                let (head, tail) = y.split_at_mut((blk.r0 + ii) * k);
                let yi = &mut tail[..k];
                let d = row[ii];
                for v in yi.iter_mut() {
                    *v /= d;
                }
                for (jj, &l) in row[..ii].iter().enumerate() {
                    if l != 0.0 {
                        let yj = &mut head[(blk.r0 + jj) * k..(blk.r0 + jj + 1) * k];
                        for c in 0..k {
                            yj[c] -= l * yi[c];
                        }
                    }
                }
            }
            if off > 0 {
                // SAFETY: as in the forward sweep.
                unsafe {
                    let yp = y.as_mut_ptr();
                    matrixmultiply::dgemm(
                        off,
                        m,
                        k,
                        -1.0,
                        blk.data.as_ptr(),
                        1,
                        w as isize,
                        yp.add(blk.r0 * k),
                        k as isize,
                        1,
                        1.0,
                        yp.add(blk.c0 * k),
                        k as isize,
                        1,
                    );
                }
            }
        }
    }
}

/// Left-looking factorization of one row block against all finished blocks.
fn factor_block(bi: &mut RowBlock, done: &[RowBlock]) -> Result<(), CholeskyError> {
    let m = bi.r1 - bi.r0;
    let w = bi.width();
    let c0 = bi.c0;
    for bj in &done[c0 / BLOCK..] {
        let t0 = bj.r0.max(c0);
        let s1 = bj.r1;
        let k0 = c0.max(bj.c0);
        let wj = bj.width();
        let kk = t0 - k0;
        let nn = s1 - t0;
        if kk > 0 {
            // SAFETY: columns k0..t0 (read) and t0..s1 (written) of this block
            // are disjoint; the factor rows of `bj` are only read.
            unsafe {
                let base = bi.data.as_mut_ptr();
                matrixmultiply::dgemm(
                    m,
                    kk,
                    nn,
                    -1.0,
                    base.add(k0 - c0) as *const f64,
                    w as isize,
                    1,
                    bj.data.as_ptr().add((t0 - bj.r0) * wj + (k0 - bj.c0)),
                    1,
                    wj as isize,
                    1.0,
                    base.add(t0 - c0),
                    w as isize,
                    1,
                );
            }
        }
        // Triangular solve against the diagonal block of `bj`.
        for ii in 0..m {
            let x = &mut bi.data[ii * w + (t0 - c0)..ii * w + (s1 - c0)];
            for jj in 0..nn {
                let lrow = &bj.data[(t0 + jj - bj.r0) * wj + (t0 - bj.c0)..];
                let s = x[jj] - dot(&x[..jj], &lrow[..jj]);
                x[jj] = s / lrow[jj];
            }
        }
    }
    let off = bi.r0 - c0;
    if off > 0 {
        // SAFETY: columns c0..r0 are read, columns r0..r1 written.
        unsafe {
            let base = bi.data.as_mut_ptr();
            matrixmultiply::dgemm(
                m,
                off,
                m,
                -1.0,
                base as *const f64,
                w as isize,
                1,
                base as *const f64,
                1,
                w as isize,
                1.0,
                base.add(off),
                w as isize,
                1,
            );
        }
    }
    for i in 0..m {
        let (head, tail) = bi.data.split_at_mut(i * w);
        let ri = &mut tail[off..off + m];
        for j in 0..=i {
            let s = if j < i {
                let rj = &head[j * w + off..j * w + off + j + 1];
                (ri[j] - dot(&ri[..j], &rj[..j])) / rj[j]
            } else {
                let s = ri[i] - dot(&ri[..i], &ri[..i]);
                if !(s > 0.0) {
                    return Err(CholeskyError::NotPositiveDefinite { row: bi.r0 + i, pivot: s });
                }
                s.sqrt()
            };
            ri[j] = s;
        }
        for v in ri[i + 1..].iter_mut() {
            *v = 0.0;
        }
    }
    Ok(())
}
