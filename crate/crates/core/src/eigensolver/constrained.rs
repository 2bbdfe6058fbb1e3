use super::EigenError;
use crate::sparse::{CsrMatrix, EnvelopeCholesky};
use nalgebra::{DMatrix, SymmetricEigen};

/// Pseudo-inverse of a symmetric positive semidefinite matrix, dropping
/// eigenvalues below `rel` times the largest.
pub(crate) struct SymmetricPinv {
    vecs: DMatrix<f64>,
    inv: Vec<f64>,
    rank: usize,
}

impl SymmetricPinv {
    pub(crate) fn new(s: DMatrix<f64>, rel: f64) -> Self {
        let n = s.nrows();
        if n == 0 {
            return Self { vecs: DMatrix::zeros(0, 0), inv: Vec::new(), rank: 0 };
        }
        let sym = (&s + s.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let inv: Vec<f64> =
            eig.eigenvalues.iter().map(|&v| if max > 0.0 && v > rel * max { 1.0 / v } else { 0.0 }).collect();
        let rank = inv.iter().filter(|&&v| v != 0.0).count();
        Self { vecs: eig.eigenvectors, inv, rank }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rank
    }

    pub(crate) fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        if self.inv.is_empty() {
            return DMatrix::zeros(0, x.ncols());
        }
        let mut y = self.vecs.tr_mul(x);
        for (i, &s) in self.inv.iter().enumerate() {
            y.row_mut(i).scale_mut(s);
        }
        &self.vecs * y
    }
}

/// Solves `[K C^T; C 0] [x; nu] = [f; 0]` for symmetric positive definite
/// `K` through the Schur complement `C K^{-1} C^T`. Redundant constraint
/// rows are tolerated.
pub(crate) struct ConstrainedSolver {
    factor: EnvelopeCholesky,
    c: CsrMatrix,
    /// `K^{-1} C^T`.
    w: DMatrix<f64>,
    schur: SymmetricPinv,
}

impl ConstrainedSolver {
    pub(crate) fn new(k: &CsrMatrix, c: CsrMatrix, what: &'static str) -> Result<Self, EigenError> {
        let factor = EnvelopeCholesky::factor(k).map_err(|_| EigenError::NotPositiveDefinite(what))?;
        let ct = c.transpose().to_dense();
        let w = if c.nrows() > 0 { factor.solve_many(&ct) } else { DMatrix::zeros(k.nrows(), 0) };
        let s = c.mul_dense(&w);
        let schur = SymmetricPinv::new(s, 1e-12);
        Ok(Self { factor, c, w, schur })
    }

    /// Rank of the constraint rows.
    pub(crate) fn rank(&self) -> usize {
        self.schur.rank()
    }

    /// `K`-orthogonal projection of the columns of `x` onto `ker C`.
    pub(crate) fn project(&self, x: &mut DMatrix<f64>) {
        if self.c.nrows() > 0 {
            let nu = self.schur.apply(&self.c.mul_dense(x));
            *x -= &self.w * nu;
        }
    }

    pub(crate) fn solve_many(&self, f: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = self.factor.solve_many(f);
        self.project(&mut x);
        x
    }
}

/// Least-squares multipliers `mu = argmin ||r - B^T mu||`.
pub(crate) struct MultiplierRecovery<'a> {
    b: &'a CsrMatrix,
    bt: CsrMatrix,
    pinv: SymmetricPinv,
}

impl<'a> MultiplierRecovery<'a> {
    pub(crate) fn new(b: &'a CsrMatrix) -> Self {
        let bt = b.transpose();
        let pinv = SymmetricPinv::new(b.matmul(&bt).to_dense(), 1e-12);
        Self { b, bt, pinv }
    }

    /// Multipliers and the part of `r` they leave unexplained.
    pub(crate) fn recover(&self, r: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        if self.b.nrows() == 0 {
            return (DMatrix::zeros(0, r.ncols()), r.clone());
        }
        let mu = self.pinv.apply(&self.b.mul_dense(r));
        let rest = r - self.bt.mul_dense(&mu);
        (mu, rest)
    }
}

/// Residuals of approximate eigenpairs `(lambda_j, x_j)`: multipliers,
/// relative eigen-residuals and relative constraint residuals.
pub(crate) fn pair_residuals(
    a: &CsrMatrix,
    m: &CsrMatrix,
    b: &CsrMatrix,
    rec: &MultiplierRecovery,
    lambda: &[f64],
    x: &DMatrix<f64>,
) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let ax = a.mul_dense(x);
    let mut mx = m.mul_dense(x);
    for (j, &l) in lambda.iter().enumerate() {
        mx.column_mut(j).scale_mut(l);
    }
    let (mu, rest) = rec.recover(&(ax - mx));
    let norm_a = a.norm_inf().max(f64::MIN_POSITIVE);
    let bx = b.mul_dense(x);
    let res = (0..x.ncols()).map(|j| rest.column(j).norm() / (norm_a * x.column(j).norm())).collect();
    let cres =
        (0..x.ncols()).map(|j| if bx.nrows() == 0 { 0.0 } else { bx.column(j).norm() / x.column(j).norm() }).collect();
    (mu, res, cres)
}

/// `M`-orthonormal basis of the span of `v`, dropping directions whose
/// squared `M`-norm falls below `floor` or is negligible within the block.
pub(crate) fn m_orthonormalize(v: &DMatrix<f64>, m: &CsrMatrix, floor: f64) -> DMatrix<f64> {
    let mut v = v.clone();
    for _ in 0..2 {
        if v.ncols() == 0 {
            break;
        }
        let gram = v.tr_mul(&m.mul_dense(&v));
        let eig = SymmetricEigen::new((&gram + gram.transpose()) * 0.5);
        let max = eig.eigenvalues.iter().fold(0.0f64, |a, b| a.max(*b));
        let keep: Vec<usize> = (0..gram.nrows()).filter(|&i| eig.eigenvalues[i] > (1e-14 * max).max(floor)).collect();
        let mut t = DMatrix::zeros(gram.nrows(), keep.len());
        for (k, &i) in keep.iter().enumerate() {
            t.set_column(k, &(eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt()));
        }
        v = &v * t;
    }
    v
}
