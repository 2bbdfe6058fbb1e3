use super::constrained::{pair_residuals, MultiplierRecovery};
use super::{filter_zero_modes, EigenError, EigenOptions, SolverPath, SpectrumResult};
use crate::sparse::CsrMatrix;
use nalgebra::{DMatrix, SymmetricEigen};

/// Relative singular value threshold for the numerical rank of `B`.
const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis `Z` of `ker B` and the numerical rank of `B`.
pub fn nullspace_basis(b: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let n = b.ncols();
    if b.nrows() == 0 || b.iter().all(|&v| v == 0.0) {
        return (DMatrix::identity(n, n), 0);
    }
    let svd = b.clone().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors were requested");
    let smax = svd.singular_values.max();
    let rows: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > RANK_TOL * smax).collect();
    let rank = rows.len();
    // Householder reflections taking the row space onto the first `rank`
    // coordinates; the remaining columns of Q span the kernel.
    let mut row_space = DMatrix::zeros(n, rank);
    for (k, &i) in rows.iter().enumerate() {
        row_space.set_column(k, &vt.row(i).transpose());
    }
    let qr = row_space.qr();
    let mut q = DMatrix::identity(n, n);
    qr.q_tr_mul(&mut q);
    let z = q.rows(rank, n - rank).transpose();
    (z, rank)
}

/// Dense solution on an orthonormal basis of `ker B`; every eigenvalue of
/// the reduced pencil is computed, so the kernel is counted from the
/// spectrum itself.
pub fn dense_constrained_eig(
    a: &CsrMatrix,
    m: &CsrMatrix,
    b: &CsrMatrix,
    opts: &EigenOptions,
) -> Result<SpectrumResult, EigenError> {
    let (z, _) = nullspace_basis(&b.to_dense());
    if z.ncols() == 0 {
        return Err(EigenError::TooFewModes { requested: opts.n_modes, available: 0 });
    }
    let az = z.tr_mul(&a.mul_dense(&z));
    let mz = z.tr_mul(&m.mul_dense(&z));
    let chol = ((&mz + mz.transpose()) * 0.5).cholesky().ok_or(EigenError::NotPositiveDefinite("reduced mass"))?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or(EigenError::NotPositiveDefinite("reduced mass"))?;
    let c = &linv * ((&az + az.transpose()) * 0.5) * linv.transpose();
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let (kernel_dim, physical) = filter_zero_modes(&values, opts.zero_tol);
    if physical.len() < opts.n_modes {
        return Err(EigenError::TooFewModes { requested: opts.n_modes, available: physical.len() });
    }
    let eigenvalues = physical[..opts.n_modes].to_vec();
    let cols = &order[kernel_dim..kernel_dim + opts.n_modes];
    let mut y = DMatrix::zeros(z.ncols(), opts.n_modes);
    for (k, &i) in cols.iter().enumerate() {
        y.set_column(k, &eig.eigenvectors.column(i));
    }
    // x = Z L^{-T} y is M-normalized.
    let vectors = &z * (linv.transpose() * y);
    let rec = MultiplierRecovery::new(b);
    let (multipliers, residuals, constraint_residuals) = pair_residuals(a, m, b, &rec, &eigenvalues, &vectors);
    Ok(SpectrumResult {
        eigenvalues,
        vectors,
        multipliers,
        kernel_dim,
        residuals,
        constraint_residuals,
        path: SolverPath::Dense,
        iterations: 1,
    })
}
