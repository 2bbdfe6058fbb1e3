//! Constrained generalized eigenproblems `A u = lambda M u`, `B u = 0`, and
//! the numerical inf-sup constant of the pairing `B`.
//!
//! Small problems are reduced to an orthonormal basis of `ker B` and solved
//! densely. Larger ones run a block Krylov iteration on the shift-inverted
//! operator restricted to `ker B` through a Schur complement, with the
//! gradient kernel of `A` projected out at every step.

mod constrained;
mod dense;
mod infsup;
mod krylov;

pub use dense::{dense_constrained_eig, nullspace_basis};
pub use infsup::{infsup_constant, InfSupSolver};
pub use krylov::krylov_constrained_eig;

use crate::sparse::{CholeskyError, CsrMatrix};
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("at least one eigenpair must be requested")]
    NoModes,
    #[error("matrix dimensions do not agree: {0}")]
    Dimension(String),
    #[error(transparent)]
    Cholesky(#[from] CholeskyError),
    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),
    #[error("only {available} physical eigenpairs exist, {requested} requested")]
    TooFewModes { requested: usize, available: usize },
    #[error("no convergence after {iterations} iterations, largest residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Largest problem still handed to the dense path when the iteration
/// breaks down.
pub const DENSE_FALLBACK_LIMIT: usize = 5000;

/// Settings of [`solve_constrained_eig`].
#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    /// Physical (nonzero) eigenpairs wanted.
    pub n_modes: usize,
    /// Shift of the iterative path; must keep `A + shift M` definite.
    pub shift: f64,
    /// Relative residual at which the iteration stops.
    pub tol: f64,
    pub max_iterations: usize,
    /// Problems with at most this many unknowns are solved densely.
    pub dense_limit: usize,
    /// Relative threshold separating kernel from physical eigenvalues.
    pub zero_tol: f64,
    /// Seed of the random starting block.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { n_modes: 10, shift: 1.0, tol: 1e-9, max_iterations: 200, dense_limit: 1000, zero_tol: 1e-8, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverPath {
    Dense,
    Krylov,
}

/// Lowest physical eigenpairs of a constrained problem.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending nonzero eigenvalues.
    pub eigenvalues: Vec<f64>,
    /// Field parts, one `M`-normalized column per eigenvalue.
    pub vectors: DMatrix<f64>,
    /// Multipliers recovered by least squares, one column per eigenvalue.
    pub multipliers: DMatrix<f64>,
    /// Dimension of the zero-frequency kernel. Counted from the spectrum on
    /// the dense path and from `dim ker(B G)` on the iterative path.
    pub kernel_dim: usize,
    /// `||A x - lambda M x - B^T mu|| / (||A|| ||x||)` per pair.
    pub residuals: Vec<f64>,
    /// `||B x|| / ||x||` per pair.
    pub constraint_residuals: Vec<f64>,
    pub path: SolverPath,
    pub iterations: usize,
}

/// Splits eigenvalues into the kernel (below `tol_rel` times the largest
/// value) and the remaining physical ones.
pub fn filter_zero_modes(eigenvalues: &[f64], tol_rel: f64) -> (usize, Vec<f64>) {
    let max = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return (eigenvalues.len(), Vec::new());
    }
    let cut = tol_rel * max;
    let kernel = eigenvalues.iter().filter(|&&v| v < cut).count();
    (kernel, eigenvalues.iter().copied().filter(|&v| v >= cut).collect())
}

/// Groups ascending eigenvalues whose relative gap to the previous group
/// member is at most `rel`: `(mean value, multiplicity)`.
pub fn cluster_eigenvalues(eigenvalues: &[f64], rel: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &v in eigenvalues {
        match out.last_mut() {
            Some((sum, count, last)) if (v - *last).abs() <= rel * v.abs().max(last.abs()) => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter().map(|(s, c, _)| (s / c as f64, c)).collect()
}

/// Lowest `opts.n_modes` physical eigenpairs of `A u = lambda M u` on
/// `ker B`. `gradients` spans the kernel of `A` before constraints; it is
/// used by the iterative path for deflation.
pub fn solve_constrained_eig(
    a: &CsrMatrix,
    m: &CsrMatrix,
    b: &CsrMatrix,
    gradients: &CsrMatrix,
    opts: &EigenOptions,
) -> Result<SpectrumResult, EigenError> {
    if opts.n_modes == 0 {
        return Err(EigenError::NoModes);
    }
    let n = a.nrows();
    if a.ncols() != n || m.nrows() != n || m.ncols() != n || b.ncols() != n || gradients.nrows() != n {
        return Err(EigenError::Dimension(format!(
            "A {}x{}, M {}x{}, B {}x{}, G {}x{}",
            a.nrows(),
            a.ncols(),
            m.nrows(),
            m.ncols(),
            b.nrows(),
            b.ncols(),
            gradients.nrows(),
            gradients.ncols()
        )));
    }
    if n <= opts.dense_limit {
        return dense_constrained_eig(a, m, b, opts);
    }
    match krylov_constrained_eig(a, m, b, gradients, opts) {
        Err(EigenError::Cholesky(_) | EigenError::NotPositiveDefinite(_) | EigenError::NoConvergence { .. })
            if n <= DENSE_FALLBACK_LIMIT =>
        {
            dense_constrained_eig(a, m, b, opts)
        }
        r => r,
    }
}
