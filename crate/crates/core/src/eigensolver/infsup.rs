use super::EigenError;
use crate::sparse::{CsrMatrix, EnvelopeCholesky};
use nalgebra::{DMatrix, SymmetricEigen};

/// Inf-sup constant of `B` with respect to a fixed primal norm `N_V`,
/// keeping the factorization of `N_V` for several pairings.
pub struct InfSupSolver {
    factor: EnvelopeCholesky,
}

impl InfSupSolver {
    pub fn new(nv: &CsrMatrix) -> Result<Self, EigenError> {
        let factor = EnvelopeCholesky::factor(nv).map_err(|_| EigenError::NotPositiveDefinite("N_V"))?;
        Ok(Self { factor })
    }

    /// `beta = sqrt(lambda_min)` of `B N_V^{-1} B^T w = beta^2 N_Λ w`.
    pub fn beta(&self, b: &CsrMatrix, nl: &CsrMatrix) -> Result<f64, EigenError> {
        let m = b.nrows();
        if b.ncols() != self.factor.n() || nl.nrows() != m || nl.ncols() != m {
            return Err(EigenError::Dimension(format!(
                "B {}x{}, N_V {}, N_Λ {}x{}",
                b.nrows(),
                b.ncols(),
                self.factor.n(),
                nl.nrows(),
                nl.ncols()
            )));
        }
        if m == 0 {
            return Err(EigenError::Dimension("no multipliers".into()));
        }
        let w = self.factor.solve_many(&b.transpose().to_dense());
        let s = b.mul_dense(&w);
        smallest_generalized(&((&s + s.transpose()) * 0.5), &nl.to_dense()).map(|l| l.max(0.0).sqrt())
    }
}

/// Smallest eigenvalue of the symmetric definite pencil `(s, t)`.
fn smallest_generalized(s: &DMatrix<f64>, t: &DMatrix<f64>) -> Result<f64, EigenError> {
    let chol = ((t + t.transpose()) * 0.5).cholesky().ok_or(EigenError::NotPositiveDefinite("N_Λ"))?;
    let linv = chol.l().try_inverse().ok_or(EigenError::NotPositiveDefinite("N_Λ"))?;
    let c = &linv * s * linv.transpose();
    let eig = SymmetricEigen::new((&c + c.transpose()) * 0.5);
    Ok(eig.eigenvalues.min())
}

/// Numerical inf-sup constant
/// `beta = inf_mu sup_v (B v, mu) / (|v|_{N_V} |mu|_{N_Λ})`.
pub fn infsup_constant(b: &CsrMatrix, nv: &CsrMatrix, nl: &CsrMatrix) -> Result<f64, EigenError> {
    InfSupSolver::new(nv)?.beta(b, nl)
}
