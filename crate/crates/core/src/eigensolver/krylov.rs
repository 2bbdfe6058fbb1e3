use super::constrained::{m_orthonormalize, pair_residuals, ConstrainedSolver, MultiplierRecovery};
use super::{EigenError, EigenOptions, SolverPath, SpectrumResult};
use crate::sparse::CsrMatrix;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Krylov blocks generated per restart.
const DEPTH: usize = 3;

/// Relative singular value threshold for the rank of `B G`.
const RANK_TOL: f64 = 1e-10;

/// `M`-orthogonal projection onto the complement of the constrained kernel
/// `{G c : B G c = 0}`.
struct KernelProjector<'a> {
    g: &'a CsrMatrix,
    gt: CsrMatrix,
    m: &'a CsrMatrix,
    solver: Option<ConstrainedSolver>,
    dim: usize,
}

impl<'a> KernelProjector<'a> {
    fn new(g: &'a CsrMatrix, m: &'a CsrMatrix, b: &CsrMatrix) -> Result<Self, EigenError> {
        let gt = g.transpose();
        if g.ncols() == 0 {
            return Ok(Self { g, gt, m, solver: None, dim: 0 });
        }
        let laplace = gt.matmul(m).matmul(g);
        let rows = independent_rows(&b.matmul(g), b.norm_inf() * g.norm_inf());
        let solver = ConstrainedSolver::new(&laplace, rows, "G^T M G")?;
        let dim = g.ncols() - solver.rank();
        Ok(Self { g, gt, m, solver: Some(solver), dim })
    }

    fn apply(&self, x: &mut DMatrix<f64>) {
        if let Some(s) = &self.solver {
            let c = s.solve_many(&self.gt.mul_dense(&self.m.mul_dense(x)));
            *x -= self.g.mul_dense(&c);
        }
    }
}

/// Block Krylov iteration with restarts on `(A + sigma M)^{-1} M` restricted
/// to `ker B`, deflated against the gradient kernel.
pub fn krylov_constrained_eig(
    a: &CsrMatrix,
    m: &CsrMatrix,
    b: &CsrMatrix,
    gradients: &CsrMatrix,
    opts: &EigenOptions,
) -> Result<SpectrumResult, EigenError> {
    let n = a.nrows();
    let nev = opts.n_modes;
    if nev == 0 {
        return Err(EigenError::NoModes);
    }
    if n == 0 {
        return Err(EigenError::TooFewModes { requested: nev, available: 0 });
    }
    let block = (nev + nev.div_ceil(2).max(6)).min(n);
    let shifted = a.add(1.0, m, opts.shift);
    let solver = ConstrainedSolver::new(&shifted, b.clone(), "A + shift M")?;
    let kernel = KernelProjector::new(gradients, m, b)?;
    let op = |x: &DMatrix<f64>| {
        let mut y = solver.solve_many(&m.mul_dense(x));
        kernel.apply(&mut y);
        y
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start = DMatrix::from_fn(n, block, |_, _| rng.random_range(-1.0..1.0));
    let mut x = m_orthonormalize(&op(&start), m, 0.0);
    let rec = MultiplierRecovery::new(b);
    let mut worst = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let mut v = m_orthonormalize(&x, m, 0.0);
        let mut w = v.clone();
        for _ in 0..DEPTH {
            w = op(&w);
            // Directions that lose almost all of their norm to the basis
            // would be dominated by rounding noise once normalized.
            let scale = (0..w.ncols())
                .map(|j| w.column(j).dot(&m.mul_dense(&w.columns(j, 1).into_owned()).column(0)))
                .fold(0.0f64, f64::max);
            // Block Gram-Schmidt against the basis so far, twice, then
            // return the rounding noise it leaves to the admissible subspace.
            for _ in 0..2 {
                let coef = v.tr_mul(&m.mul_dense(&w));
                w -= &v * coef;
            }
            solver.project(&mut w);
            kernel.apply(&mut w);
            let coef = v.tr_mul(&m.mul_dense(&w));
            w -= &v * coef;
            w = m_orthonormalize(&w, m, 1e-20 * scale);
            if w.ncols() == 0 {
                break;
            }
            v = concat(&v, &w);
        }
        let av = v.tr_mul(&a.mul_dense(&v));
        let eig = SymmetricEigen::new((&av + av.transpose()) * 0.5);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
        let keep = block.min(order.len());
        if keep < nev {
            return Err(EigenError::TooFewModes { requested: nev, available: keep });
        }
        let mut y = DMatrix::zeros(v.ncols(), keep);
        for (k, &i) in order[..keep].iter().enumerate() {
            y.set_column(k, &eig.eigenvectors.column(i));
        }
        x = &v * y;
        let lambda: Vec<f64> = order[..nev].iter().map(|&i| eig.eigenvalues[i]).collect();
        let xs = x.columns(0, nev).into_owned();
        let (mu, res, cres) = pair_residuals(a, m, b, &rec, &lambda, &xs);
        worst = res.iter().fold(0.0f64, |a, &r| a.max(r));
        if worst <= opts.tol {
            return Ok(SpectrumResult {
                eigenvalues: lambda,
                vectors: xs,
                multipliers: mu,
                kernel_dim: kernel.dim,
                residuals: res,
                constraint_residuals: cres,
                path: SolverPath::Krylov,
                iterations: it,
            });
        }
    }
    Err(EigenError::NoConvergence { iterations: opts.max_iterations, residual: worst })
}

/// Orthonormal rows spanning the row space of `c`, with singular values
/// below `RANK_TOL * scale` treated as zero. Pairings that vanish
/// analytically on gradients leave rounding noise in `B G` whose size is
/// only meaningful against the scale of the factors.
fn independent_rows(c: &CsrMatrix, scale: f64) -> CsrMatrix {
    if c.nrows() == 0 {
        return c.clone();
    }
    let svd = c.to_dense().svd(false, true);
    let vt = svd.v_t.expect("right singular vectors were requested");
    let keep: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > RANK_TOL * scale).collect();
    let mut out = DMatrix::zeros(keep.len(), c.ncols());
    for (k, &i) in keep.iter().enumerate() {
        out.set_row(k, &vt.row(i));
    }
    CsrMatrix::from_dense(&out, 0.0)
}

fn concat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}
