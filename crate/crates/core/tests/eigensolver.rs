use iga_mortar::assembly::{CouplingMethod, SaddleProblem};
use iga_mortar::eigensolver::{
    cluster_eigenvalues, dense_constrained_eig, filter_zero_modes, infsup_constant, krylov_constrained_eig,
    nullspace_basis, solve_constrained_eig, EigenError, EigenOptions, SolverPath,
};
use iga_mortar::geometry::{cube_two_patches, unit_cube};
use iga_mortar::spaces::Discretization;
use iga_mortar::sparse::CsrMatrix;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// Random symmetric positive definite matrix `X X^T + n I`.
fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let x = random_matrix(rng, n, n);
    &x * x.transpose() + DMatrix::identity(n, n) * n as f64
}

/// Symmetric `s^{-1/2}` through the eigendecomposition.
fn inv_sqrt(s: &DMatrix<f64>) -> DMatrix<f64> {
    let e = s.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(|v| 1.0 / v.sqrt()));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

/// Brute-force inf-sup constant from explicit inverses and square roots.
fn infsup_oracle(b: &DMatrix<f64>, nv: &DMatrix<f64>, nl: &DMatrix<f64>) -> f64 {
    let s = b * nv.clone().try_inverse().unwrap() * b.transpose();
    let r = inv_sqrt(nl);
    let c = &r * s * &r;
    c.symmetric_eigen().eigenvalues.min().max(0.0).sqrt()
}

fn csr(d: &DMatrix<f64>) -> CsrMatrix {
    CsrMatrix::from_dense(d, 0.0)
}

fn cube_problem(p: usize, r: i64, n: usize) -> SaddleProblem {
    SaddleProblem::build(&unit_cube(), &[Discretization::new(p, r, [n; 3])], CouplingMethod::Glue).unwrap()
}

fn mortar_problem() -> SaddleProblem {
    let discs = [Discretization::new(3, 2, [3, 3, 2]), Discretization::new(2, 0, [4, 4, 2])];
    SaddleProblem::build(&cube_two_patches(), &discs, CouplingMethod::Mortar { q: 2 }).unwrap()
}

fn solve(p: &SaddleProblem, opts: &EigenOptions) -> Result<iga_mortar::eigensolver::SpectrumResult, EigenError> {
    solve_constrained_eig(&p.stiffness, &p.mass, &p.coupling, &p.gradients, opts)
}

#[test]
fn nullspace_of_zero_rows_is_everything() {
    let (z, rank) = nullspace_basis(&DMatrix::zeros(3, 5));
    assert_eq!(rank, 0);
    assert_eq!(z, DMatrix::identity(5, 5));
    let (z, rank) = nullspace_basis(&DMatrix::zeros(0, 4));
    assert_eq!((z.ncols(), rank), (4, 0));
}

#[test]
fn nullspace_of_a_ones_row() {
    let n = 7;
    let (z, rank) = nullspace_basis(&DMatrix::from_element(1, n, 1.0));
    assert_eq!((rank, z.ncols()), (1, n - 1));
    for j in 0..z.ncols() {
        assert!(z.column(j).sum().abs() < 1e-13);
    }
    assert!((z.tr_mul(&z) - DMatrix::identity(n - 1, n - 1)).amax() < 1e-13);
}

#[test]
fn nullspace_drops_redundant_rows() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let top = random_matrix(&mut rng, 3, 9);
    let mut b = DMatrix::zeros(5, 9);
    b.rows_mut(0, 3).copy_from(&top);
    b.set_row(3, &(top.row(0) + top.row(2) * 2.0));
    b.set_row(4, &top.row(1));
    let (z, rank) = nullspace_basis(&b);
    assert_eq!((rank, z.ncols()), (3, 6));
    assert!((&b * &z).amax() < 1e-12);
}

/// Projector onto `ker B` from the normal equations,
/// `I - B^T (B B^T)^{-1} B`, for full row rank `B`.
fn kernel_projector(b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = b.ncols();
    DMatrix::identity(n, n) - b.transpose() * (b * b.transpose()).try_inverse().unwrap() * b
}

#[test]
fn nullspace_of_random_rows_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let b = random_matrix(&mut rng, 4, 10);
    let (z, rank) = nullspace_basis(&b);
    assert_eq!((rank, z.ncols()), (4, 6));
    assert!((&b * &z).amax() < 1e-11);
    assert!((z.tr_mul(&z) - DMatrix::identity(6, 6)).amax() < 1e-12);
    assert!((&z * z.transpose() - kernel_projector(&b)).amax() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nullspace_is_an_orthonormal_kernel_basis(seed in any::<u64>(), m in 1usize..20, extra in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = m + extra;
        let b = random_matrix(&mut rng, m, n);
        let (z, rank) = nullspace_basis(&b);
        prop_assert_eq!(rank, m);
        prop_assert_eq!(z.ncols(), n - m);
        prop_assert!((&b * &z).amax() < 1e-11);
        prop_assert!((z.tr_mul(&z) - DMatrix::identity(n - m, n - m)).amax() < 1e-11);
        prop_assert!((&z * z.transpose() - kernel_projector(&b)).amax() < 1e-10);
    }

    #[test]
    fn infsup_scales_with_the_pairing_and_the_primal_norm(seed in any::<u64>(), c in 0.1f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_matrix(&mut rng, 3, 8);
        let nv = random_spd(&mut rng, 8);
        let nl = random_spd(&mut rng, 3);
        let beta = infsup_constant(&csr(&b), &csr(&nv), &csr(&nl)).unwrap();
        let scaled_b = infsup_constant(&csr(&(&b * c)), &csr(&nv), &csr(&nl)).unwrap();
        let scaled_nv = infsup_constant(&csr(&b), &csr(&(&nv * c)), &csr(&nl)).unwrap();
        prop_assert!((scaled_b - c * beta).abs() <= 1e-10 * c * beta);
        prop_assert!((scaled_nv - beta / c.sqrt()).abs() <= 1e-10 * beta);
    }

    #[test]
    fn infsup_matches_brute_force(seed in any::<u64>(), m in 1usize..20, extra in 0usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = m + extra;
        let b = random_matrix(&mut rng, m, n);
        let nv = random_spd(&mut rng, n);
        let nl = random_spd(&mut rng, m);
        let beta = infsup_constant(&csr(&b), &csr(&nv), &csr(&nl)).unwrap();
        let oracle = infsup_oracle(&b, &nv, &nl);
        prop_assert!((beta - oracle).abs() <= 1e-10 * oracle.max(1e-3), "{} vs {}", beta, oracle);
    }
}

#[test]
fn infsup_of_trivial_pairings() {
    let z = CsrMatrix::zeros(3, 6);
    assert_eq!(infsup_constant(&z, &CsrMatrix::identity(6), &CsrMatrix::identity(3)).unwrap(), 0.0);
    let i = CsrMatrix::identity(5);
    assert!((infsup_constant(&i, &i, &i).unwrap() - 1.0).abs() < 1e-14);
    assert!(matches!(
        infsup_constant(&CsrMatrix::zeros(0, 4), &CsrMatrix::identity(4), &CsrMatrix::zeros(0, 0)),
        Err(EigenError::Dimension(_))
    ));
}

#[test]
fn infsup_of_a_random_system() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let b = random_matrix(&mut rng, 3, 8);
    let nv = random_spd(&mut rng, 8);
    let nl = random_spd(&mut rng, 3);
    let beta = infsup_constant(&csr(&b), &csr(&nv), &csr(&nl)).unwrap();
    assert!((beta - infsup_oracle(&b, &nv, &nl)).abs() < 1e-10);
}

#[test]
fn zero_modes_are_split_off() {
    assert_eq!(filter_zero_modes(&[0.0, 0.0, 19.7, 19.7], 1e-8), (2, vec![19.7, 19.7]));
    assert_eq!(filter_zero_modes(&[0.0, 0.0, 0.0], 1e-8), (3, vec![]));
    assert_eq!(filter_zero_modes(&[1e-12, -1e-12, 5.0], 1e-8), (2, vec![5.0]));
    assert_eq!(filter_zero_modes(&[], 1e-8), (0, vec![]));
}

#[test]
fn clusters_report_multiplicities() {
    let c = cluster_eigenvalues(&[1.0, 1.0 + 1e-9, 2.0, 3.0, 3.0, 3.0], 1e-6);
    let mult: Vec<usize> = c.iter().map(|x| x.1).collect();
    assert_eq!(mult, vec![2, 1, 3]);
    assert!((c[0].0 - (1.0 + 0.5e-9)).abs() < 1e-15);
}

#[test]
fn requests_are_validated() {
    let p = cube_problem(1, 0, 1);
    let opts = EigenOptions { n_modes: 0, ..Default::default() };
    assert_eq!(solve(&p, &opts).unwrap_err(), EigenError::NoModes);
    let opts = EigenOptions { n_modes: 1000, ..Default::default() };
    assert!(matches!(solve(&p, &opts), Err(EigenError::TooFewModes { .. })));
    let bad = CsrMatrix::zeros(1, 3);
    let opts = EigenOptions::default();
    assert!(matches!(
        solve_constrained_eig(&p.stiffness, &p.mass, &bad, &p.gradients, &opts),
        Err(EigenError::Dimension(_))
    ));
}

#[test]
fn cube_spectrum_starts_with_a_triple_two_pi_squared() {
    let p = cube_problem(2, 1, 4);
    let r = solve(&p, &EigenOptions { n_modes: 5, ..Default::default() }).unwrap();
    assert_eq!(r.path, SolverPath::Dense);
    let exact = 2.0 * PI * PI;
    for &l in &r.eigenvalues[..3] {
        assert!((l - exact).abs() / exact < 1e-3, "{l}");
    }
    assert!((r.eigenvalues[3] - 3.0 * PI * PI).abs() / (3.0 * PI * PI) < 1e-3);
    assert_eq!(cluster_eigenvalues(&r.eigenvalues[..3], 1e-6).len(), 1);
}

#[test]
fn kernel_matches_the_scalar_space() {
    for n in 2..=4 {
        let p = cube_problem(2, 1, n);
        let r = solve(&p, &EigenOptions { n_modes: 3, ..Default::default() }).unwrap();
        assert_eq!(r.kernel_dim, p.s0.n_dofs(), "{n}^3");
        let k = krylov_constrained_eig(
            &p.stiffness,
            &p.mass,
            &p.coupling,
            &p.gradients,
            &EigenOptions { n_modes: 3, ..Default::default() },
        )
        .unwrap();
        assert_eq!(k.kernel_dim, p.s0.n_dofs());
    }
}

#[test]
fn conforming_patches_reproduce_the_single_patch_spectrum() {
    let single = cube_problem(2, 0, 4);
    let discs = [Discretization::new(2, 0, [4, 4, 2]), Discretization::new(2, 0, [4, 4, 2])];
    let glued = SaddleProblem::build(&cube_two_patches(), &discs, CouplingMethod::Glue).unwrap();
    assert_eq!(single.n_dofs(), glued.n_dofs());
    let opts = EigenOptions { n_modes: 20, ..Default::default() };
    let a = solve(&single, &opts).unwrap();
    let b = solve(&glued, &opts).unwrap();
    assert_eq!(a.kernel_dim, b.kernel_dim);
    for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!((x - y).abs() <= 1e-10 * x, "{x} vs {y}");
    }
}

#[test]
fn refinement_lowers_eigenvalues_on_nested_meshes() {
    let opts = EigenOptions { n_modes: 12, ..Default::default() };
    let coarse = solve(&cube_problem(2, 1, 2), &opts).unwrap();
    let fine = solve(&cube_problem(2, 1, 4), &opts).unwrap();
    for (k, (c, f)) in coarse.eigenvalues.iter().zip(&fine.eigenvalues).enumerate() {
        assert!(f <= &(c * (1.0 + 1e-12)), "mode {k}: {f} > {c}");
    }
}

#[test]
fn krylov_agrees_with_the_dense_path_on_a_mortar_problem() {
    let p = mortar_problem();
    let opts = EigenOptions { n_modes: 10, ..Default::default() };
    let dense = dense_constrained_eig(&p.stiffness, &p.mass, &p.coupling, &opts).unwrap();
    let krylov = krylov_constrained_eig(&p.stiffness, &p.mass, &p.coupling, &p.gradients, &opts).unwrap();
    assert_eq!(krylov.path, SolverPath::Krylov);
    assert_eq!(dense.kernel_dim, krylov.kernel_dim);
    for (x, y) in dense.eigenvalues.iter().zip(&krylov.eigenvalues) {
        assert!((x - y).abs() <= 1e-9 * x, "{x} vs {y}");
    }
    for r in [&dense, &krylov] {
        assert!(r.residuals.iter().all(|&v| v <= 1e-8), "{:?}", r.residuals);
        assert!(r.constraint_residuals.iter().all(|&v| v <= 1e-9), "{:?}", r.constraint_residuals);
        assert_eq!(r.multipliers.shape(), (p.n_multipliers(), 10));
        let gram = r.vectors.tr_mul(&p.mass.mul_dense(&r.vectors));
        assert!((gram - DMatrix::identity(10, 10)).amax() < 1e-8);
    }
}

#[test]
fn seeds_give_reproducible_iterations() {
    let p = cube_problem(2, 1, 3);
    let opts = EigenOptions { n_modes: 6, dense_limit: 0, seed: 7, ..Default::default() };
    let a = solve(&p, &opts).unwrap();
    let b = solve(&p, &opts).unwrap();
    assert_eq!(a.eigenvalues, b.eigenvalues);
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn iterative_breakdown_falls_back_to_the_dense_path() {
    let p = cube_problem(2, 1, 3);
    // A - 1000 M is indefinite, so the shifted factorization fails.
    let opts = EigenOptions { n_modes: 3, shift: -1000.0, dense_limit: 0, ..Default::default() };
    let r = solve(&p, &opts).unwrap();
    assert_eq!(r.path, SolverPath::Dense);
    assert!(matches!(
        krylov_constrained_eig(&p.stiffness, &p.mass, &p.coupling, &p.gradients, &opts),
        Err(EigenError::NotPositiveDefinite(_) | EigenError::Cholesky(_))
    ));
    assert!((r.eigenvalues[0] / (2.0 * PI * PI) - 1.0).abs() < 1e-2);
}
