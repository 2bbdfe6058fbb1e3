use iga_mortar::assembly::{
    assemble_volume, mortar_multiplier_norm, ssc_multiplier_norm, CouplingMethod, SaddleProblem,
};
use iga_mortar::geometry::{cube_two_patches, pillbox, unit_cube, FaceRef, MultipatchGeometry, Side};
use iga_mortar::quadrature::GaussRule;
use iga_mortar::spaces::{
    patch_knot_vectors, Discretization, DofTarget, Form, MultiplierSpace, PatchBasis, SubdomainSpace,
};
use iga_mortar::sparse::CsrMatrix;
use iga_mortar::waveguide_modes::rect_modes;
use nalgebra::{DMatrix, DVector, Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn quad_form(a: &CsrMatrix, x: &[f64]) -> f64 {
    a.apply(x).iter().zip(x).map(|(p, q)| p * q).sum()
}

/// Parametric component values of a patch function with local coefficients.
fn eval_components(basis: &PatchBasis, c: &[f64], xi: [f64; 3]) -> Vector3<f64> {
    let mut out = Vector3::zeros();
    for (k, comp) in basis.comps.iter().enumerate() {
        let b: Vec<_> = (0..3).map(|d| comp.knots[d].eval(xi[d], 0).unwrap()).collect();
        for (z, bz) in b[2].values[0].iter().enumerate() {
            for (y, by) in b[1].values[0].iter().enumerate() {
                for (x, bx) in b[0].values[0].iter().enumerate() {
                    out[k] += c[comp.index([b[0].first + x, b[1].first + y, b[2].first + z])] * bx * by * bz;
                }
            }
        }
    }
    out
}

/// Physical field `DF^{-T} u_hat` of a patch function.
fn physical_field(
    geom: &MultipatchGeometry,
    patch: usize,
    basis: &PatchBasis,
    c: &[f64],
    xi: [f64; 3],
) -> Vector3<f64> {
    let jac = geom.patch(patch).eval(xi).jac;
    jac.try_inverse().unwrap().transpose() * eval_components(basis, c, xi)
}

fn local_coefficients(space: &SubdomainSpace, pos: usize, global: &[f64]) -> Vec<f64> {
    space
        .patch_targets(pos)
        .iter()
        .map(|t| match *t {
            DofTarget::Free { index, sign } => sign * global[index],
            DofTarget::Eliminated => 0.0,
        })
        .collect()
}

/// Lowest-order edge functions on the unit cube, written out by hand:
/// component `c` is constant along `c` and bilinear in the other two.
fn edge_function(c: usize, idx: [usize; 3], x: [f64; 3]) -> (f64, [f64; 3]) {
    let f = |d: usize| {
        if d == c {
            1.0
        } else if idx[d] == 0 {
            1.0 - x[d]
        } else {
            x[d]
        }
    };
    let df = |d: usize| {
        if d == c {
            0.0
        } else if idx[d] == 0 {
            -1.0
        } else {
            1.0
        }
    };
    let v = f(0) * f(1) * f(2);
    let g = [df(0) * f(1) * f(2), f(0) * df(1) * f(2), f(0) * f(1) * df(2)];
    (v, g)
}

#[test]
fn lowest_order_matrices_match_hand_integration() {
    let g = unit_cube();
    let k = patch_knot_vectors(&g, &[Discretization::new(1, 0, [1, 1, 1])]).unwrap();
    let space = SubdomainSpace::unconstrained(&g, 0, &k, Form::HCurl).unwrap();
    let vm = assemble_volume(&g, &space).unwrap();
    let basis = space.basis(0);
    assert_eq!(basis.len, 12);

    // Simpson's rule is exact for the biquadratic integrands.
    let sx = [0.0, 0.5, 1.0];
    let sw = [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0];
    let n = basis.len;
    let mut mass = DMatrix::<f64>::zeros(n, n);
    let mut stiff = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (ci, ii) = basis.split(i);
            let (cj, ij) = basis.split(j);
            for a in 0..3 {
                for b in 0..3 {
                    for c in 0..3 {
                        let x = [sx[a], sx[b], sx[c]];
                        let w = sw[a] * sw[b] * sw[c];
                        let (vi, gi) = edge_function(ci, ii, x);
                        let (vj, gj) = edge_function(cj, ij, x);
                        let curl = |cc: usize, g: [f64; 3]| match cc {
                            0 => Vector3::new(0.0, g[2], -g[1]),
                            1 => Vector3::new(-g[2], 0.0, g[0]),
                            _ => Vector3::new(g[1], -g[0], 0.0),
                        };
                        if ci == cj {
                            mass[(i, j)] += w * vi * vj;
                        }
                        stiff[(i, j)] += w * curl(ci, gi).dot(&curl(cj, gj));
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let (DofTarget::Free { index: gi, sign: si }, DofTarget::Free { index: gj, sign: sj }) =
                (space.target(0, i), space.target(0, j))
            else {
                panic!("unconstrained space eliminated a function");
            };
            assert!((vm.mass.get(gi, gj) - si * sj * mass[(i, j)]).abs() < 1e-13);
            assert!((vm.stiffness.get(gi, gj) - si * sj * stiff[(i, j)]).abs() < 1e-13);
        }
    }
    // A few entries by hand: (1-y)(1-z) e_x has mass 1/9 and curl energy 2/3.
    assert!((mass[(0, 0)] - 1.0 / 9.0).abs() < 1e-15);
    assert!((mass[(0, 1)] - 1.0 / 18.0).abs() < 1e-15);
    assert!((stiff[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn constant_field_has_unit_norm_and_no_curl() {
    let g = unit_cube();
    let k = patch_knot_vectors(&g, &[Discretization::new(2, 1, [2, 3, 2])]).unwrap();
    let space = SubdomainSpace::unconstrained(&g, 0, &k, Form::HCurl).unwrap();
    let vm = assemble_volume(&g, &space).unwrap();
    for dir in 0..3 {
        let basis = space.basis(0);
        let mut x = vec![0.0; space.n_dofs()];
        for l in 0..basis.len {
            if basis.split(l).0 == dir {
                if let DofTarget::Free { index, sign } = space.target(0, l) {
                    x[index] = sign;
                }
            }
        }
        assert!((quad_form(&vm.mass, &x) - 1.0).abs() < 1e-13);
        assert!(quad_form(&vm.stiffness, &x).abs() < 1e-13);
    }
}

#[test]
fn gradients_lie_in_the_curl_kernel_on_curved_patches() {
    let g = pillbox(1.0, 2.0).unwrap();
    let discs = vec![Discretization::new(2, 1, [1, 1, 1]); g.n_subdomains()];
    let prob = SaddleProblem::build(&g, &discs, CouplingMethod::Glue).unwrap();
    assert!(prob.stiffness.asymmetry() < 1e-12);
    assert!(prob.mass.asymmetry() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let scale = prob.stiffness.norm_frobenius();
    for _ in 0..5 {
        let c = random_vec(&mut rng, prob.gradients.ncols());
        let u = prob.gradients.apply(&c);
        let au = prob.stiffness.apply(&u);
        assert!(norm(&au) <= 1e-11 * scale * norm(&u), "{}", norm(&au) / (scale * norm(&u)));
        let x = random_vec(&mut rng, prob.n_dofs());
        assert!(quad_form(&prob.mass, &x) > 0.0);
        assert!(quad_form(&prob.stiffness, &x) >= -1e-12 * scale * norm(&x).powi(2));
    }
}

/// Coefficients in the broken space of a random function that is glued
/// across the coupling interface.
fn conforming_vector(prob: &SaddleProblem, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let merged = prob.geometry.merged().unwrap();
    let glued = SubdomainSpace::new(&merged, 0, &prob.knots, Form::HCurl).unwrap();
    let x = random_vec(rng, glued.n_dofs());
    let mut y = vec![0.0; prob.n_dofs()];
    for (s, sub) in prob.s1.spaces().iter().enumerate() {
        for (pos, &patch) in sub.patches().iter().enumerate() {
            let local = local_coefficients(&glued, glued.position(patch).unwrap(), &x);
            for (l, t) in sub.patch_targets(pos).iter().enumerate() {
                if let DofTarget::Free { index, sign } = *t {
                    y[prob.s1.offset(s) + index] = sign * local[l];
                }
            }
        }
    }
    y
}

#[test]
fn glued_functions_have_no_jump_on_matching_grids() {
    let g = cube_two_patches();
    let discs = vec![Discretization::new(2, 1, [2, 2, 1]); 2];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for method in [CouplingMethod::Mortar { q: 1 }, CouplingMethod::Ssc { modes: 6 }] {
        let prob = SaddleProblem::build(&g, &discs, method).unwrap();
        let b = &prob.coupling;
        let n_slave = prob.s1.space(0).n_dofs();
        for _ in 0..3 {
            let y = conforming_vector(&prob, &mut rng);
            let by = b.apply(&y);
            assert!(norm(&by) <= 1e-12 * b.norm_frobenius() * norm(&y), "{method:?}: {}", norm(&by));
            // Both sides contribute; the master block carries the opposite sign.
            let mut ys = y.clone();
            ys[n_slave..].iter_mut().for_each(|v| *v = 0.0);
            assert!(norm(&b.apply(&ys)) > 1e-3 * norm(&y));
        }
    }
}

#[test]
fn mortar_block_matches_direct_quadrature() {
    let g = cube_two_patches();
    let discs = [Discretization::new(3, 2, [3, 3, 2]), Discretization::new(2, 0, [4, 4, 2])];
    let prob = SaddleProblem::build(&g, &discs, CouplingMethod::Mortar { q: 2 }).unwrap();
    let mult = MultiplierSpace::new(&g.couplings()[0], &prob.knots, 2).unwrap();
    assert_eq!(prob.n_multipliers(), mult.n_dofs());
    let fm = &mult.faces()[0];
    let star = fm.complex.s1_star();
    let face = FaceRef::new(0, Side::new(2, 1));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // Every breakpoint of both meshes is a multiple of 1/12.
    let rule = GaussRule::new(6);
    for _ in 0..20 {
        let v = random_vec(&mut rng, prob.n_dofs());
        let mu = random_vec(&mut rng, mult.n_dofs());
        let via_b: f64 = prob.coupling.apply(&v).iter().zip(&mu).map(|(a, b)| a * b).sum();
        let cs = local_coefficients(prob.s1.space(0), 0, &v[..prob.s1.offset(1)]);
        let cm = local_coefficients(prob.s1.space(1), 0, &v[prob.s1.offset(1)..]);
        let mut direct = 0.0;
        for i in 0..12 {
            let (pu, wu) = rule.mapped(i as f64 / 12.0, (i + 1) as f64 / 12.0);
            for j in 0..12 {
                let (pv, wv) = rule.mapped(j as f64 / 12.0, (j + 1) as f64 / 12.0);
                for (a, &u) in pu.iter().enumerate() {
                    for (b, &w) in pv.iter().enumerate() {
                        let vs = physical_field(&g, 0, prob.s1.space(0).basis(0), &cs, [u, w, 1.0]);
                        let vm = physical_field(&g, 1, prob.s1.space(1).basis(0), &cm, [u, w, 0.0]);
                        let mut mu_hat = Vector2::zeros();
                        for (t, comp) in star.iter().enumerate() {
                            let bu = comp.knots[0].eval(u, 0).unwrap();
                            let bw = comp.knots[1].eval(w, 0).unwrap();
                            for (y, vy) in bw.values[0].iter().enumerate() {
                                for (x, vx) in bu.values[0].iter().enumerate() {
                                    mu_hat[t] += mu[comp.index(bu.first + x, bw.first + y)] * vx * vy;
                                }
                            }
                        }
                        // mu = J mu_hat / |J| and dS = |J| du dv.
                        let jac = g.eval_face(face, u, w).jac;
                        direct += wu[a] * wv[b] * (vs - vm).dot(&(jac * mu_hat));
                    }
                }
            }
        }
        assert!((via_b - direct).abs() <= 1e-11 * direct.abs().max(1e-3), "{via_b} vs {direct}");
    }
}

#[test]
fn modal_rows_are_orthonormal_on_the_trace_space() {
    let g = cube_two_patches();
    let discs = [Discretization::new(3, 2, [4, 4, 2]), Discretization::new(2, 1, [3, 3, 2])];
    let n_modes = 4;
    let prob = SaddleProblem::build(&g, &discs, CouplingMethod::Ssc { modes: n_modes }).unwrap();
    let slave = prob.s1.space(0);
    let bs = prob.coupling.select_columns(&(0..slave.n_dofs()).collect::<Vec<_>>());
    let cols = bs.nonzero_columns(0.0);
    let bs = bs.select_columns(&cols).to_dense();
    // L2 mass of the tangential traces of the involved slave functions.
    let face = FaceRef::new(0, Side::new(2, 1));
    let rule = GaussRule::new(5);
    let mut values: Vec<Vec<Vector3<f64>>> = vec![Vec::new(); cols.len()];
    let mut weights = Vec::new();
    for i in 0..4 {
        let (pu, wu) = rule.mapped(i as f64 / 4.0, (i + 1) as f64 / 4.0);
        for j in 0..4 {
            let (pv, wv) = rule.mapped(j as f64 / 4.0, (j + 1) as f64 / 4.0);
            for (a, &u) in pu.iter().enumerate() {
                for (b, &w) in pv.iter().enumerate() {
                    weights.push(wu[a] * wv[b] * g.eval_face(face, u, w).area);
                    for (k, &c) in cols.iter().enumerate() {
                        let mut e = vec![0.0; slave.n_dofs()];
                        e[c] = 1.0;
                        let coef = local_coefficients(slave, 0, &e);
                        let f = physical_field(&g, 0, slave.basis(0), &coef, [u, w, 1.0]);
                        values[k].push(Vector3::new(f[0], f[1], 0.0));
                    }
                }
            }
        }
    }
    let n = cols.len();
    let mut t = DMatrix::<f64>::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            t[(a, b)] = weights.iter().enumerate().map(|(q, w)| w * values[a][q].dot(&values[b][q])).sum();
        }
    }
    let chol = t.cholesky().expect("trace mass is positive definite");
    let gram = &bs * chol.solve(&bs.transpose());
    let err = (gram - DMatrix::<f64>::identity(n_modes, n_modes)).abs().max();
    assert!(err < 1e-4, "Gram deviates from identity by {err}");
}

#[test]
fn multiplier_norms_scale_with_mesh_size() {
    let g = cube_two_patches();
    let discs = [Discretization::new(3, 2, [3, 3, 2]), Discretization::new(2, 0, [4, 4, 2])];
    let k = patch_knot_vectors(&g, &discs).unwrap();
    for q in [1, 2] {
        let mult = MultiplierSpace::new(&g.couplings()[0], &k, q).unwrap();
        let n1 = mortar_multiplier_norm(&g, &mult, 0.5).unwrap();
        let n2 = mortar_multiplier_norm(&g, &mult, 0.25).unwrap();
        assert_eq!(n1.add(0.5, &n2, -1.0).max_abs(), 0.0);
        assert!(n1.asymmetry() < 1e-13);
        assert!(n1.to_dense().cholesky().is_some());
    }
    let modes = rect_modes(1.0, 1.0, 10).unwrap();
    let a = ssc_multiplier_norm(&modes, 0.5).to_dense();
    let b = ssc_multiplier_norm(&modes, 0.25).to_dense();
    assert_eq!(&a * 0.5, b);
    assert!(a.diagonal().iter().all(|&d| d > 0.0));
}

#[test]
fn broken_hcurl_norm_is_positive_definite() {
    let g = cube_two_patches();
    let discs = [Discretization::new(2, 1, [2, 2, 1]), Discretization::new(2, 0, [3, 3, 1])];
    let prob = SaddleProblem::build(&g, &discs, CouplingMethod::Mortar { q: 1 }).unwrap();
    let nv = prob.hcurl_norm().to_dense();
    assert!(nv.clone().cholesky().is_some());
    assert!(prob.multiplier_norm.to_dense().cholesky().is_some());
    let x = DVector::from_element(nv.nrows(), 1.0);
    assert!(x.dot(&(&nv * &x)) > 0.0);
}
