use super::{face_traces, merge_breaks, side_sign, AssemblyError};
use crate::geometry::{AffineMap2, CouplingInterface, FaceRef, MultipatchGeometry};
use crate::quadrature::GaussRule;
use crate::spaces::{FaceMultiplier, MultiplierSpace, ProductSpace, SurfaceComponent};
use crate::sparse::{CsrMatrix, Triplets};
use nalgebra::{Matrix2, Vector2};

/// Values of the active functions of a surface component at `(u, v)`:
/// `(local index, value)`.
fn component_values(c: &SurfaceComponent, u: f64, v: f64, out: &mut Vec<(usize, f64)>) {
    let bu = c.knots[0].eval(u, 0).expect("face parameter in range");
    let bv = c.knots[1].eval(v, 0).expect("face parameter in range");
    for (j, &yv) in bv.values[0].iter().enumerate() {
        for (i, &xv) in bu.values[0].iter().enumerate() {
            out.push((c.index(bu.first + i, bv.first + j), xv * yv));
        }
    }
}

/// Multiplier functions active at `(u, v)`: `(global row, mu_hat)`.
fn multiplier_values(fm: &FaceMultiplier, u: f64, v: f64) -> Vec<(usize, [f64; 2])> {
    let mut out = Vec::new();
    let mut tmp = Vec::new();
    for (t, comp) in fm.complex.s1_star().iter().enumerate() {
        tmp.clear();
        component_values(comp, u, v, &mut tmp);
        for &(l, val) in &tmp {
            let mut mu = [0.0; 2];
            mu[t] = val;
            out.push((fm.offset + l, mu));
        }
    }
    out
}

/// Breakpoints of the master face in direction `tm`, pulled back to slave
/// parameters through `inv`, together with the slave direction they cut.
fn pulled_back(inv: &AffineMap2, tm: usize, breaks: &[f64]) -> Result<(usize, Vec<f64>), AssemblyError> {
    let tol = 1e-14;
    let s = match (inv.a[0][tm].abs() > tol, inv.a[1][tm].abs() > tol) {
        (true, false) => 0,
        (false, true) => 1,
        _ => return Err(AssemblyError::NonAffineInterface),
    };
    if inv.a[s][1 - tm].abs() > tol {
        return Err(AssemblyError::NonAffineInterface);
    }
    Ok((s, breaks.iter().map(|&c| inv.a[s][tm] * c + inv.b[s]).collect()))
}

/// Mortar coupling `b(v, mu) = (v_slave - v_master, mu)_Γ` with rows indexed
/// by the multiplier space and columns by the broken curl-conforming space.
/// Integrals run over the intersection of both meshes, with
/// `ceil((p_s + p_m) / 2) + q + 1` Gauss points per direction per cell.
pub fn assemble_mortar_coupling(
    geom: &MultipatchGeometry,
    interface: &CouplingInterface,
    space: &ProductSpace,
    mult: &MultiplierSpace,
) -> Result<CsrMatrix, AssemblyError> {
    let ss = space.space(interface.slave);
    let sm = space.space(interface.master);
    let (off_s, off_m) = (space.offset(interface.slave), space.offset(interface.master));
    let mut t = Triplets::new(mult.n_dofs(), space.n_dofs());
    for piece in &interface.pieces {
        let fs: FaceRef = interface.slave_faces[piece.slave_face];
        let fmr: FaceRef = interface.master_faces[piece.master_face];
        let fm = &mult.faces()[piece.slave_face];
        let tr_s = face_traces(ss, fs)?;
        let tr_m = face_traces(sm, fmr)?;
        let bs = ss.basis(tr_s.pos);
        let bm = sm.basis(tr_m.pos);
        let kn_s = bs.base_knots();
        let kn_m = bm.base_knots();
        let (ks, ls) = fs.side.tangential();
        let (km, lm) = fmr.side.tangential();
        let normal = geom.eval_face(fs, 0.5, 0.5).normal;
        let sign_s = side_sign(geom, fs, &normal);
        let sign_m = side_sign(geom, fmr, &normal);

        let rect = piece.slave_rect;
        let inside = |s: usize, x: f64| x > rect[s][0] + 1e-12 && x < rect[s][1] - 1e-12;
        let mut lines = [vec![rect[0][0], rect[0][1]], vec![rect[1][0], rect[1][1]]];
        lines[0].extend(kn_s[ks].breakpoints().into_iter().filter(|&x| inside(0, x)));
        lines[1].extend(kn_s[ls].breakpoints().into_iter().filter(|&x| inside(1, x)));
        let inv = piece.map.inverse();
        for (tm, dir) in [(0, km), (1, lm)] {
            let (s, pulled) = pulled_back(&inv, tm, &kn_m[dir].breakpoints())?;
            lines[s].extend(pulled.into_iter().filter(|&x| inside(s, x)));
        }
        let lines = [merge_breaks(lines[0].clone()), merge_breaks(lines[1].clone())];

        let ps = kn_s[ks].degree().max(kn_s[ls].degree());
        let pm = kn_m[km].degree().max(kn_m[lm].degree());
        let rule = GaussRule::new((ps + pm).div_ceil(2) + mult.q() + 1);
        let mpatch = geom.patch(fmr.patch);

        let mut local: Vec<(usize, usize, f64)> = Vec::new();
        let mut act_s = Vec::new();
        let mut act_m = Vec::new();
        for cu in lines[0].windows(2) {
            let (pu, wu) = rule.mapped(cu[0], cu[1]);
            for cv in lines[1].windows(2) {
                let (pv, wv) = rule.mapped(cv[0], cv[1]);
                local.clear();
                for (a, &u) in pu.iter().enumerate() {
                    for (b, &v) in pv.iter().enumerate() {
                        let w = wu[a] * wv[b];
                        let mus = multiplier_values(fm, u, v);
                        // Slave side: the parametric tangential trace pairs
                        // directly with mu_hat.
                        tr_s.active(bs, fs, u, v, &mut act_s);
                        // Master side: pull the physical trace back with the
                        // slave face Jacobian.
                        let (um, vm) = piece.map.apply(u, v);
                        let xm = fmr.side.volume_param(um, vm);
                        let js = geom.eval_face(fs, u, v).jac;
                        let dfm = mpatch.eval(xm).jac;
                        let kinv =
                            dfm.try_inverse().ok_or(AssemblyError::Jacobian { patch: fmr.patch, det: 0.0, at: xm })?;
                        let proj = js.transpose() * kinv.transpose();
                        tr_m.active(bm, fmr, um, vm, &mut act_m);
                        for &(row, mu) in &mus {
                            for &(i, val) in &act_s {
                                let f = &tr_s.funcs[i];
                                let x = w * val * if f.comp == ks { mu[0] } else { mu[1] };
                                local.push((row, off_s + f.global, sign_s * f.sign * x));
                            }
                            for &(i, val) in &act_m {
                                let f = &tr_m.funcs[i];
                                let c = proj.column(f.comp);
                                let x = w * val * (c[0] * mu[0] + c[1] * mu[1]);
                                local.push((row, off_m + f.global, sign_m * f.sign * x));
                            }
                        }
                    }
                }
                for &(r, c, v) in &local {
                    t.push(r, c, v);
                }
            }
        }
    }
    Ok(t.to_csr())
}

/// Mesh-dependent proxy of the `H^{-1/2}(div)` norm on the multiplier
/// space: `h (mass of S^1*_q + D^T mass of S^2_q D)` with `D` the broken
/// surface divergence and `h` the slave mesh size on the interface.
pub fn mortar_multiplier_norm(
    geom: &MultipatchGeometry,
    mult: &MultiplierSpace,
    h: f64,
) -> Result<CsrMatrix, AssemblyError> {
    let mut m1 = Triplets::new(mult.n_dofs(), mult.n_dofs());
    let mut m2 = Triplets::new(mult.n_s2(), mult.n_s2());
    for fm in mult.faces() {
        let q = fm.complex.degree();
        let rule = GaussRule::new(q + 3);
        let s2 = fm.complex.s2();
        let bu = fm.complex.knots()[0].breakpoints();
        let bv = fm.complex.knots()[1].breakpoints();
        let mut tmp = Vec::new();
        for eu in bu.windows(2) {
            let (pu, wu) = rule.mapped(eu[0], eu[1]);
            for ev in bv.windows(2) {
                let (pv, wv) = rule.mapped(ev[0], ev[1]);
                for (a, &u) in pu.iter().enumerate() {
                    for (b, &v) in pv.iter().enumerate() {
                        let w = wu[a] * wv[b];
                        let fe = geom.eval_face(fm.face, u, v);
                        let j = fe.jac;
                        let g: Matrix2<f64> = j.transpose() * j / fe.area;
                        let mus = multiplier_values(fm, u, v);
                        for &(r, mr) in &mus {
                            let gm = g * Vector2::new(mr[0], mr[1]);
                            for &(c, mc) in &mus {
                                m1.push(r, c, w * (gm[0] * mc[0] + gm[1] * mc[1]));
                            }
                        }
                        tmp.clear();
                        component_values(&s2, u, v, &mut tmp);
                        for &(r, vr) in &tmp {
                            for &(c, vc) in &tmp {
                                m2.push(fm.offset_s2 + r, fm.offset_s2 + c, w * vr * vc / fe.area);
                            }
                        }
                    }
                }
            }
        }
    }
    let d = mult.div_matrix();
    let m2 = m2.to_csr();
    let dt = d.transpose();
    let div_part = dt.matmul(&m2).matmul(&d);
    Ok(m1.to_csr().add(h, &div_part, h))
}
