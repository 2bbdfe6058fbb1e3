use super::{face_traces, side_sign, AssemblyError};
use crate::geometry::{CouplingInterface, FaceRef, MultipatchGeometry};
use crate::quadrature::GaussRule;
use crate::spaces::ProductSpace;
use crate::sparse::{CsrMatrix, Triplets};
use crate::waveguide_modes::{Family, WaveguideMode};
use nalgebra::DMatrix;

/// Gauss points per direction and element on one side: the spline degree
/// plus enough points to follow the fastest mode oscillation.
fn ssc_points(degree: usize, gamma_max: f64, diameter: f64) -> usize {
    degree + (gamma_max * diameter / std::f64::consts::PI).ceil() as usize + 2
}

/// Modal coupling `b(v, phi_k) = (v_slave - v_master, phi_k)_Γ` with one row
/// per mode. Each side is integrated on its own mesh; no intersection mesh
/// is needed.
pub fn assemble_ssc_coupling(
    geom: &MultipatchGeometry,
    interface: &CouplingInterface,
    space: &ProductSpace,
    modes: &[WaveguideMode],
) -> Result<CsrMatrix, AssemblyError> {
    let plane = interface.plane.as_ref().ok_or(AssemblyError::NonPlanar)?;
    let gamma_max = modes.iter().map(|m| m.gamma).fold(0.0, f64::max);
    let diameter = plane.diameter();
    let n = modes.len();
    let mut t = Triplets::new(n, space.n_dofs());
    let sides = [(interface.slave, &interface.slave_faces), (interface.master, &interface.master_faces)];
    for (subdomain, faces) in sides {
        let sub = space.space(subdomain);
        let offset = space.offset(subdomain);
        for &face in faces.iter() {
            let face: FaceRef = face;
            let sign = side_sign(geom, face, &plane.normal);
            let traces = face_traces(sub, face)?;
            let basis = sub.basis(traces.pos);
            let base = basis.base_knots();
            let (k, l) = face.side.tangential();
            let p = base[k].degree().max(base[l].degree());
            let rule = GaussRule::new(ssc_points(p, gamma_max, diameter));
            let patch = geom.patch(face.patch);
            // Dense accumulation per face: modes times trace functions.
            let mut block = DMatrix::<f64>::zeros(n, traces.funcs.len());
            let mut act = Vec::new();
            let mut phi = vec![nalgebra::Vector3::zeros(); n];
            let (bu, bv) = (base[k].breakpoints(), base[l].breakpoints());
            for eu in bu.windows(2) {
                let (pu, wu) = rule.mapped(eu[0], eu[1]);
                for ev in bv.windows(2) {
                    let (pv, wv) = rule.mapped(ev[0], ev[1]);
                    for (a, &u) in pu.iter().enumerate() {
                        for (b, &v) in pv.iter().enumerate() {
                            let fe = geom.eval_face(face, u, v);
                            let w = wu[a] * wv[b] * fe.area;
                            let xi = face.side.volume_param(u, v);
                            let jac = patch.eval(xi).jac;
                            let kinv = jac
                                .try_inverse()
                                .ok_or(AssemblyError::Jacobian { patch: face.patch, det: 0.0, at: xi })?
                                .transpose();
                            for (m, mode) in modes.iter().enumerate() {
                                phi[m] = mode.field_at(plane, &fe.x);
                            }
                            traces.active(basis, face, u, v, &mut act);
                            for &(i, val) in &act {
                                let dir = kinv.column(traces.funcs[i].comp);
                                for (m, ph) in phi.iter().enumerate() {
                                    block[(m, i)] += w * val * dir.dot(ph);
                                }
                            }
                        }
                    }
                }
            }
            for (i, f) in traces.funcs.iter().enumerate() {
                for m in 0..n {
                    let x = block[(m, i)];
                    if x != 0.0 {
                        t.push(m, offset + f.global, sign * f.sign * x);
                    }
                }
            }
        }
    }
    Ok(t.to_csr())
}

/// Mesh-dependent norm on the span of the modes, the modal analogue of the
/// mortar multiplier norm: `h (||phi||^2 + ||div phi||^2)`. Modes are
/// orthonormal and their divergences orthogonal, so the matrix is diagonal
/// with entries `h (1 + gamma^2)` for TM modes and `h` for TE modes.
pub fn ssc_multiplier_norm(modes: &[WaveguideMode], h: f64) -> CsrMatrix {
    let mut t = Triplets::new(modes.len(), modes.len());
    for (k, m) in modes.iter().enumerate() {
        let div = match m.family {
            Family::TM => m.gamma * m.gamma,
            Family::TE => 0.0,
        };
        t.push(k, k, h * (1.0 + div));
    }
    t.to_csr()
}
