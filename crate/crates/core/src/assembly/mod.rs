//! Quadrature and assembly of the curl-curl stiffness, the mass, the
//! interface couplings and the norm matrices of the inf-sup test.
//!
//! Physical fields are obtained from parametric ones by the covariant
//! push-forward `u = DF^{-T} u_hat`, so `curl u = DF curl_hat u_hat / det DF`.
//! Interface multipliers use the surface Piola map `mu = J mu_hat / |J|`.

mod mortar;
mod problem;
mod ssc;
mod volume;

pub use mortar::{assemble_mortar_coupling, mortar_multiplier_norm};
pub use problem::{CouplingMethod, InterfaceBlock, SaddleProblem};
pub use ssc::{assemble_ssc_coupling, ssc_multiplier_norm};
pub use volume::{assemble_volume, VolumeMatrices};

use crate::geometry::{FaceRef, GeometryError, MultipatchGeometry, NurbsPatch};
use crate::spaces::{DofTarget, PatchBasis, SpaceError, SubdomainSpace};
use crate::splines::{BasisValues, KnotVector};
use crate::waveguide_modes::ModeError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssemblyError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Modes(#[from] ModeError),
    #[error("patch {patch}: Jacobian determinant {det:e} is not positive at {at:?}")]
    Jacobian { patch: usize, det: f64, at: [f64; 3] },
    #[error("interface parametrizations are not related by an axis-aligned affine map")]
    NonAffineInterface,
    #[error("the modal coupling needs a planar interface")]
    NonPlanar,
    #[error("{0}")]
    Invalid(String),
}

/// Gauss points per direction for volume integrals: exact for affine
/// patches, one more point for curved or rational ones.
fn volume_points(degree: usize, patch: &NurbsPatch) -> usize {
    degree + 1 + usize::from(!is_affine(patch))
}

fn is_affine(patch: &NurbsPatch) -> bool {
    patch.knots().iter().all(|k| k.degree() <= 1) && patch.weights().iter().all(|&w| w == 1.0)
}

/// Values (and first derivatives when `nder = 1`) of the functions of `kv`
/// active on the element with span `span`, at every point of `pts`.
fn tabulate(kv: &KnotVector, span: usize, pts: &[f64], nder: usize) -> Vec<BasisValues> {
    pts.iter().map(|&x| kv.eval_in_span(span, x, nder)).collect()
}

/// Span of the derived knot vector matching span `span` of its parent.
fn derived_span(span: usize) -> usize {
    span - 1
}

/// Tangential trace functions of one face of a subdomain space that
/// survive the boundary condition.
struct FaceTraces {
    pos: usize,
    funcs: Vec<TraceFunction>,
    /// Local patch index to position in `funcs`, `usize::MAX` if absent.
    lookup: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct TraceFunction {
    comp: usize,
    global: usize,
    sign: f64,
}

fn face_traces(space: &SubdomainSpace, face: FaceRef) -> Result<FaceTraces, AssemblyError> {
    let pos = space
        .position(face.patch)
        .ok_or_else(|| AssemblyError::Invalid(format!("patch {} is not in the subdomain", face.patch)))?;
    let basis = space.basis(pos);
    let mut funcs = Vec::new();
    let mut lookup = vec![usize::MAX; basis.len];
    for l in basis.trace_dofs(face.side) {
        if let DofTarget::Free { index, sign } = space.target(pos, l) {
            lookup[l] = funcs.len();
            funcs.push(TraceFunction { comp: basis.split(l).0, global: index, sign });
        }
    }
    Ok(FaceTraces { pos, funcs, lookup })
}

impl FaceTraces {
    /// Trace functions nonzero at face parameters `(u, v)` with their
    /// parametric values: `(position in funcs, value)`.
    fn active(&self, basis: &PatchBasis, face: FaceRef, u: f64, v: f64, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let (k, l) = face.side.tangential();
        for (c, comp) in basis.comps.iter().enumerate() {
            if basis.direction(c) == Some(face.side.dir) {
                continue;
            }
            let bu = comp.knots[k].eval(u, 0).expect("face parameter in range");
            let bv = comp.knots[l].eval(v, 0).expect("face parameter in range");
            let mut idx = [0; 3];
            idx[face.side.dir] = if face.side.end == 0 { 0 } else { comp.dims[face.side.dir] - 1 };
            for (j, &yv) in bv.values[0].iter().enumerate() {
                for (i, &xv) in bu.values[0].iter().enumerate() {
                    idx[k] = bu.first + i;
                    idx[l] = bv.first + j;
                    let at = self.lookup[comp.index(idx)];
                    if at != usize::MAX && xv * yv != 0.0 {
                        out.push((at, xv * yv));
                    }
                }
            }
        }
    }
}

/// Largest diameter of the mesh elements on the given faces, measured
/// across element diagonals in physical space.
pub fn face_mesh_size(geom: &MultipatchGeometry, faces: &[FaceRef], knots: &[[KnotVector; 3]]) -> f64 {
    let mut h: f64 = 0.0;
    for &f in faces {
        let (k, l) = f.side.tangential();
        let bu = knots[f.patch][k].breakpoints();
        let bv = knots[f.patch][l].breakpoints();
        for eu in bu.windows(2) {
            for ev in bv.windows(2) {
                let x = |u: f64, v: f64| geom.eval_face(f, u, v).x;
                let d1 = (x(eu[0], ev[0]) - x(eu[1], ev[1])).norm();
                let d2 = (x(eu[1], ev[0]) - x(eu[0], ev[1])).norm();
                h = h.max(d1).max(d2);
            }
        }
    }
    h
}

/// Sign of a side in the jump across an interface: `+1` when the face's
/// outward normal agrees with the interface normal.
fn side_sign(geom: &MultipatchGeometry, face: FaceRef, normal: &nalgebra::Vector3<f64>) -> f64 {
    let n = geom.eval_face(face, 0.5, 0.5).normal;
    if n.dot(normal) > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Merges sorted breakpoint lists, dropping near-duplicates.
fn merge_breaks(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<f64> = Vec::with_capacity(v.len());
    for x in v {
        if out.last().is_none_or(|&y| x - y > 1e-12) {
            out.push(x);
        }
    }
    out
}
