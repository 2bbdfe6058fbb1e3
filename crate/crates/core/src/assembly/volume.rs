use super::{derived_span, tabulate, volume_points, AssemblyError};
use crate::geometry::MultipatchGeometry;
use crate::quadrature::GaussRule;
use crate::spaces::{DofTarget, Form, SubdomainSpace};
use crate::sparse::{CsrAssembler, CsrMatrix};
use nalgebra::{DMatrix, Vector3};

/// Curl-curl stiffness and mass of one subdomain space.
#[derive(Debug, Clone)]
pub struct VolumeMatrices {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
}

/// One local function of an element: component, multi-index and target.
struct ElementFunction {
    comp: usize,
    idx: [usize; 3],
    global: usize,
    sign: f64,
}

/// Elements of a patch as triples of base knot spans.
fn patch_elements(spans: &[Vec<usize>; 3]) -> impl Iterator<Item = [usize; 3]> + '_ {
    spans[2]
        .iter()
        .flat_map(move |&s2| spans[1].iter().flat_map(move |&s1| spans[0].iter().map(move |&s0| [s0, s1, s2])))
}

fn element_functions(space: &SubdomainSpace, pos: usize, span: [usize; 3], p: [usize; 3]) -> Vec<ElementFunction> {
    let basis = space.basis(pos);
    let targets = space.patch_targets(pos);
    let mut out = Vec::new();
    for (c, comp) in basis.comps.iter().enumerate() {
        let count = |d: usize| if Some(d) == basis.direction(c) { p[d] } else { p[d] + 1 };
        let first: [usize; 3] = std::array::from_fn(|d| span[d] - p[d]);
        for k in 0..count(2) {
            for j in 0..count(1) {
                for i in 0..count(0) {
                    let idx = [first[0] + i, first[1] + j, first[2] + k];
                    if let DofTarget::Free { index, sign } = targets[comp.index(idx)] {
                        out.push(ElementFunction { comp: c, idx, global: index, sign });
                    }
                }
            }
        }
    }
    out
}

/// Assembles stiffness `(curl u, curl v)` and mass `(u, v)` on a
/// curl-conforming subdomain space.
pub fn assemble_volume(geom: &MultipatchGeometry, space: &SubdomainSpace) -> Result<VolumeMatrices, AssemblyError> {
    if space.form() != Form::HCurl {
        return Err(AssemblyError::Invalid("volume matrices need a curl-conforming space".into()));
    }
    let n = space.n_dofs();
    let per_patch: Vec<_> = (0..space.patches().len())
        .map(|pos| {
            let base = space.basis(pos).base_knots();
            let spans: [Vec<usize>; 3] = std::array::from_fn(|d| base[d].element_spans());
            (base, spans)
        })
        .collect();

    let mut connectivity = Vec::new();
    for (pos, (base, spans)) in per_patch.iter().enumerate() {
        let p = [base[0].degree(), base[1].degree(), base[2].degree()];
        for span in patch_elements(spans) {
            connectivity.push(element_functions(space, pos, span, p).iter().map(|f| f.global).collect::<Vec<_>>());
        }
    }
    let mut stiff = CsrAssembler::new(n, &connectivity);
    let mut mass = CsrAssembler::new(n, &connectivity);
    drop(connectivity);

    for (pos, (base, spans)) in per_patch.iter().enumerate() {
        let patch_id = space.patches()[pos];
        let patch = geom.patch(patch_id);
        let p = [base[0].degree(), base[1].degree(), base[2].degree()];
        let derived: Vec<_> =
            base.iter().map(|k| k.derived()).collect::<Result<_, _>>().map_err(crate::spaces::SpaceError::from)?;
        let rule = GaussRule::new(volume_points(*p.iter().max().unwrap(), patch));
        let nq1 = rule.len();
        let nq = nq1 * nq1 * nq1;
        for span in patch_elements(spans) {
            let funcs = element_functions(space, pos, span, p);
            if funcs.is_empty() {
                continue;
            }
            let mut pts = Vec::with_capacity(3);
            let mut wts = Vec::with_capacity(3);
            let mut tab_base = Vec::with_capacity(3);
            let mut tab_der = Vec::with_capacity(3);
            for d in 0..3 {
                let t = base[d].knots();
                let (x, w) = rule.mapped(t[span[d]], t[span[d] + 1]);
                tab_base.push(tabulate(&base[d], span[d], &x, 1));
                tab_der.push(tabulate(&derived[d], derived_span(span[d]), &x, 0));
                pts.push(x);
                wts.push(w);
            }
            let nf = funcs.len();
            let mut val = DMatrix::<f64>::zeros(nf, 3 * nq);
            let mut curl = DMatrix::<f64>::zeros(nf, 3 * nq);
            let mut q = 0;
            for c in 0..nq1 {
                for b in 0..nq1 {
                    for a in 0..nq1 {
                        let qi = [a, b, c];
                        let xi = [pts[0][a], pts[1][b], pts[2][c]];
                        let w = wts[0][a] * wts[1][b] * wts[2][c];
                        let map = patch.eval(xi);
                        let det = map.jac.determinant();
                        if !(det > 0.0) {
                            return Err(AssemblyError::Jacobian { patch: patch_id, det, at: xi });
                        }
                        let kinv = map.jac.try_inverse().expect("positive determinant").transpose();
                        let sw = (w * det).sqrt();
                        let cs = sw / det;
                        for (r, f) in funcs.iter().enumerate() {
                            // Value and gradient of the scalar factor of this function.
                            let mut v = [0.0; 3];
                            let mut dv = [0.0; 3];
                            for d in 0..3 {
                                if d == f.comp {
                                    let t = &tab_der[d][qi[d]];
                                    v[d] = t.values[0][f.idx[d] - t.first];
                                } else {
                                    let t = &tab_base[d][qi[d]];
                                    v[d] = t.values[0][f.idx[d] - t.first];
                                    dv[d] = t.values[1][f.idx[d] - t.first];
                                }
                            }
                            let s = v[0] * v[1] * v[2];
                            let g = [dv[0] * v[1] * v[2], v[0] * dv[1] * v[2], v[0] * v[1] * dv[2]];
                            let curl_hat = match f.comp {
                                0 => Vector3::new(0.0, g[2], -g[1]),
                                1 => Vector3::new(-g[2], 0.0, g[0]),
                                _ => Vector3::new(g[1], -g[0], 0.0),
                            };
                            let phys = kinv.column(f.comp) * (s * sw);
                            let pc = map.jac * curl_hat * cs;
                            for e in 0..3 {
                                val[(r, 3 * q + e)] = phys[e];
                                curl[(r, 3 * q + e)] = pc[e];
                            }
                        }
                        q += 1;
                    }
                }
            }
            let me = &val * val.transpose();
            let ae = &curl * curl.transpose();
            let dofs: Vec<usize> = funcs.iter().map(|f| f.global).collect();
            let signs: Vec<f64> = funcs.iter().map(|f| f.sign).collect();
            mass.add(&dofs, &signs, |i, j| me[(i, j)]);
            stiff.add(&dofs, &signs, |i, j| ae[(i, j)]);
        }
    }
    Ok(VolumeMatrices { stiffness: stiff.finish(), mass: mass.finish() })
}
