use super::{Form, PatchBasis, SpaceError};
use crate::geometry::MultipatchGeometry;
use crate::sparse::{CsrMatrix, Triplets};
use crate::splines::KnotVector;

const KNOT_TOL: f64 = 1e-12;

/// Where a patch-local function ends up in the glued space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DofTarget {
    /// Local coefficient equals `sign` times global coefficient `index`.
    Free { index: usize, sign: f64 },
    /// Removed by the essential boundary condition.
    Eliminated,
}

/// Union-find over local functions tracking the relative sign of every
/// member with respect to its root.
struct SignedUnion {
    parent: Vec<usize>,
    sign: Vec<f64>,
    dead: Vec<bool>,
}

impl SignedUnion {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), sign: vec![1.0; n], dead: vec![false; n] }
    }

    /// Root of `x` and the sign `s` with `u_x = s * u_root`.
    fn find(&mut self, x: usize) -> (usize, f64) {
        let p = self.parent[x];
        if p == x {
            return (x, 1.0);
        }
        let (r, s) = self.find(p);
        self.parent[x] = r;
        self.sign[x] *= s;
        (r, self.sign[x])
    }

    /// Imposes `u_x = s * u_y`; returns false on a sign conflict.
    fn union(&mut self, x: usize, y: usize, s: f64) -> bool {
        let (rx, sx) = self.find(x);
        let (ry, sy) = self.find(y);
        if rx == ry {
            return sx * sy == s;
        }
        let (keep, drop) = if rx < ry { (rx, ry) } else { (ry, rx) };
        self.parent[drop] = keep;
        // u_x = sx u_rx and u_y = sy u_ry, so u_rx = s sx sy u_ry.
        self.sign[drop] = s * sx * sy;
        self.dead[keep] |= self.dead[drop];
        true
    }
}

/// `S^0` or `S^1` on one subdomain: patch bases glued across conforming
/// interfaces, with the perfect conductor condition imposed on the
/// subdomain's boundary faces by elimination.
#[derive(Debug, Clone)]
pub struct SubdomainSpace {
    form: Form,
    subdomain: usize,
    patches: Vec<usize>,
    bases: Vec<PatchBasis>,
    offsets: Vec<usize>,
    targets: Vec<DofTarget>,
    /// One local function per global one: `(broken index, sign)`.
    representatives: Vec<(usize, f64)>,
}

impl SubdomainSpace {
    /// `knots[p]` are the degree-`p` knot vectors of patch `p` of `geom`.
    pub fn new(
        geom: &MultipatchGeometry,
        subdomain: usize,
        knots: &[[KnotVector; 3]],
        form: Form,
    ) -> Result<Self, SpaceError> {
        Self::build(geom, subdomain, knots, form, true)
    }

    /// Glued space without any boundary condition.
    pub fn unconstrained(
        geom: &MultipatchGeometry,
        subdomain: usize,
        knots: &[[KnotVector; 3]],
        form: Form,
    ) -> Result<Self, SpaceError> {
        Self::build(geom, subdomain, knots, form, false)
    }

    fn build(
        geom: &MultipatchGeometry,
        subdomain: usize,
        knots: &[[KnotVector; 3]],
        form: Form,
        essential: bool,
    ) -> Result<Self, SpaceError> {
        let patches = geom.patches_in(subdomain);
        let bases = patches.iter().map(|&p| PatchBasis::new(form, &knots[p])).collect::<Result<Vec<_>, _>>()?;
        let mut offsets = Vec::with_capacity(patches.len() + 1);
        offsets.push(0);
        for b in &bases {
            offsets.push(offsets.last().unwrap() + b.len);
        }
        let n_broken = *offsets.last().unwrap();
        let pos = |patch: usize| patches.iter().position(|&q| q == patch);
        let mut uf = SignedUnion::new(n_broken);
        let tol = 1e-9 * geom.diameter();

        for ci in geom.conforming() {
            let (Some(ia), Some(ib)) = (pos(ci.a.patch), pos(ci.b.patch)) else { continue };
            let (sa, sb) = (ci.a.side, ci.b.side);
            let ta = sa.tangential();
            let tb = sb.tangential();
            let ta = [ta.0, ta.1];
            let tb = [tb.0, tb.1];
            let o = ci.orientation;
            for t in 0..2 {
                let (t2, flip) = o.direction_map(t);
                let ka = &knots[ci.a.patch][ta[t]];
                let kb = &knots[ci.b.patch][tb[t2]];
                let kb = if flip { kb.reversed() } else { kb.clone() };
                if !ka.approx_eq(&kb, KNOT_TOL) {
                    return Err(SpaceError::NonConforming { a: ci.a.patch, b: ci.b.patch, dir: ta[t] });
                }
            }
            let (ba, bb) = (&bases[ia], &bases[ib]);
            let pa = geom.patch(ci.a.patch);
            let pb = geom.patch(ci.b.patch);
            for (c, comp) in ba.comps.iter().enumerate() {
                // Component and sign on the other side.
                let (cb, sign) = match ba.direction(c) {
                    None => (0, 1.0),
                    Some(d) if d == sa.dir => continue,
                    Some(d) => {
                        let t = if d == ta[0] { 0 } else { 1 };
                        let (t2, flip) = o.direction_map(t);
                        (tb[t2], if flip { -1.0 } else { 1.0 })
                    }
                };
                let compb = &bb.comps[cb];
                let fixed_a = if sa.end == 0 { 0 } else { comp.dims[sa.dir] - 1 };
                let fixed_b = if sb.end == 0 { 0 } else { compb.dims[sb.dir] - 1 };
                for j in 0..comp.dims[ta[1]] {
                    for i in 0..comp.dims[ta[0]] {
                        let mut ia_idx = [0; 3];
                        ia_idx[sa.dir] = fixed_a;
                        ia_idx[ta[0]] = i;
                        ia_idx[ta[1]] = j;
                        let mut ib_idx = [0; 3];
                        ib_idx[sb.dir] = fixed_b;
                        for (t, val) in [i, j].into_iter().enumerate() {
                            let (t2, flip) = o.direction_map(t);
                            let d = tb[t2];
                            ib_idx[d] = if flip { compb.dims[d] - 1 - val } else { val };
                        }
                        let la = comp.index(ia_idx);
                        let lb = compb.index(ib_idx);
                        let xa = pa.point(ba.greville(la));
                        let xb = pb.point(bb.greville(lb));
                        let gap = (xa - xb).norm();
                        if gap > tol {
                            return Err(SpaceError::GrevilleMismatch { a: ci.a.patch, b: ci.b.patch, gap });
                        }
                        if !uf.union(offsets[ia] + la, offsets[ib] + lb, sign) {
                            return Err(SpaceError::InconsistentSigns { patch: ci.a.patch });
                        }
                    }
                }
            }
        }

        for f in geom.boundary().iter().filter(|_| essential) {
            let Some(i) = pos(f.patch) else { continue };
            for l in bases[i].trace_dofs(f.side) {
                let (r, _) = uf.find(offsets[i] + l);
                uf.dead[r] = true;
            }
        }

        let mut number = vec![usize::MAX; n_broken];
        let mut targets = Vec::with_capacity(n_broken);
        let mut representatives = Vec::new();
        for g in 0..n_broken {
            let (r, s) = uf.find(g);
            if uf.dead[r] {
                targets.push(DofTarget::Eliminated);
                continue;
            }
            if number[r] == usize::MAX {
                number[r] = representatives.len();
                representatives.push((g, s));
            }
            targets.push(DofTarget::Free { index: number[r], sign: s });
        }
        Ok(Self { form, subdomain, patches, bases, offsets, targets, representatives })
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn subdomain(&self) -> usize {
        self.subdomain
    }

    /// Global patch indices, in the order used for local numbering.
    pub fn patches(&self) -> &[usize] {
        &self.patches
    }

    pub fn bases(&self) -> &[PatchBasis] {
        &self.bases
    }

    pub fn basis(&self, pos: usize) -> &PatchBasis {
        &self.bases[pos]
    }

    pub fn n_dofs(&self) -> usize {
        self.representatives.len()
    }

    /// Number of patch-local functions before gluing and elimination.
    pub fn n_broken(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn target(&self, pos: usize, local: usize) -> DofTarget {
        self.targets[self.offsets[pos] + local]
    }

    /// Targets of all local functions of patch position `pos`.
    pub fn patch_targets(&self, pos: usize) -> &[DofTarget] {
        &self.targets[self.offsets[pos]..self.offsets[pos + 1]]
    }

    /// Position of a global patch index in [`Self::patches`].
    pub fn position(&self, patch: usize) -> Option<usize> {
        self.patches.iter().position(|&p| p == patch)
    }

    /// Patch position, local index and sign of the function representing
    /// global degree of freedom `g`.
    pub fn representative(&self, g: usize) -> (usize, usize, f64) {
        let (b, s) = self.representatives[g];
        let pos = self.offsets.partition_point(|&o| o <= b) - 1;
        (pos, b - self.offsets[pos], s)
    }

    /// Broken-to-glued extension: local coefficients `= E * global`.
    pub fn extension(&self) -> CsrMatrix {
        let mut t = Triplets::with_capacity(self.n_broken(), self.n_dofs(), self.n_broken());
        for (b, tg) in self.targets.iter().enumerate() {
            if let DofTarget::Free { index, sign } = *tg {
                t.push(b, index, sign);
            }
        }
        t.to_csr()
    }
}

/// Independent spaces on every subdomain, concatenated.
#[derive(Debug, Clone)]
pub struct ProductSpace {
    spaces: Vec<SubdomainSpace>,
    offsets: Vec<usize>,
}

impl ProductSpace {
    pub fn new(geom: &MultipatchGeometry, knots: &[[KnotVector; 3]], form: Form) -> Result<Self, SpaceError> {
        let spaces = (0..geom.n_subdomains())
            .map(|s| SubdomainSpace::new(geom, s, knots, form))
            .collect::<Result<Vec<_>, _>>()?;
        let mut offsets = vec![0];
        for s in &spaces {
            offsets.push(offsets.last().unwrap() + s.n_dofs());
        }
        Ok(Self { spaces, offsets })
    }

    pub fn spaces(&self) -> &[SubdomainSpace] {
        &self.spaces
    }

    pub fn space(&self, subdomain: usize) -> &SubdomainSpace {
        &self.spaces[subdomain]
    }

    /// First global index of each subdomain block.
    pub fn offset(&self, subdomain: usize) -> usize {
        self.offsets[subdomain]
    }

    pub fn n_dofs(&self) -> usize {
        *self.offsets.last().unwrap()
    }
}

/// Rows of a sparse matrix as `(column, value)` lists.
type SparseRows = Vec<Vec<(usize, f64)>>;

/// Incidence matrix of the gradient from `s0` to `s1`, both built on the
/// same subdomain and knots.
pub fn gradient_matrix(s0: &SubdomainSpace, s1: &SubdomainSpace) -> Result<CsrMatrix, SpaceError> {
    if s0.form != Form::H1 || s1.form != Form::HCurl || s0.patches != s1.patches {
        return Err(SpaceError::Invalid("gradient needs S^0 and S^1 on the same patches".into()));
    }
    // Per patch position and direction: rows of the 1D derivative matrix.
    let drows: Vec<[SparseRows; 3]> = s0
        .bases
        .iter()
        .map(|b| {
            let k = &b.comps[0].knots;
            std::array::from_fn(|d| {
                let mut rows = vec![Vec::new(); k[d].n_basis() - 1];
                for (r, c, v) in k[d].derivative_entries() {
                    rows[r].push((c, v));
                }
                rows
            })
        })
        .collect();
    let mut t = Triplets::with_capacity(s1.n_dofs(), s0.n_dofs(), 2 * s1.n_dofs());
    for g in 0..s1.n_dofs() {
        let (pos, l, sign) = s1.representative(g);
        let (c, idx) = s1.bases[pos].split(l);
        let comp0 = &s0.bases[pos].comps[0];
        for &(j, v) in &drows[pos][c][idx[c]] {
            let mut i0 = idx;
            i0[c] = j;
            if let DofTarget::Free { index, sign: s } = s0.target(pos, comp0.index(i0)) {
                t.push(g, index, sign * s * v);
            }
        }
    }
    Ok(t.to_csr())
}
