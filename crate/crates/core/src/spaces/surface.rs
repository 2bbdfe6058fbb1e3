use super::SpaceError;
use crate::geometry::Side;
use crate::sparse::{CsrMatrix, Triplets};
use crate::splines::KnotVector;

/// One tensor-product component of a surface space.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceComponent {
    pub knots: [KnotVector; 2],
    pub dims: [usize; 2],
    pub offset: usize,
}

impl SurfaceComponent {
    fn new(knots: [KnotVector; 2], offset: usize) -> Self {
        let dims = [knots[0].n_basis(), knots[1].n_basis()];
        Self { knots, dims, offset }
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        self.offset + i + self.dims[0] * j
    }
}

/// The two-dimensional spline complexes on a face parameter square:
///
/// `S^0 --grad--> S^1 --curl--> S^2` and `S^0 --rot--> S^1* --div--> S^2`,
///
/// with `S^1 = S_{p-1,p} x S_{p,p-1}`, `S^1* = S_{p,p-1} x S_{p-1,p}` and
/// `S^2 = S_{p-1,p-1}`. Operators act on parametric coefficients; they
/// commute with the push-forwards, so no geometry is involved.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceComplex {
    knots: [KnotVector; 2],
    derived: [KnotVector; 2],
    d: [Vec<(usize, usize, f64)>; 2],
}

impl SurfaceComplex {
    pub fn new(ku: KnotVector, kv: KnotVector) -> Result<Self, SpaceError> {
        let derived = [ku.derived()?, kv.derived()?];
        let d = [ku.derivative_entries(), kv.derivative_entries()];
        Ok(Self { knots: [ku, kv], derived, d })
    }

    /// Complex on face `side` of a patch with volume knot vectors `knots`.
    pub fn on_face(knots: &[KnotVector; 3], side: Side) -> Result<Self, SpaceError> {
        let (k, l) = side.tangential();
        Self::new(knots[k].clone(), knots[l].clone())
    }

    pub fn knots(&self) -> &[KnotVector; 2] {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.knots[0].degree()
    }

    pub fn s0(&self) -> SurfaceComponent {
        SurfaceComponent::new(self.knots.clone(), 0)
    }

    /// Curl-conforming components: first derived in `u`, second in `v`.
    pub fn s1(&self) -> [SurfaceComponent; 2] {
        let a = SurfaceComponent::new([self.derived[0].clone(), self.knots[1].clone()], 0);
        let b = SurfaceComponent::new([self.knots[0].clone(), self.derived[1].clone()], a.len());
        [a, b]
    }

    /// Divergence-conforming components: first derived in `v`, second in `u`.
    pub fn s1_star(&self) -> [SurfaceComponent; 2] {
        let a = SurfaceComponent::new([self.knots[0].clone(), self.derived[1].clone()], 0);
        let b = SurfaceComponent::new([self.derived[0].clone(), self.knots[1].clone()], a.len());
        [a, b]
    }

    pub fn s2(&self) -> SurfaceComponent {
        SurfaceComponent::new(self.derived.clone(), 0)
    }

    pub fn dim_s0(&self) -> usize {
        self.s0().len()
    }

    pub fn dim_s1(&self) -> usize {
        self.s1().iter().map(|c| c.len()).sum()
    }

    pub fn dim_s2(&self) -> usize {
        self.s2().len()
    }

    /// Writes `scale * d/du` (dir 0) or `d/dv` (dir 1) of component `from`
    /// into component `to`, whose knots are derived in that direction.
    fn differentiate(&self, t: &mut Triplets, dir: usize, from: &SurfaceComponent, to: &SurfaceComponent, scale: f64) {
        let other = 1 - dir;
        for &(r, c, v) in &self.d[dir] {
            for s in 0..from.dims[other] {
                let (fi, ti) =
                    if dir == 0 { (from.index(c, s), to.index(r, s)) } else { (from.index(s, c), to.index(s, r)) };
                t.push(ti, fi, scale * v);
            }
        }
    }

    /// `grad: S^0 -> S^1`.
    pub fn grad(&self) -> CsrMatrix {
        let s0 = self.s0();
        let [a, b] = self.s1();
        let mut t = Triplets::new(a.len() + b.len(), s0.len());
        self.differentiate(&mut t, 0, &s0, &a, 1.0);
        self.differentiate(&mut t, 1, &s0, &b, 1.0);
        t.to_csr()
    }

    /// Scalar curl `du v_2 - dv v_1: S^1 -> S^2`.
    pub fn curl(&self) -> CsrMatrix {
        let [a, b] = self.s1();
        let s2 = self.s2();
        let mut t = Triplets::new(s2.len(), a.len() + b.len());
        self.differentiate(&mut t, 0, &b, &s2, 1.0);
        self.differentiate(&mut t, 1, &a, &s2, -1.0);
        t.to_csr()
    }

    /// Vector curl `(dv phi, -du phi): S^0 -> S^1*`.
    pub fn rot(&self) -> CsrMatrix {
        let s0 = self.s0();
        let [a, b] = self.s1_star();
        let mut t = Triplets::new(a.len() + b.len(), s0.len());
        self.differentiate(&mut t, 1, &s0, &a, 1.0);
        self.differentiate(&mut t, 0, &s0, &b, -1.0);
        t.to_csr()
    }

    /// `div: S^1* -> S^2`.
    pub fn div(&self) -> CsrMatrix {
        let [a, b] = self.s1_star();
        let s2 = self.s2();
        let mut t = Triplets::new(s2.len(), a.len() + b.len());
        self.differentiate(&mut t, 0, &a, &s2, 1.0);
        self.differentiate(&mut t, 1, &b, &s2, 1.0);
        t.to_csr()
    }

    /// Degrees of freedom of `S^0(Γ; ∂Γ)`: interior coefficients.
    pub fn s0_interior(&self) -> Vec<usize> {
        let s0 = self.s0();
        let mut out = Vec::new();
        for j in 1..s0.dims[1].saturating_sub(1) {
            for i in 1..s0.dims[0].saturating_sub(1) {
                out.push(s0.index(i, j));
            }
        }
        out
    }

    /// Degrees of freedom of `S^1(Γ; ∂Γ)`: no tangential trace on the edges.
    pub fn s1_interior(&self) -> Vec<usize> {
        let [a, b] = self.s1();
        let mut out = Vec::new();
        for j in 1..a.dims[1].saturating_sub(1) {
            for i in 0..a.dims[0] {
                out.push(a.index(i, j));
            }
        }
        for j in 0..b.dims[1] {
            for i in 1..b.dims[0].saturating_sub(1) {
                out.push(b.index(i, j));
            }
        }
        out.sort_unstable();
        out
    }

    /// `grad: S^0(Γ; ∂Γ) -> S^1(Γ; ∂Γ)`.
    pub fn grad_bc(&self) -> CsrMatrix {
        self.grad().select_rows(&self.s1_interior()).select_columns(&self.s0_interior())
    }

    /// `curl: S^1(Γ; ∂Γ) -> S^2`.
    pub fn curl_bc(&self) -> CsrMatrix {
        self.curl().select_columns(&self.s1_interior())
    }
}
