//! Multipatch NURBS geometry: patch maps, faces, interfaces and the built-in
//! benchmark domains.

mod export;
mod generators;
mod multipatch;

pub use export::write_geometry;
pub use generators::{cube_four_patches, cube_two_patches, pillbox, unit_cube, PILLBOX_CORE_FRACTION};
pub use multipatch::{
    AffineMap2, ConformingInterface, CouplingInterface, FaceOrientation, FaceRef, InterfacePlane, InterfaceShape,
    MortarPiece, MultipatchGeometry,
};

use crate::splines::{KnotVector, SplineError};
use nalgebra::{Matrix3, Matrix3x2, Vector3};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error("patch {patch}: {msg}")]
    InvalidPatch { patch: usize, msg: String },
    #[error("patch {patch}: Jacobian determinant {det:e} is not positive at {at:?}")]
    Jacobian { patch: usize, det: f64, at: [f64; 3] },
    #[error("faces {a:?} and {b:?} do not coincide (gap {gap:e})")]
    InterfaceMismatch { a: FaceRef, b: FaceRef, gap: f64 },
    #[error("interface is not planar: distance {0:e} from its plane")]
    NonPlanar(f64),
    #[error("{0}")]
    Invalid(String),
}

/// One of the six faces of the parametric cube: `xi[dir] = end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Side {
    pub dir: usize,
    pub end: usize,
}

impl Side {
    pub const ALL: [Side; 6] = [
        Side { dir: 0, end: 0 },
        Side { dir: 0, end: 1 },
        Side { dir: 1, end: 0 },
        Side { dir: 1, end: 1 },
        Side { dir: 2, end: 0 },
        Side { dir: 2, end: 1 },
    ];

    pub fn new(dir: usize, end: usize) -> Self {
        assert!(dir < 3 && end < 2);
        Self { dir, end }
    }

    /// The two surviving parametric directions, in increasing order.
    pub fn tangential(&self) -> (usize, usize) {
        match self.dir {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    /// Volume parameter of the face point `(u, v)`.
    pub fn volume_param(&self, u: f64, v: f64) -> [f64; 3] {
        let (k, l) = self.tangential();
        let mut xi = [0.0; 3];
        xi[self.dir] = self.end as f64;
        xi[k] = u;
        xi[l] = v;
        xi
    }

    /// Sign `s` with outward normal `s * (t_k x t_l) / |t_k x t_l|` for a
    /// positively oriented map.
    pub fn normal_sign(&self) -> f64 {
        let cyc = if self.dir == 1 { -1.0 } else { 1.0 };
        let e = if self.end == 1 { 1.0 } else { -1.0 };
        cyc * e
    }
}

/// Trivariate NURBS map from the parametric cube into physical space.
#[derive(Debug, Clone)]
pub struct NurbsPatch {
    knots: [KnotVector; 3],
    control: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

/// Point and Jacobian of a patch map.
#[derive(Debug, Clone, Copy)]
pub struct MapEval {
    pub x: Vector3<f64>,
    pub jac: Matrix3<f64>,
}

/// Point, tangent frame and outward unit normal on a face.
#[derive(Debug, Clone, Copy)]
pub struct FaceEval {
    pub x: Vector3<f64>,
    pub jac: Matrix3x2<f64>,
    pub normal: Vector3<f64>,
    /// Area element `sqrt(det(J^T J))`.
    pub area: f64,
}

impl NurbsPatch {
    /// Control points and weights are ordered lexicographically with the
    /// first direction running fastest.
    pub fn new(knots: [KnotVector; 3], control: Vec<[f64; 3]>, weights: Vec<f64>) -> Result<Self, GeometryError> {
        let n: usize = knots.iter().map(|k| k.n_basis()).product();
        if control.len() != n || weights.len() != n {
            return Err(GeometryError::InvalidPatch {
                patch: usize::MAX,
                msg: format!("expected {n} control points and weights, got {} and {}", control.len(), weights.len()),
            });
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(GeometryError::InvalidPatch { patch: usize::MAX, msg: "weights must be positive".into() });
        }
        Ok(Self { knots, control, weights })
    }

    /// Affine box `[x0, x1] x [y0, y1] x [z0, z1]` as a trilinear patch.
    pub fn axis_box(lo: [f64; 3], hi: [f64; 3]) -> Self {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).expect("linear knot vector");
        let mut control = Vec::with_capacity(8);
        for k in 0..2 {
            for j in 0..2 {
                for i in 0..2 {
                    let pick = |d: usize, s: usize| if s == 0 { lo[d] } else { hi[d] };
                    control.push([pick(0, i), pick(1, j), pick(2, k)]);
                }
            }
        }
        Self { knots: [kv.clone(), kv.clone(), kv], control, weights: vec![1.0; 8] }
    }

    pub fn knots(&self) -> &[KnotVector; 3] {
        &self.knots
    }

    pub fn control(&self) -> &[[f64; 3]] {
        &self.control
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Map and Jacobian at `xi`.
    pub fn eval(&self, xi: [f64; 3]) -> MapEval {
        let b: Vec<_> = (0..3).map(|d| self.knots[d].eval(xi[d].clamp(0.0, 1.0), 1).expect("clamped")).collect();
        let dims = [self.knots[0].n_basis(), self.knots[1].n_basis(), self.knots[2].n_basis()];
        let mut w = 0.0;
        let mut dw = [0.0; 3];
        let mut p = [0.0; 3];
        let mut dp = [[0.0; 3]; 3];
        for (c, bc) in b[2].values[0].iter().enumerate() {
            let kc = b[2].first + c;
            for (bb, bbv) in b[1].values[0].iter().enumerate() {
                let kb = b[1].first + bb;
                for (a, bav) in b[0].values[0].iter().enumerate() {
                    let ka = b[0].first + a;
                    let idx = ka + dims[0] * (kb + dims[1] * kc);
                    let wt = self.weights[idx];
                    let n = bav * bbv * bc * wt;
                    let dn = [
                        b[0].values[1][a] * bbv * bc * wt,
                        bav * b[1].values[1][bb] * bc * wt,
                        bav * bbv * b[2].values[1][c] * wt,
                    ];
                    let pt = &self.control[idx];
                    w += n;
                    for d in 0..3 {
                        dw[d] += dn[d];
                        p[d] += n * pt[d];
                        for e in 0..3 {
                            dp[d][e] += dn[e] * pt[d];
                        }
                    }
                }
            }
        }
        let x = Vector3::new(p[0] / w, p[1] / w, p[2] / w);
        let mut jac = Matrix3::zeros();
        for d in 0..3 {
            for e in 0..3 {
                jac[(d, e)] = (dp[d][e] - x[d] * dw[e]) / w;
            }
        }
        MapEval { x, jac }
    }

    pub fn point(&self, xi: [f64; 3]) -> Vector3<f64> {
        self.eval(xi).x
    }

    /// Face map at `(u, v)` with the outward unit normal.
    pub fn eval_face(&self, side: Side, u: f64, v: f64) -> FaceEval {
        let m = self.eval(side.volume_param(u, v));
        let (k, l) = side.tangential();
        let tk = m.jac.column(k).into_owned();
        let tl = m.jac.column(l).into_owned();
        let cross = tk.cross(&tl);
        let area = cross.norm();
        let sign = side.normal_sign() * m.jac.determinant().signum();
        let jac = Matrix3x2::from_columns(&[tk, tl]);
        FaceEval { x: m.x, jac, normal: cross * (sign / area), area }
    }

    /// Diagonal of the bounding box of the control net.
    pub fn diameter(&self) -> f64 {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.control {
            for d in 0..3 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (0..3).map(|d| (hi[d] - lo[d]).powi(2)).sum::<f64>().sqrt()
    }

    /// Smallest Jacobian determinant over a tensor grid of sample points.
    pub fn min_jacobian(&self, samples: usize) -> (f64, [f64; 3]) {
        let mut best = (f64::INFINITY, [0.0; 3]);
        let s = samples.max(2);
        for k in 0..s {
            for j in 0..s {
                for i in 0..s {
                    let xi = [i as f64 / (s - 1) as f64, j as f64 / (s - 1) as f64, k as f64 / (s - 1) as f64];
                    let d = self.eval(xi).jac.determinant();
                    if d < best.0 {
                        best = (d, xi);
                    }
                }
            }
        }
        best
    }

    /// Volume by composite Gauss quadrature; each knot span is split into
    /// `4` pieces since rational Jacobians are not polynomial.
    pub fn volume(&self) -> f64 {
        const SPLIT: usize = 4;
        let rules: Vec<_> = (0..3).map(|d| crate::quadrature::GaussRule::new(self.knots[d].degree() + 3)).collect();
        let cells: Vec<Vec<(f64, f64)>> = (0..3)
            .map(|d| {
                self.knots[d]
                    .breakpoints()
                    .windows(2)
                    .flat_map(|e| {
                        let h = (e[1] - e[0]) / SPLIT as f64;
                        (0..SPLIT).map(move |k| (e[0] + k as f64 * h, e[0] + (k + 1) as f64 * h))
                    })
                    .collect()
            })
            .collect();
        let mut vol = 0.0;
        for &(z0, z1) in &cells[2] {
            let (pz, wz) = rules[2].mapped(z0, z1);
            for &(y0, y1) in &cells[1] {
                let (py, wy) = rules[1].mapped(y0, y1);
                for &(x0, x1) in &cells[0] {
                    let (px, wx) = rules[0].mapped(x0, x1);
                    for c in 0..pz.len() {
                        for b in 0..py.len() {
                            for a in 0..px.len() {
                                let det = self.eval([px[a], py[b], pz[c]]).jac.determinant();
                                vol += wx[a] * wy[b] * wz[c] * det;
                            }
                        }
                    }
                }
            }
        }
        vol
    }
}
