use super::{FaceEval, GeometryError, NurbsPatch, Side};
use nalgebra::Vector3;

/// A face of a specific patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceRef {
    pub patch: usize,
    pub side: Side,
}

impl FaceRef {
    pub fn new(patch: usize, side: Side) -> Self {
        Self { patch, side }
    }
}

/// One of the eight symmetries of the unit square relating the face
/// parameters of two coinciding faces: optional swap, then optional flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FaceOrientation {
    pub swap: bool,
    pub flip_u: bool,
    pub flip_v: bool,
}

impl FaceOrientation {
    pub const IDENTITY: Self = Self { swap: false, flip_u: false, flip_v: false };

    pub fn all() -> impl Iterator<Item = Self> {
        (0..8).map(|k| Self { swap: k & 4 != 0, flip_u: k & 1 != 0, flip_v: k & 2 != 0 })
    }

    pub fn apply(&self, u: f64, v: f64) -> (f64, f64) {
        let (a, b) = if self.swap { (v, u) } else { (u, v) };
        (if self.flip_u { 1.0 - a } else { a }, if self.flip_v { 1.0 - b } else { b })
    }

    /// Target face direction of source direction `t` (0 for `u`, 1 for `v`)
    /// and whether it is traversed backwards.
    pub fn direction_map(&self, t: usize) -> (usize, bool) {
        let tb = if self.swap { 1 - t } else { t };
        (tb, if tb == 0 { self.flip_u } else { self.flip_v })
    }
}

/// Two faces of patches in the same subdomain that coincide pointwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConformingInterface {
    pub a: FaceRef,
    pub b: FaceRef,
    /// Maps face parameters of `a` to face parameters of `b`.
    pub orientation: FaceOrientation,
}

/// Affine map `s -> A s + b` between face parameter planes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap2 {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
}

impl AffineMap2 {
    pub const IDENTITY: Self = Self { a: [[1.0, 0.0], [0.0, 1.0]], b: [0.0, 0.0] };

    pub fn apply(&self, u: f64, v: f64) -> (f64, f64) {
        (self.a[0][0] * u + self.a[0][1] * v + self.b[0], self.a[1][0] * u + self.a[1][1] * v + self.b[1])
    }

    pub fn inverse(&self) -> Self {
        let [[a, b], [c, d]] = self.a;
        let det = a * d - b * c;
        let ai = [[d / det, -b / det], [-c / det, a / det]];
        let bi = [-(ai[0][0] * self.b[0] + ai[0][1] * self.b[1]), -(ai[1][0] * self.b[0] + ai[1][1] * self.b[1])];
        Self { a: ai, b: bi }
    }
}

/// Overlap of one slave face with one master face on a coupling interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MortarPiece {
    /// Index into `CouplingInterface::slave_faces`.
    pub slave_face: usize,
    /// Index into `CouplingInterface::master_faces`.
    pub master_face: usize,
    /// Slave face parameters to master face parameters.
    pub map: AffineMap2,
    /// Overlap region `[[u0, u1], [v0, v1]]` in slave face parameters.
    pub slave_rect: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterfaceShape {
    /// `[0, width] x [0, height]` in the plane frame.
    Rectangle { width: f64, height: f64 },
    /// Disc centred at the frame origin.
    Disc { radius: f64 },
}

/// Planar interface with an orthonormal frame; `normal = e1 x e2` points out
/// of the slave subdomain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePlane {
    pub origin: Vector3<f64>,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
    pub normal: Vector3<f64>,
    pub shape: InterfaceShape,
}

impl InterfacePlane {
    pub fn local(&self, x: &Vector3<f64>) -> (f64, f64) {
        let d = x - self.origin;
        (d.dot(&self.e1), d.dot(&self.e2))
    }

    pub fn distance(&self, x: &Vector3<f64>) -> f64 {
        (x - self.origin).dot(&self.normal).abs()
    }

    /// Diameter of the interface.
    pub fn diameter(&self) -> f64 {
        match self.shape {
            InterfaceShape::Rectangle { width, height } => width.hypot(height),
            InterfaceShape::Disc { radius } => 2.0 * radius,
        }
    }

    pub fn area(&self) -> f64 {
        match self.shape {
            InterfaceShape::Rectangle { width, height } => width * height,
            InterfaceShape::Disc { radius } => std::f64::consts::PI * radius * radius,
        }
    }
}

/// Interface between two subdomains coupled weakly.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingInterface {
    pub slave: usize,
    pub master: usize,
    pub slave_faces: Vec<FaceRef>,
    pub master_faces: Vec<FaceRef>,
    pub pieces: Vec<MortarPiece>,
    pub plane: Option<InterfacePlane>,
}

/// Patches grouped into subdomains, with their interfaces and the perfectly
/// conducting boundary made of all remaining faces.
#[derive(Debug, Clone)]
pub struct MultipatchGeometry {
    patches: Vec<NurbsPatch>,
    subdomain_of: Vec<usize>,
    n_subdomains: usize,
    conforming: Vec<ConformingInterface>,
    couplings: Vec<CouplingInterface>,
    boundary: Vec<FaceRef>,
    diameter: f64,
}

impl MultipatchGeometry {
    /// Validates the patches, detects conforming interfaces between patches of
    /// the same subdomain and checks the declared couplings.
    pub fn new(
        patches: Vec<NurbsPatch>,
        subdomain_of: Vec<usize>,
        couplings: Vec<CouplingInterface>,
    ) -> Result<Self, GeometryError> {
        if patches.len() != subdomain_of.len() || patches.is_empty() {
            return Err(GeometryError::Invalid("every patch needs exactly one subdomain".into()));
        }
        let n_subdomains = subdomain_of.iter().max().unwrap() + 1;
        for s in 0..n_subdomains {
            if !subdomain_of.contains(&s) {
                return Err(GeometryError::Invalid(format!("subdomain {s} has no patches")));
            }
        }
        for (i, p) in patches.iter().enumerate() {
            let (det, at) = p.min_jacobian(5);
            if !(det > 0.0) {
                return Err(GeometryError::Jacobian { patch: i, det, at });
            }
        }
        let diameter = bounding_diameter(&patches);
        let tol = 1e-10 * diameter;

        let mut coupled: Vec<FaceRef> = Vec::new();
        for c in &couplings {
            check_coupling(&patches, &subdomain_of, c, tol)?;
            coupled.extend(c.slave_faces.iter().chain(&c.master_faces));
        }

        let faces: Vec<FaceRef> = (0..patches.len())
            .flat_map(|p| Side::ALL.iter().map(move |&s| FaceRef::new(p, s)))
            .filter(|f| !coupled.contains(f))
            .collect();
        let mut conforming = Vec::new();
        let mut used = vec![false; faces.len()];
        for i in 0..faces.len() {
            if used[i] {
                continue;
            }
            for j in i + 1..faces.len() {
                let (fa, fb) = (faces[i], faces[j]);
                if used[j] || fa.patch == fb.patch || subdomain_of[fa.patch] != subdomain_of[fb.patch] {
                    continue;
                }
                if let Some(orientation) = detect_orientation(&patches, fa, fb, tol)? {
                    conforming.push(ConformingInterface { a: fa, b: fb, orientation });
                    used[i] = true;
                    used[j] = true;
                    break;
                }
            }
        }
        let boundary = faces.iter().zip(&used).filter(|(_, &u)| !u).map(|(f, _)| *f).collect();
        Ok(Self { patches, subdomain_of, n_subdomains, conforming, couplings, boundary, diameter })
    }

    /// Same patches as a single subdomain, with former couplings glued.
    pub fn merged(&self) -> Result<Self, GeometryError> {
        Self::new(self.patches.clone(), vec![0; self.patches.len()], Vec::new())
    }

    pub fn patches(&self) -> &[NurbsPatch] {
        &self.patches
    }

    pub fn patch(&self, i: usize) -> &NurbsPatch {
        &self.patches[i]
    }

    pub fn n_patches(&self) -> usize {
        self.patches.len()
    }

    pub fn subdomain_of(&self, patch: usize) -> usize {
        self.subdomain_of[patch]
    }

    pub fn n_subdomains(&self) -> usize {
        self.n_subdomains
    }

    pub fn patches_in(&self, subdomain: usize) -> Vec<usize> {
        (0..self.patches.len()).filter(|&p| self.subdomain_of[p] == subdomain).collect()
    }

    pub fn conforming(&self) -> &[ConformingInterface] {
        &self.conforming
    }

    pub fn couplings(&self) -> &[CouplingInterface] {
        &self.couplings
    }

    /// Faces carrying the perfect electric conductor condition.
    pub fn boundary(&self) -> &[FaceRef] {
        &self.boundary
    }

    pub fn is_boundary(&self, f: FaceRef) -> bool {
        self.boundary.contains(&f)
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn eval_face(&self, f: FaceRef, u: f64, v: f64) -> FaceEval {
        self.patches[f.patch].eval_face(f.side, u, v)
    }

    pub fn volume(&self) -> f64 {
        self.patches.iter().map(|p| p.volume()).sum()
    }
}

fn bounding_diameter(patches: &[NurbsPatch]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in patches {
        for c in p.control() {
            for d in 0..3 {
                lo[d] = lo[d].min(c[d]);
                hi[d] = hi[d].max(c[d]);
            }
        }
    }
    (0..3).map(|d| (hi[d] - lo[d]).powi(2)).sum::<f64>().sqrt()
}

const SAMPLES: usize = 10;

fn sample_grid() -> impl Iterator<Item = (f64, f64)> {
    (0..SAMPLES)
        .flat_map(|j| (0..SAMPLES).map(move |i| (i as f64 / (SAMPLES - 1) as f64, j as f64 / (SAMPLES - 1) as f64)))
}

/// Finds the symmetry relating two faces by matching their corners, then
/// confirms it on interior sample points.
fn detect_orientation(
    patches: &[NurbsPatch],
    fa: FaceRef,
    fb: FaceRef,
    tol: f64,
) -> Result<Option<FaceOrientation>, GeometryError> {
    let pa = &patches[fa.patch];
    let pb = &patches[fb.patch];
    let corners = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
    let xa: Vec<Vector3<f64>> = corners.iter().map(|&(u, v)| pa.point(fa.side.volume_param(u, v))).collect();
    for o in FaceOrientation::all() {
        let matches = corners.iter().zip(&xa).all(|(&(u, v), x)| {
            let (ub, vb) = o.apply(u, v);
            (pb.point(fb.side.volume_param(ub, vb)) - x).norm() <= tol
        });
        if !matches {
            continue;
        }
        let mut gap: f64 = 0.0;
        for (u, v) in sample_grid() {
            let (ub, vb) = o.apply(u, v);
            gap = gap.max((pa.point(fa.side.volume_param(u, v)) - pb.point(fb.side.volume_param(ub, vb))).norm());
        }
        if gap > tol {
            return Err(GeometryError::InterfaceMismatch { a: fa, b: fb, gap });
        }
        return Ok(Some(o));
    }
    Ok(None)
}

fn check_coupling(
    patches: &[NurbsPatch],
    subdomain_of: &[usize],
    c: &CouplingInterface,
    tol: f64,
) -> Result<(), GeometryError> {
    if c.slave == c.master {
        return Err(GeometryError::Invalid("a coupling needs two different subdomains".into()));
    }
    for f in &c.slave_faces {
        if subdomain_of.get(f.patch) != Some(&c.slave) {
            return Err(GeometryError::Invalid(format!("slave face {f:?} is not in subdomain {}", c.slave)));
        }
    }
    for f in &c.master_faces {
        if subdomain_of.get(f.patch) != Some(&c.master) {
            return Err(GeometryError::Invalid(format!("master face {f:?} is not in subdomain {}", c.master)));
        }
    }
    if c.pieces.is_empty() {
        return Err(GeometryError::Invalid("a coupling needs at least one overlap piece".into()));
    }
    for piece in &c.pieces {
        let fs = c.slave_faces[piece.slave_face];
        let fm = c.master_faces[piece.master_face];
        let [[u0, u1], [v0, v1]] = piece.slave_rect;
        let mut gap: f64 = 0.0;
        for (s, t) in sample_grid() {
            let (u, v) = (u0 + s * (u1 - u0), v0 + t * (v1 - v0));
            let (um, vm) = piece.map.apply(u, v);
            let xs = patches[fs.patch].point(fs.side.volume_param(u, v));
            let xm = patches[fm.patch].point(fm.side.volume_param(um, vm));
            gap = gap.max((xs - xm).norm());
            if let Some(plane) = &c.plane {
                let d = plane.distance(&xs);
                if d > tol {
                    return Err(GeometryError::NonPlanar(d));
                }
            }
        }
        if gap > tol {
            return Err(GeometryError::InterfaceMismatch { a: fs, b: fm, gap });
        }
        if let Some(plane) = &c.plane {
            let n = patches[fs.patch].eval_face(fs.side, 0.5 * (u0 + u1), 0.5 * (v0 + v1)).normal;
            if (n - plane.normal).norm() > 1e-8 {
                return Err(GeometryError::Invalid("plane normal must point out of the slave subdomain".into()));
            }
        }
    }
    Ok(())
}
