//! Spline spaces of the discrete de Rham sequence on patches, subdomains and
//! interfaces.
//!
//! Volume spaces are `S^0` (nodal, `H^1`) and `S^1` (edge, `H(curl)`). A
//! component of `S^1` uses the derived knot vector in its own direction.
//! Local degrees of freedom are numbered component by component, each
//! lexicographically with the first direction fastest.

mod glue;
mod multiplier;
mod surface;

pub use glue::{gradient_matrix, DofTarget, ProductSpace, SubdomainSpace};
pub use multiplier::{FaceMultiplier, MultiplierSpace};
pub use surface::{SurfaceComplex, SurfaceComponent};

use crate::geometry::{GeometryError, MultipatchGeometry, Side};
use crate::splines::{KnotVector, SplineError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("patches {a} and {b} share a face but their knot vectors differ in direction {dir}")]
    NonConforming { a: usize, b: usize, dir: usize },
    #[error("inconsistent orientation signs while gluing patch {patch}")]
    InconsistentSigns { patch: usize },
    #[error("glued degrees of freedom of patches {a} and {b} sit {gap:e} apart")]
    GrevilleMismatch { a: usize, b: usize, gap: f64 },
    #[error("expected {expected} discretizations, one per subdomain, got {got}")]
    DiscretizationCount { expected: usize, got: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Which space of the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    /// `S^0`, continuous scalar splines.
    H1,
    /// `S^1`, tangentially continuous vector splines.
    HCurl,
}

/// Degree, regularity and mesh of the patches of one subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    pub degree: usize,
    pub regularity: i64,
    /// Elements per parametric direction of every patch.
    pub elements: [usize; 3],
    /// Optional geometric grading of element sizes toward coupling faces.
    pub grading: Option<f64>,
}

impl Discretization {
    pub fn new(degree: usize, regularity: i64, elements: [usize; 3]) -> Self {
        Self { degree, regularity, elements, grading: None }
    }

    /// Same discretization with every element count multiplied by `2^level`.
    pub fn refined(&self, level: u32) -> Self {
        let f = 1usize << level;
        Self { elements: self.elements.map(|n| n * f), ..self.clone() }
    }
}

/// Degree-`p` knot vectors of every patch, one discretization per subdomain.
pub fn patch_knot_vectors(
    geom: &MultipatchGeometry,
    discs: &[Discretization],
) -> Result<Vec<[KnotVector; 3]>, SpaceError> {
    if discs.len() != geom.n_subdomains() {
        return Err(SpaceError::DiscretizationCount { expected: geom.n_subdomains(), got: discs.len() });
    }
    let mut graded_sides: Vec<Vec<Side>> = vec![Vec::new(); geom.n_patches()];
    for c in geom.couplings() {
        for f in c.slave_faces.iter().chain(&c.master_faces) {
            graded_sides[f.patch].push(f.side);
        }
    }
    (0..geom.n_patches())
        .map(|p| {
            let d = &discs[geom.subdomain_of(p)];
            let mut out = Vec::with_capacity(3);
            for dir in 0..3 {
                let toward = graded_sides[p].iter().find(|s| s.dir == dir).map(|s| s.end);
                let kv = match (d.grading, toward) {
                    (Some(ratio), Some(end)) => {
                        KnotVector::graded(d.degree, d.elements[dir], d.regularity, ratio, end)?
                    }
                    _ => KnotVector::open_uniform(d.degree, d.elements[dir], d.regularity)?,
                };
                out.push(kv);
            }
            Ok([out[0].clone(), out[1].clone(), out[2].clone()])
        })
        .collect()
}

/// One tensor-product scalar component of a patch basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub knots: [KnotVector; 3],
    pub dims: [usize; 3],
    pub offset: usize,
}

impl Component {
    fn new(knots: [KnotVector; 3], offset: usize) -> Self {
        let dims = [knots[0].n_basis(), knots[1].n_basis(), knots[2].n_basis()];
        Self { knots, dims, offset }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, idx: [usize; 3]) -> usize {
        self.offset + idx[0] + self.dims[0] * (idx[1] + self.dims[1] * idx[2])
    }
}

/// Local basis of `S^0` or `S^1` on one patch.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchBasis {
    pub form: Form,
    pub comps: Vec<Component>,
    pub len: usize,
}

impl PatchBasis {
    pub fn new(form: Form, base: &[KnotVector; 3]) -> Result<Self, SpaceError> {
        let mut comps = Vec::new();
        let mut offset = 0;
        match form {
            Form::H1 => {
                let c = Component::new(base.clone(), 0);
                offset += c.len();
                comps.push(c);
            }
            Form::HCurl => {
                for c in 0..3 {
                    let mut k = base.clone();
                    k[c] = base[c].derived()?;
                    let comp = Component::new(k, offset);
                    offset += comp.len();
                    comps.push(comp);
                }
            }
        }
        Ok(Self { form, comps, len: offset })
    }

    /// Degree-`p` knot vectors the basis was built from.
    pub fn base_knots(&self) -> [KnotVector; 3] {
        match self.form {
            Form::H1 => self.comps[0].knots.clone(),
            Form::HCurl => std::array::from_fn(|d| self.comps[(d + 1) % 3].knots[d].clone()),
        }
    }

    /// Component and multi-index of local function `l`.
    pub fn split(&self, l: usize) -> (usize, [usize; 3]) {
        let c = self.comps.iter().rposition(|c| c.offset <= l).expect("local index in range");
        let comp = &self.comps[c];
        let mut r = l - comp.offset;
        let mut idx = [0; 3];
        for d in 0..3 {
            idx[d] = r % comp.dims[d];
            r /= comp.dims[d];
        }
        (c, idx)
    }

    /// Vector direction of component `c`; `None` for scalar spaces.
    pub fn direction(&self, c: usize) -> Option<usize> {
        match self.form {
            Form::H1 => None,
            Form::HCurl => Some(c),
        }
    }

    /// Functions with nonzero (tangential) trace on `side`.
    pub fn trace_dofs(&self, side: Side) -> Vec<usize> {
        let mut out = Vec::new();
        for (c, comp) in self.comps.iter().enumerate() {
            if self.direction(c) == Some(side.dir) {
                continue;
            }
            let fixed = if side.end == 0 { 0 } else { comp.dims[side.dir] - 1 };
            let (k, l) = side.tangential();
            for j in 0..comp.dims[l] {
                for i in 0..comp.dims[k] {
                    let mut idx = [0; 3];
                    idx[side.dir] = fixed;
                    idx[k] = i;
                    idx[l] = j;
                    out.push(comp.index(idx));
                }
            }
        }
        out
    }

    /// Greville point of local function `l` in parametric coordinates.
    pub fn greville(&self, l: usize) -> [f64; 3] {
        let (c, idx) = self.split(l);
        let comp = &self.comps[c];
        let mut xi = [0.0; 3];
        for d in 0..3 {
            xi[d] = comp.knots[d].greville()[idx[d]];
        }
        xi
    }
}
