use super::{
    assemble_mortar_coupling, assemble_ssc_coupling, assemble_volume, face_mesh_size, mortar_multiplier_norm,
    ssc_multiplier_norm, AssemblyError,
};
use crate::geometry::MultipatchGeometry;
use crate::spaces::{gradient_matrix, patch_knot_vectors, Discretization, Form, MultiplierSpace, ProductSpace};
use crate::sparse::CsrMatrix;
use crate::splines::KnotVector;
use crate::waveguide_modes::interface_modes;
use std::ops::Range;

/// How subdomains are joined across coupling interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMethod {
    /// Treat the couplings as conforming and glue the degrees of freedom.
    /// Needs matching meshes across every interface.
    Glue,
    /// Spline multipliers of degree `q` on the slave side.
    Mortar { q: usize },
    /// The first `modes` waveguide modes of each planar interface.
    Ssc { modes: usize },
}

/// Multiplier rows belonging to one coupling interface.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceBlock {
    pub rows: Range<usize>,
    /// Mesh size used in the multiplier norm.
    pub h: f64,
    /// Mortar pairing with `p - q` even, known to lose stability.
    pub expected_unstable: bool,
}

/// All matrices of the constrained eigenproblem
/// `A u = lambda M u` subject to `B u = 0`, together with the norms of the
/// inf-sup test and the discrete gradients spanning the kernel of `A`.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    pub method: CouplingMethod,
    /// Geometry the spaces live on; couplings are merged away under
    /// [`CouplingMethod::Glue`].
    pub geometry: MultipatchGeometry,
    pub knots: Vec<[KnotVector; 3]>,
    pub s1: ProductSpace,
    pub s0: ProductSpace,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// Interface blocks stacked, `n_multipliers x n_dofs`.
    pub coupling: CsrMatrix,
    pub multiplier_norm: CsrMatrix,
    /// Block-diagonal gradient from `s0` into `s1`.
    pub gradients: CsrMatrix,
    pub interfaces: Vec<InterfaceBlock>,
}

impl SaddleProblem {
    /// `discs` holds one discretization per subdomain of `geom`.
    pub fn build(
        geom: &MultipatchGeometry,
        discs: &[Discretization],
        method: CouplingMethod,
    ) -> Result<Self, AssemblyError> {
        let knots = patch_knot_vectors(geom, discs)?;
        let geometry = match method {
            CouplingMethod::Glue => geom.merged()?,
            _ => geom.clone(),
        };
        let s1 = ProductSpace::new(&geometry, &knots, Form::HCurl)?;
        let s0 = ProductSpace::new(&geometry, &knots, Form::H1)?;

        let mut stiff = Vec::new();
        let mut mass = Vec::new();
        let mut grads = Vec::new();
        for (a, b) in s1.spaces().iter().zip(s0.spaces()) {
            let vm = assemble_volume(&geometry, a)?;
            stiff.push(vm.stiffness);
            mass.push(vm.mass);
            grads.push(gradient_matrix(b, a)?);
        }
        let refs = |v: &[CsrMatrix]| CsrMatrix::block_diag(&v.iter().collect::<Vec<_>>());
        let (stiffness, mass, gradients) = (refs(&stiff), refs(&mass), refs(&grads));

        let mut rows = Vec::new();
        let mut norms = Vec::new();
        let mut interfaces = Vec::new();
        let mut start = 0;
        for iface in geometry.couplings() {
            let h = face_mesh_size(&geometry, &iface.slave_faces, &knots);
            let (b, n, unstable) = match method {
                CouplingMethod::Glue => unreachable!("merged geometry has no couplings"),
                CouplingMethod::Mortar { q } => {
                    let mult = MultiplierSpace::new(iface, &knots, q)?;
                    let b = assemble_mortar_coupling(&geometry, iface, &s1, &mult)?;
                    let n = mortar_multiplier_norm(&geometry, &mult, h)?;
                    (b, n, mult.expected_unstable())
                }
                CouplingMethod::Ssc { modes } => {
                    let plane = iface.plane.as_ref().ok_or(AssemblyError::NonPlanar)?;
                    let modes = interface_modes(plane, modes)?;
                    let b = assemble_ssc_coupling(&geometry, iface, &s1, &modes)?;
                    (b, ssc_multiplier_norm(&modes, h), false)
                }
            };
            let end = start + b.nrows();
            interfaces.push(InterfaceBlock { rows: start..end, h, expected_unstable: unstable });
            start = end;
            rows.push(b);
            norms.push(n);
        }
        let n = s1.n_dofs();
        let coupling =
            if rows.is_empty() { CsrMatrix::zeros(0, n) } else { CsrMatrix::vstack(&rows.iter().collect::<Vec<_>>()) };
        let multiplier_norm = refs(&norms);
        Ok(Self { method, geometry, knots, s1, s0, stiffness, mass, coupling, multiplier_norm, gradients, interfaces })
    }

    pub fn n_dofs(&self) -> usize {
        self.s1.n_dofs()
    }

    pub fn n_multipliers(&self) -> usize {
        self.coupling.nrows()
    }

    /// Broken `H(curl)` norm matrix `M + A`.
    pub fn hcurl_norm(&self) -> CsrMatrix {
        self.mass.add(1.0, &self.stiffness, 1.0)
    }
}
