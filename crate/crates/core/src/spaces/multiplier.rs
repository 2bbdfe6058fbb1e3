use super::{SpaceError, SurfaceComplex};
use crate::geometry::{CouplingInterface, FaceRef};
use crate::sparse::CsrMatrix;
use crate::splines::KnotVector;

/// Multiplier space `S^1*_q` on one slave face.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceMultiplier {
    pub face: FaceRef,
    /// Complex on the slave knots reduced to degree `q`.
    pub complex: SurfaceComplex,
    /// First multiplier index of this face.
    pub offset: usize,
    /// First `S^2_q` index of this face.
    pub offset_s2: usize,
}

impl FaceMultiplier {
    pub fn len(&self) -> usize {
        self.complex.s1_star().iter().map(|c| c.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Mortar multiplier space on a coupling interface: one `S^1*_q` per slave
/// face, built from the slave knots with `p - q` end repetitions removed,
/// and concatenated without continuity across the lines where slave faces
/// meet.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSpace {
    q: usize,
    slave_degree: usize,
    faces: Vec<FaceMultiplier>,
    n_dofs: usize,
    n_s2: usize,
}

impl MultiplierSpace {
    /// `knots[p]` are the volume knot vectors of patch `p`.
    pub fn new(interface: &CouplingInterface, knots: &[[KnotVector; 3]], q: usize) -> Result<Self, SpaceError> {
        let mut faces = Vec::with_capacity(interface.slave_faces.len());
        let mut offset = 0;
        let mut offset_s2 = 0;
        let mut slave_degree = usize::MAX;
        for &face in &interface.slave_faces {
            let kv = &knots[face.patch];
            let (k, l) = face.side.tangential();
            let p = kv[k].degree();
            slave_degree = slave_degree.min(p);
            if q == 0 || q >= p {
                return Err(SpaceError::Invalid(format!("multiplier degree {q} must satisfy 1 <= q < {p}")));
            }
            let complex = SurfaceComplex::new(kv[k].reduce_to_degree(q)?, kv[l].reduce_to_degree(q)?)?;
            let fm = FaceMultiplier { face, complex, offset, offset_s2 };
            offset += fm.len();
            offset_s2 += fm.complex.dim_s2();
            faces.push(fm);
        }
        Ok(Self { q, slave_degree, faces, n_dofs: offset, n_s2: offset_s2 })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn faces(&self) -> &[FaceMultiplier] {
        &self.faces
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    /// Dimension of the broken `S^2_q` receiving the divergence.
    pub fn n_s2(&self) -> usize {
        self.n_s2
    }

    /// Choices `q = p - k` with even `k` are expected to violate the inf-sup
    /// condition.
    pub fn expected_unstable(&self) -> bool {
        (self.slave_degree - self.q).is_multiple_of(2)
    }

    /// Broken surface divergence `S^1*_q -> S^2_q`.
    pub fn div_matrix(&self) -> CsrMatrix {
        let blocks: Vec<CsrMatrix> = self.faces.iter().map(|f| f.complex.div()).collect();
        CsrMatrix::block_diag(&blocks.iter().collect::<Vec<_>>())
    }
}
