use super::{
    AffineMap2, CouplingInterface, FaceRef, GeometryError, InterfacePlane, InterfaceShape, MortarPiece,
    MultipatchGeometry, NurbsPatch, Side,
};
use crate::splines::KnotVector;
use nalgebra::Vector3;
use std::f64::consts::FRAC_1_SQRT_2;

/// Half-width of the square core of the disc, relative to the radius.
pub const PILLBOX_CORE_FRACTION: f64 = 0.4;

/// Unit cube as a single patch.
pub fn unit_cube() -> MultipatchGeometry {
    MultipatchGeometry::new(vec![NurbsPatch::axis_box([0.0; 3], [1.0; 3])], vec![0], Vec::new()).expect("unit cube")
}

fn horizontal_plane(z: f64, shape: InterfaceShape, origin_xy: [f64; 2]) -> InterfacePlane {
    InterfacePlane {
        origin: Vector3::new(origin_xy[0], origin_xy[1], z),
        e1: Vector3::x(),
        e2: Vector3::y(),
        normal: Vector3::z(),
        shape,
    }
}

/// Unit cube split at `z = 1/2`: the lower half is subdomain 0 (slave), the
/// upper half subdomain 1 (master).
pub fn cube_two_patches() -> MultipatchGeometry {
    let lower = NurbsPatch::axis_box([0.0, 0.0, 0.0], [1.0, 1.0, 0.5]);
    let upper = NurbsPatch::axis_box([0.0, 0.0, 0.5], [1.0, 1.0, 1.0]);
    let coupling = CouplingInterface {
        slave: 0,
        master: 1,
        slave_faces: vec![FaceRef::new(0, Side::new(2, 1))],
        master_faces: vec![FaceRef::new(1, Side::new(2, 0))],
        pieces: vec![MortarPiece {
            slave_face: 0,
            master_face: 0,
            map: AffineMap2::IDENTITY,
            slave_rect: [[0.0, 1.0], [0.0, 1.0]],
        }],
        plane: Some(horizontal_plane(0.5, InterfaceShape::Rectangle { width: 1.0, height: 1.0 }, [0.0, 0.0])),
    };
    MultipatchGeometry::new(vec![lower, upper], vec![0, 1], vec![coupling]).expect("two-patch cube")
}

/// Unit cube whose lower half is made of three conforming slabs along `x`
/// (subdomain 0) facing a single upper patch (subdomain 1).
pub fn cube_four_patches() -> MultipatchGeometry {
    let cuts = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
    let mut patches: Vec<NurbsPatch> =
        (0..3).map(|i| NurbsPatch::axis_box([cuts[i], 0.0, 0.0], [cuts[i + 1], 1.0, 0.5])).collect();
    patches.push(NurbsPatch::axis_box([0.0, 0.0, 0.5], [1.0, 1.0, 1.0]));
    let pieces = (0..3)
        .map(|i| MortarPiece {
            slave_face: i,
            master_face: 0,
            map: AffineMap2 { a: [[cuts[i + 1] - cuts[i], 0.0], [0.0, 1.0]], b: [cuts[i], 0.0] },
            slave_rect: [[0.0, 1.0], [0.0, 1.0]],
        })
        .collect();
    let coupling = CouplingInterface {
        slave: 0,
        master: 1,
        slave_faces: (0..3).map(|i| FaceRef::new(i, Side::new(2, 1))).collect(),
        master_faces: vec![FaceRef::new(3, Side::new(2, 0))],
        pieces,
        plane: Some(horizontal_plane(0.5, InterfaceShape::Rectangle { width: 1.0, height: 1.0 }, [0.0, 0.0])),
    };
    MultipatchGeometry::new(patches, vec![0, 0, 0, 1], vec![coupling]).expect("four-patch cube")
}

/// Five quadratic NURBS patches covering the disc of radius `r`: a square
/// core and four annular sectors, each returned as a 3x3 control net
/// (first index fastest) with weights.
fn disc_nets(r: f64) -> Vec<(Vec<[f64; 2]>, Vec<f64>)> {
    let a = PILLBOX_CORE_FRACTION * r;
    let w = [1.0, FRAC_1_SQRT_2, 1.0];
    let s = [-1.0, 0.0, 1.0];
    let mut nets = Vec::new();
    let mut core = Vec::new();
    let mut core_w = Vec::new();
    for j in 0..3 {
        for i in 0..3 {
            core.push([a * s[i], a * s[j]]);
            core_w.push(w[i] * w[j]);
        }
    }
    nets.push((core, core_w));
    // Sector facing +x; first direction radial, second counterclockwise.
    let inner = [[a, -a], [a, 0.0], [a, a]];
    let outer = [
        [r * FRAC_1_SQRT_2, -r * FRAC_1_SQRT_2],
        [r * std::f64::consts::SQRT_2, 0.0],
        [r * FRAC_1_SQRT_2, r * FRAC_1_SQRT_2],
    ];
    for quarter in 0..4 {
        let (c, sn) = match quarter {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
        let rot = |p: [f64; 2]| [c * p[0] - sn * p[1], sn * p[0] + c * p[1]];
        let mut net = Vec::new();
        let mut wts = Vec::new();
        for j in 0..3 {
            let mid = [0.5 * (inner[j][0] + outer[j][0]), 0.5 * (inner[j][1] + outer[j][1])];
            for p in [inner[j], mid, outer[j]] {
                net.push(rot(p));
                wts.push(w[j]);
            }
        }
        nets.push((net, wts));
    }
    nets
}

/// Circular cylinder of radius `r` and length `l` along `z`, cut at
/// `z = l / 2` into a lower layer (subdomain 0, slave) and an upper layer
/// (subdomain 1, master), each made of five patches.
pub fn pillbox(r: f64, l: f64) -> Result<MultipatchGeometry, GeometryError> {
    if !(r > 0.0 && l > 0.0) {
        return Err(GeometryError::Invalid("pillbox radius and length must be positive".into()));
    }
    let kv = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0])?;
    let nets = disc_nets(r);
    let mut patches = Vec::new();
    let mut subdomain_of = Vec::new();
    for (layer, (z0, z1)) in [(0.0, 0.5 * l), (0.5 * l, l)].into_iter().enumerate() {
        for (net, wts) in &nets {
            let mut control = Vec::with_capacity(27);
            let mut weights = Vec::with_capacity(27);
            for k in 0..3 {
                let z = z0 + 0.5 * k as f64 * (z1 - z0);
                for (p, w) in net.iter().zip(wts) {
                    control.push([p[0], p[1], z]);
                    weights.push(*w);
                }
            }
            patches.push(NurbsPatch::new([kv.clone(), kv.clone(), kv.clone()], control, weights)?);
            subdomain_of.push(layer);
        }
    }
    let coupling = CouplingInterface {
        slave: 0,
        master: 1,
        slave_faces: (0..5).map(|i| FaceRef::new(i, Side::new(2, 1))).collect(),
        master_faces: (5..10).map(|i| FaceRef::new(i, Side::new(2, 0))).collect(),
        pieces: (0..5)
            .map(|i| MortarPiece {
                slave_face: i,
                master_face: i,
                map: AffineMap2::IDENTITY,
                slave_rect: [[0.0, 1.0], [0.0, 1.0]],
            })
            .collect(),
        plane: Some(horizontal_plane(0.5 * l, InterfaceShape::Disc { radius: r }, [0.0, 0.0])),
    };
    MultipatchGeometry::new(patches, subdomain_of, vec![coupling])
}
