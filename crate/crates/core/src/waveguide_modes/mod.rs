//! Closed-form waveguide modes on planar interfaces, used as the modal
//! multiplier basis.
//!
//! Modes live in the orthonormal frame of the interface plane. TM modes are
//! surface gradients of Dirichlet eigenfunctions `E_z`, TE modes are surface
//! curls `(dy H_z, -dx H_z)` of Neumann eigenfunctions `H_z`. Every field is
//! normalized to unit `L^2` norm on the interface.

mod bessel;

pub use bessel::{
    bessel_j, bessel_j_over_x, bessel_j_prime, bessel_prime_zero, bessel_prime_zeros_below, bessel_zero,
    bessel_zeros_below, BesselError, MAX_ARG,
};

use crate::geometry::{InterfacePlane, InterfaceShape};
use nalgebra::Vector3;
use std::cmp::Ordering;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModeError {
    #[error("at least one mode must be requested")]
    NoModes,
    #[error("interface dimensions must be positive")]
    Dimensions,
    #[error(transparent)]
    Bessel(#[from] BesselError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// From `E_z` with Dirichlet conditions.
    TM,
    /// From `H_z` with Neumann conditions.
    TE,
}

/// Angular dependence of a disc mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Angular {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeShape {
    /// `E_z` or `H_z` built from `sin` or `cos` in `x` and `y` on `[0,a] x [0,b]`.
    Rectangle { a: f64, b: f64 },
    /// Bessel profile of order `m` with `J_m` zero `chi`, centred at the origin.
    Disc { radius: f64, chi: f64, angular: Angular },
}

/// One normalized interface mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveguideMode {
    pub family: Family,
    /// First index: `k` on rectangles, the angular order `m` on discs.
    pub m: usize,
    /// Second index: `l` on rectangles, the radial zero index on discs.
    pub k: usize,
    /// Separation constant.
    pub gamma: f64,
    pub shape: ModeShape,
    /// Factor turning the raw field into a unit `L^2` field.
    scale: f64,
}

impl WaveguideMode {
    fn new(family: Family, m: usize, k: usize, gamma: f64, shape: ModeShape) -> Self {
        let mut mode = Self { family, m, k, gamma, shape, scale: 1.0 };
        // The raw field has squared norm gamma^2 times the squared norm of
        // the potential.
        mode.scale = 1.0 / (gamma * mode.raw_potential_norm_sq().sqrt());
        mode
    }

    fn raw_potential_norm_sq(&self) -> f64 {
        let eps = |i: usize| if i == 0 { 2.0 } else { 1.0 };
        match self.shape {
            ModeShape::Rectangle { a, b } => 0.25 * a * b * eps(self.m) * eps(self.k),
            ModeShape::Disc { radius, chi, .. } => {
                let m = self.m;
                let radial = match self.family {
                    Family::TM => 0.5 * radius * radius * bessel_j(m + 1, chi).unwrap().powi(2),
                    Family::TE => {
                        let mc = m as f64 / chi;
                        0.5 * radius * radius * (1.0 - mc * mc) * bessel_j(m, chi).unwrap().powi(2)
                    }
                };
                radial * PI * eps(m)
            }
        }
    }

    /// Unnormalized potential `E_z` (TM) or `H_z` (TE) at local coordinates.
    pub fn potential(&self, x: f64, y: f64) -> f64 {
        match self.shape {
            ModeShape::Rectangle { a, b } => {
                let (u, v) = (self.m as f64 * PI * x / a, self.k as f64 * PI * y / b);
                match self.family {
                    Family::TM => u.sin() * v.sin(),
                    Family::TE => u.cos() * v.cos(),
                }
            }
            ModeShape::Disc { radius, chi, angular } => {
                let r = x.hypot(y);
                let theta = y.atan2(x);
                let ang = match angular {
                    Angular::Cos => (self.m as f64 * theta).cos(),
                    Angular::Sin => (self.m as f64 * theta).sin(),
                };
                bessel_j(self.m, (chi * r / radius).min(MAX_ARG)).unwrap() * ang
            }
        }
    }

    /// Surface gradient of the unnormalized potential.
    fn potential_gradient(&self, x: f64, y: f64) -> [f64; 2] {
        match self.shape {
            ModeShape::Rectangle { a, b } => {
                let (ka, lb) = (self.m as f64 * PI / a, self.k as f64 * PI / b);
                let (u, v) = (ka * x, lb * y);
                match self.family {
                    Family::TM => [ka * u.cos() * v.sin(), lb * u.sin() * v.cos()],
                    Family::TE => [-ka * u.sin() * v.cos(), -lb * u.cos() * v.sin()],
                }
            }
            ModeShape::Disc { radius, chi, angular } => {
                let m = self.m as f64;
                let r = x.hypot(y);
                let s = (chi * r / radius).min(MAX_ARG);
                let theta = y.atan2(x);
                let (c, sn) = ((m * theta).cos(), (m * theta).sin());
                let (ang, dang) = match angular {
                    Angular::Cos => (c, -m * sn),
                    Angular::Sin => (sn, m * c),
                };
                let dr = chi / radius * bessel_j_prime(self.m, s).unwrap() * ang;
                // (1/r) d/dtheta, with J_m(s)/r = (chi/R) J_m(s)/s.
                let dt = chi / radius * bessel_j_over_x(self.m, s).unwrap() * dang;
                let (ct, st) = if r > 0.0 { (x / r, y / r) } else { (1.0, 0.0) };
                [dr * ct - dt * st, dr * st + dt * ct]
            }
        }
    }

    /// Normalized tangential field in the plane frame.
    pub fn field(&self, x: f64, y: f64) -> [f64; 2] {
        let g = self.potential_gradient(x, y);
        match self.family {
            Family::TM => [self.scale * g[0], self.scale * g[1]],
            Family::TE => [self.scale * g[1], -self.scale * g[0]],
        }
    }

    /// Surface divergence of the normalized field; TE fields are solenoidal.
    pub fn divergence(&self, x: f64, y: f64) -> f64 {
        match self.family {
            Family::TM => -self.gamma * self.gamma * self.scale * self.potential(x, y),
            Family::TE => 0.0,
        }
    }

    /// Normalized field at a physical point of `plane`, as a 3-vector.
    pub fn field_at(&self, plane: &InterfacePlane, p: &Vector3<f64>) -> Vector3<f64> {
        let (x, y) = plane.local(p);
        let f = self.field(x, y);
        plane.e1 * f[0] + plane.e2 * f[1]
    }

    fn sort_key(&self, other: &Self) -> Ordering {
        let ang = |m: &Self| match m.shape {
            ModeShape::Disc { angular, .. } => angular,
            ModeShape::Rectangle { .. } => Angular::Cos,
        };
        self.gamma
            .partial_cmp(&other.gamma)
            .unwrap()
            .then(self.family.cmp(&other.family))
            .then(self.m.cmp(&other.m))
            .then(self.k.cmp(&other.k))
            .then(ang(self).cmp(&ang(other)))
    }
}

fn finish(mut modes: Vec<WaveguideMode>, n: usize) -> Vec<WaveguideMode> {
    modes.sort_by(|a, b| a.sort_key(b));
    modes.truncate(n);
    modes
}

/// First `n` modes of the rectangle `[0,a] x [0,b]` by increasing `gamma`.
pub fn rect_modes(a: f64, b: f64, n: usize) -> Result<Vec<WaveguideMode>, ModeError> {
    if n == 0 {
        return Err(ModeError::NoModes);
    }
    if !(a > 0.0 && b > 0.0) {
        return Err(ModeError::Dimensions);
    }
    let gamma_of = |k: usize, l: usize| PI * ((k as f64 / a).powi(2) + (l as f64 / b).powi(2)).sqrt();
    let mut cut = PI * (1.0 / a).max(1.0 / b);
    loop {
        let (kmax, lmax) = ((cut * a / PI).floor() as usize, (cut * b / PI).floor() as usize);
        let mut modes = Vec::new();
        for k in 0..=kmax {
            for l in 0..=lmax {
                let g = gamma_of(k, l);
                if g > cut || g == 0.0 {
                    continue;
                }
                let shape = ModeShape::Rectangle { a, b };
                if k > 0 && l > 0 {
                    modes.push(WaveguideMode::new(Family::TM, k, l, g, shape));
                }
                modes.push(WaveguideMode::new(Family::TE, k, l, g, shape));
            }
        }
        if modes.len() >= n {
            return Ok(finish(modes, n));
        }
        cut *= 2.0;
    }
}

/// First `n` modes of the disc of radius `radius` by increasing `gamma`;
/// orders `m >= 1` contribute adjacent cosine and sine modes.
pub fn disc_modes(radius: f64, n: usize) -> Result<Vec<WaveguideMode>, ModeError> {
    if n == 0 {
        return Err(ModeError::NoModes);
    }
    if !(radius > 0.0) {
        return Err(ModeError::Dimensions);
    }
    let mut xmax = 4.0;
    loop {
        let mut modes = Vec::new();
        for m in 0.. {
            // Zeros of J_m and J_m' exceed m.
            if m as f64 >= xmax {
                break;
            }
            for (family, zeros) in
                [(Family::TM, bessel_zeros_below(m, xmax)?), (Family::TE, bessel_prime_zeros_below(m, xmax)?)]
            {
                for (i, &chi) in zeros.iter().enumerate() {
                    let angulars: &[Angular] = if m == 0 { &[Angular::Cos] } else { &[Angular::Cos, Angular::Sin] };
                    for &angular in angulars {
                        let shape = ModeShape::Disc { radius, chi, angular };
                        modes.push(WaveguideMode::new(family, m, i + 1, chi / radius, shape));
                    }
                }
            }
        }
        if modes.len() >= n {
            return Ok(finish(modes, n));
        }
        xmax = (2.0 * xmax).min(MAX_ARG);
    }
}

/// First `n` modes of a planar interface.
pub fn interface_modes(plane: &InterfacePlane, n: usize) -> Result<Vec<WaveguideMode>, ModeError> {
    match plane.shape {
        InterfaceShape::Rectangle { width, height } => rect_modes(width, height, n),
        InterfaceShape::Disc { radius } => disc_modes(radius, n),
    }
}
