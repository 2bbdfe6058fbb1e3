//! Isogeometric curl-conforming discretization of the Maxwell eigenproblem on
//! multipatch domains, with mortar and modal interface couplings.

pub mod assembly;
pub mod bench;
pub mod eigensolver;
pub mod geometry;
pub mod quadrature;
pub mod spaces;
pub mod sparse;
pub mod splines;
pub mod waveguide_modes;
