//! Scenario-driven benchmarks: closed-form cavity spectra, spectrum
//! comparison with spurious-mode detection, convergence orders, inf-sup and
//! modal sweeps, and their CSV tables.

mod compare;
mod oracle;
mod order;
mod output;
mod runner;
mod scenario;

pub use compare::{compare_spectrum, MatchedPair, SpectrumComparison, DEFAULT_MATCH_TOLERANCE};
pub use oracle::{expand_multiplicities, oracle_spectrum, OracleMode};
pub use order::estimate_order;
pub use output::{
    frequency_ghz, write_convergence_csv, write_infsup_csv, write_spectrum_csv, CSV_SCHEMA_VERSION, SPEED_OF_LIGHT,
};
pub use runner::{
    build_problem, convergence_sweep, export_matrices, infsup_sweep, run_spectrum, ConvergenceRow, ConvergenceSweep,
    InfSupRow, SpectrumReport,
};
pub use scenario::{
    CompareSpec, CouplingSpec, GeometrySpec, OutputSpec, Scenario, SolverSpec, SubdomainSpec, SweepParameter, SweepSpec,
};

use crate::assembly::AssemblyError;
use crate::eigensolver::EigenError;
use crate::geometry::GeometryError;
use crate::waveguide_modes::BesselError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("cannot parse scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error("at least two points are needed to fit an order, got {0}")]
    TooFewPoints(usize),
    #[error("errors and mesh sizes must be positive and of equal length")]
    BadSamples,
}

impl BenchError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Invalid { field: field.into(), reason: reason.into() }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
