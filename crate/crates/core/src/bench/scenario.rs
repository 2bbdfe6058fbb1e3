use super::{BenchError, Result};
use crate::assembly::CouplingMethod;
use crate::eigensolver::EigenOptions;
use crate::geometry::{cube_four_patches, cube_two_patches, pillbox, unit_cube, MultipatchGeometry};
use crate::spaces::Discretization;
use serde::Deserialize;
use std::path::Path;

/// A benchmark run read from a TOML file. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub geometry: GeometrySpec,
    /// One entry per subdomain, in subdomain order.
    #[serde(rename = "subdomain")]
    pub subdomains: Vec<SubdomainSpec>,
    pub coupling: CouplingSpec,
    /// Refinement level applied on top of the listed element counts.
    #[serde(default)]
    pub level: u32,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub compare: CompareSpec,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometrySpec {
    Cube,
    CubeTwoPatches,
    CubeFourPatches,
    Pillbox { radius: f64, length: f64 },
}

impl GeometrySpec {
    pub fn build(&self) -> Result<MultipatchGeometry> {
        Ok(match *self {
            Self::Cube => unit_cube(),
            Self::CubeTwoPatches => cube_two_patches(),
            Self::CubeFourPatches => cube_four_patches(),
            Self::Pillbox { radius, length } => pillbox(radius, length)?,
        })
    }

    fn n_subdomains(&self) -> usize {
        match self {
            Self::Cube => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubdomainSpec {
    pub degree: usize,
    pub regularity: i64,
    pub elements: [usize; 3],
    /// Ratio of geometric element grading toward the coupling faces.
    #[serde(default)]
    pub grading: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase", deny_unknown_fields)]
pub enum CouplingSpec {
    Glue,
    Mortar { q: usize },
    Ssc { modes: usize },
}

impl From<CouplingSpec> for CouplingMethod {
    fn from(c: CouplingSpec) -> Self {
        match c {
            CouplingSpec::Glue => Self::Glue,
            CouplingSpec::Mortar { q } => Self::Mortar { q },
            CouplingSpec::Ssc { modes } => Self::Ssc { modes },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub n_modes: usize,
    pub shift: f64,
    pub tol: f64,
    pub max_iterations: usize,
    pub dense_limit: usize,
    pub zero_tol: f64,
    pub seed: u64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let o = EigenOptions::default();
        Self {
            n_modes: o.n_modes,
            shift: o.shift,
            tol: o.tol,
            max_iterations: o.max_iterations,
            dense_limit: o.dense_limit,
            zero_tol: o.zero_tol,
            seed: o.seed,
        }
    }
}

impl SolverSpec {
    pub fn options(&self) -> EigenOptions {
        EigenOptions {
            n_modes: self.n_modes,
            shift: self.shift,
            tol: self.tol,
            max_iterations: self.max_iterations,
            dense_limit: self.dense_limit,
            zero_tol: self.zero_tol,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSpec {
    /// Relative tolerance of the oracle matching.
    pub tolerance: f64,
}

impl Default for CompareSpec {
    fn default() -> Self {
        Self { tolerance: super::DEFAULT_MATCH_TOLERANCE }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub levels: Vec<u32>,
    /// Multiplier degrees of a mortar sweep.
    #[serde(default)]
    pub q: Vec<usize>,
    /// Mode counts of a modal sweep.
    #[serde(default)]
    pub modes: Vec<usize>,
    /// 1-based index of the eigenvalue tracked for convergence orders.
    #[serde(default)]
    pub track: Option<usize>,
}

/// The coupling parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepParameter {
    Q(usize),
    Modes(usize),
    /// The scenario's own coupling.
    Fixed,
}

impl SweepParameter {
    pub fn label(&self) -> String {
        match self {
            Self::Q(q) => format!("q{q}"),
            Self::Modes(n) => format!("n{n}"),
            Self::Fixed => "fixed".into(),
        }
    }

    pub fn apply(&self, base: CouplingSpec) -> CouplingSpec {
        match *self {
            Self::Q(q) => CouplingSpec::Mortar { q },
            Self::Modes(modes) => CouplingSpec::Ssc { modes },
            Self::Fixed => base,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub csv: Option<String>,
    pub matrices: Option<String>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Self = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Checks every field, naming the first offending one.
    pub fn validate(&self) -> Result<()> {
        let expected = self.geometry.n_subdomains();
        if self.subdomains.len() != expected {
            return Err(BenchError::invalid(
                "subdomain",
                format!("geometry has {expected} subdomains, {} given", self.subdomains.len()),
            ));
        }
        if let GeometrySpec::Pillbox { radius, length } = self.geometry {
            if !(radius > 0.0 && length > 0.0) {
                return Err(BenchError::invalid("geometry", "radius and length must be positive"));
            }
        }
        for (i, d) in self.subdomains.iter().enumerate() {
            let field = |f: &str| format!("subdomain[{i}].{f}");
            if d.degree == 0 {
                return Err(BenchError::invalid(field("degree"), "must be at least 1"));
            }
            if d.regularity < 0 || d.regularity >= d.degree as i64 {
                return Err(BenchError::invalid(field("regularity"), format!("must lie in 0..{}", d.degree)));
            }
            if d.elements.contains(&0) {
                return Err(BenchError::invalid(field("elements"), "every direction needs an element"));
            }
            if let Some(g) = d.grading {
                if !(g > 0.0) {
                    return Err(BenchError::invalid(field("grading"), "must be positive"));
                }
            }
        }
        self.validate_coupling(self.coupling, "coupling")?;
        if self.solver.n_modes == 0 {
            return Err(BenchError::invalid("solver.n_modes", "must be at least 1"));
        }
        if !(self.solver.tol > 0.0) {
            return Err(BenchError::invalid("solver.tol", "must be positive"));
        }
        if !(self.compare.tolerance >= 0.0) {
            return Err(BenchError::invalid("compare.tolerance", "must not be negative"));
        }
        if let Some(sw) = &self.sweep {
            if sw.levels.is_empty() {
                return Err(BenchError::invalid("sweep.levels", "must not be empty"));
            }
            if !sw.q.is_empty() && !sw.modes.is_empty() {
                return Err(BenchError::invalid("sweep", "vary either q or modes, not both"));
            }
            for &q in &sw.q {
                self.validate_coupling(CouplingSpec::Mortar { q }, "sweep.q")?;
            }
            for &modes in &sw.modes {
                self.validate_coupling(CouplingSpec::Ssc { modes }, "sweep.modes")?;
            }
            if sw.track == Some(0) {
                return Err(BenchError::invalid("sweep.track", "indices start at 1"));
            }
        }
        Ok(())
    }

    fn validate_coupling(&self, c: CouplingSpec, field: &str) -> Result<()> {
        let single = self.geometry.n_subdomains() == 1;
        match c {
            CouplingSpec::Glue => Ok(()),
            _ if single => Err(BenchError::invalid(field, "the geometry has no coupling interface")),
            CouplingSpec::Mortar { q } => {
                // The slave side is subdomain 0 for every built-in geometry.
                let slave = &self.subdomains[0];
                if slave.degree < 2 {
                    return Err(BenchError::invalid(field, "the slave degree must be at least 2"));
                }
                if q == 0 || q >= slave.degree {
                    return Err(BenchError::invalid(field, format!("q must lie in 1..{}", slave.degree)));
                }
                let multiplicity = slave.degree as i64 - slave.regularity;
                if multiplicity > q as i64 {
                    return Err(BenchError::invalid(
                        field,
                        format!("slave knots repeated {multiplicity} times exceed q = {q}"),
                    ));
                }
                Ok(())
            }
            CouplingSpec::Ssc { modes } => {
                if modes == 0 {
                    Err(BenchError::invalid(field, "at least one mode is needed"))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Discretizations at refinement `level`; the scenario's own level is
    /// `self.level`.
    pub fn discretizations(&self, level: u32) -> Vec<Discretization> {
        self.subdomains
            .iter()
            .map(|d| {
                Discretization { degree: d.degree, regularity: d.regularity, elements: d.elements, grading: d.grading }
                    .refined(level)
            })
            .collect()
    }

    /// Parameters of the sweep table; [`SweepParameter::Fixed`] when the
    /// sweep only refines.
    pub fn sweep_parameters(&self) -> Vec<SweepParameter> {
        match &self.sweep {
            Some(sw) if !sw.q.is_empty() => sw.q.iter().map(|&q| SweepParameter::Q(q)).collect(),
            Some(sw) if !sw.modes.is_empty() => sw.modes.iter().map(|&n| SweepParameter::Modes(n)).collect(),
            _ => vec![SweepParameter::Fixed],
        }
    }
}
