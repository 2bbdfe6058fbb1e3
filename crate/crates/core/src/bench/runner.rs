use super::{
    compare_spectrum, estimate_order, expand_multiplicities, oracle_spectrum, BenchError, CouplingSpec, Result,
    Scenario, SpectrumComparison, SweepParameter,
};
use crate::assembly::SaddleProblem;
use crate::eigensolver::{solve_constrained_eig, InfSupSolver, SolverPath};
use crate::sparse::{write_matrix_market, CsrMatrix};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

/// Assembles the scenario's saddle problem at refinement `level`.
pub fn build_problem(scenario: &Scenario, level: u32, coupling: CouplingSpec) -> Result<SaddleProblem> {
    let geom = scenario.geometry.build()?;
    Ok(SaddleProblem::build(&geom, &scenario.discretizations(level), coupling.into())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub name: String,
    pub level: u32,
    pub coupling: CouplingSpec,
    pub n_dofs: usize,
    pub n_multipliers: usize,
    pub kernel_dim: usize,
    /// Ascending physical eigenvalues.
    pub eigenvalues: Vec<f64>,
    pub comparison: SpectrumComparison,
    pub max_residual: f64,
    pub max_constraint_residual: f64,
    pub path: SolverPath,
    pub iterations: usize,
}

impl SpectrumReport {
    /// `|lambda_k - lambda*_k| / lambda*_k` against the exact spectrum in
    /// ascending order, index by index.
    pub fn indexwise_errors(&self, oracle: &[f64]) -> Vec<f64> {
        self.eigenvalues.iter().zip(oracle).map(|(c, o)| (c - o).abs() / o).collect()
    }
}

/// Lowest physical eigenvalues of the scenario, matched against the
/// closed-form spectrum.
pub fn run_spectrum(scenario: &Scenario, level: u32, coupling: CouplingSpec) -> Result<SpectrumReport> {
    let problem = build_problem(scenario, level, coupling)?;
    solve_problem(scenario, &problem, level, coupling)
}

fn solve_problem(
    scenario: &Scenario,
    problem: &SaddleProblem,
    level: u32,
    coupling: CouplingSpec,
) -> Result<SpectrumReport> {
    let opts = scenario.solver.options();
    let r = solve_constrained_eig(&problem.stiffness, &problem.mass, &problem.coupling, &problem.gradients, &opts)?;
    let oracle = expand_multiplicities(&oracle_spectrum(&scenario.geometry, r.eigenvalues.len())?, r.eigenvalues.len());
    let comparison = compare_spectrum(&r.eigenvalues, &oracle, scenario.compare.tolerance);
    let max = |v: &[f64]| v.iter().fold(0.0f64, |m, &x| m.max(x));
    Ok(SpectrumReport {
        name: scenario.name.clone(),
        level,
        coupling,
        n_dofs: problem.n_dofs(),
        n_multipliers: problem.n_multipliers(),
        kernel_dim: r.kernel_dim,
        max_residual: max(&r.residuals),
        max_constraint_residual: max(&r.constraint_residuals),
        eigenvalues: r.eigenvalues,
        comparison,
        path: r.path,
        iterations: r.iterations,
    })
}

/// One cell of an inf-sup sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct InfSupRow {
    pub level: u32,
    pub parameter: SweepParameter,
    pub n_dofs: usize,
    pub n_multipliers: usize,
    pub beta: f64,
}

/// Inf-sup constants for every refinement level and coupling parameter.
/// The primal norm depends only on the level, so it is factored once per
/// level.
pub fn infsup_sweep(scenario: &Scenario, levels: &[u32], params: &[SweepParameter]) -> Result<Vec<InfSupRow>> {
    if levels.is_empty() || params.is_empty() {
        return Err(BenchError::invalid("sweep", "needs at least one level and one parameter"));
    }
    if params.iter().any(|p| p.apply(scenario.coupling) == CouplingSpec::Glue) {
        return Err(BenchError::invalid("coupling", "a glued problem has no multipliers to test"));
    }
    let mut rows = Vec::new();
    for &level in levels {
        let mut solver: Option<InfSupSolver> = None;
        for &parameter in params {
            let p = build_problem(scenario, level, parameter.apply(scenario.coupling))?;
            let s = match solver.take() {
                Some(s) => s,
                None => InfSupSolver::new(&p.hcurl_norm())?,
            };
            let beta = s.beta(&p.coupling, &p.multiplier_norm)?;
            solver = Some(s);
            rows.push(InfSupRow { level, parameter, n_dofs: p.n_dofs(), n_multipliers: p.n_multipliers(), beta });
        }
    }
    Ok(rows)
}

/// Spectrum of one sweep cell with errors against the exact values.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: u32,
    pub parameter: SweepParameter,
    /// Mesh size relative to level 0.
    pub h: f64,
    pub report: SpectrumReport,
    pub oracle: Vec<f64>,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSweep {
    pub rows: Vec<ConvergenceRow>,
    /// Fitted order of the tracked eigenvalue, per parameter.
    pub orders: Vec<(SweepParameter, Option<f64>)>,
    pub track: Option<usize>,
}

/// Spectra over levels and parameters; with `track` set, the convergence
/// order of that (1-based) eigenvalue is fitted for each parameter.
pub fn convergence_sweep(
    scenario: &Scenario,
    levels: &[u32],
    params: &[SweepParameter],
    track: Option<usize>,
) -> Result<ConvergenceSweep> {
    if levels.is_empty() || params.is_empty() {
        return Err(BenchError::invalid("sweep", "needs at least one level and one parameter"));
    }
    if let Some(k) = track {
        if k == 0 || k > scenario.solver.n_modes {
            return Err(BenchError::invalid("sweep.track", format!("must lie in 1..={}", scenario.solver.n_modes)));
        }
    }
    let mut rows = Vec::new();
    let mut orders = Vec::new();
    for &parameter in params {
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for &level in levels {
            let report = run_spectrum(scenario, level, parameter.apply(scenario.coupling))?;
            let oracle = expand_multiplicities(
                &oracle_spectrum(&scenario.geometry, report.eigenvalues.len())?,
                report.eigenvalues.len(),
            );
            let errors = report.indexwise_errors(&oracle);
            let h = 0.5f64.powi(level as i32);
            if let Some(k) = track {
                errs.push(errors[k - 1]);
                hs.push(h);
            }
            rows.push(ConvergenceRow { level, parameter, h, report, oracle, errors });
        }
        let order = if track.is_some() { estimate_order(&errs, &hs).ok() } else { None };
        orders.push((parameter, order));
    }
    Ok(ConvergenceSweep { rows, orders, track })
}

/// Writes `A`, `M`, `B`, the two inf-sup norms and the discrete gradient
/// as MatrixMarket files into `dir`.
pub fn export_matrices(problem: &SaddleProblem, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let items: [(&str, &CsrMatrix); 6] = [
        ("stiffness", &problem.stiffness),
        ("mass", &problem.mass),
        ("coupling", &problem.coupling),
        ("hcurl_norm", &problem.hcurl_norm()),
        ("multiplier_norm", &problem.multiplier_norm),
        ("gradients", &problem.gradients),
    ];
    let mut out = Vec::new();
    for (name, m) in items {
        let path = dir.join(format!("{name}.mtx"));
        write_matrix_market(m, BufWriter::new(File::create(&path)?))?;
        out.push(path);
    }
    Ok(out)
}
