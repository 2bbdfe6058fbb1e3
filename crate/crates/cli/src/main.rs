use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use iga_mortar::bench::{
    build_problem, convergence_sweep, export_matrices, frequency_ghz, infsup_sweep, oracle_spectrum, run_spectrum,
    write_convergence_csv, write_infsup_csv, write_spectrum_csv, BenchError, Scenario, SweepParameter,
};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Maxwell cavity eigenvalues with isogeometric mortar and modal couplings.
#[derive(Parser)]
#[command(name = "iga-mortar", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lowest eigenvalues of a scenario, matched against the exact spectrum.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Also report frequencies in GHz for this geometry unit in meters.
        #[arg(long, value_name = "UNIT_M")]
        frequency_scale: Option<f64>,
    },
    /// Inf-sup constants over refinement levels and coupling parameters.
    Infsup {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Spectra over refinement levels with convergence orders.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
        /// 1-based index of the eigenvalue whose order is fitted.
        #[arg(long)]
        track: Option<usize>,
    },
    /// Writes the assembled matrices in MatrixMarket format.
    ExportMatrices {
        /// Scenario file.
        scenario: PathBuf,
        /// Refinement level; defaults to the scenario's.
        #[arg(long)]
        level: Option<u32>,
        /// Output directory; defaults to the scenario's `output.matrices`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file.
    scenario: PathBuf,
    /// CSV output path; defaults to the scenario's `output.csv`.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Refinement level of single runs; defaults to the scenario's.
    #[arg(long)]
    level: Option<u32>,
}

#[derive(Args)]
struct SweepArgs {
    /// Refinement levels, overriding the scenario's sweep.
    #[arg(long, value_delimiter = ',')]
    levels: Vec<u32>,
    /// Swept parameter as `q=1,2` or `modes=1,15,26`.
    #[arg(long)]
    sweep: Option<String>,
}

fn parse_sweep(text: &str) -> anyhow::Result<Vec<SweepParameter>> {
    let (key, values) = text.split_once('=').context("expected `q=...` or `modes=...`")?;
    let values: Vec<usize> = values
        .split(',')
        .map(|v| v.trim().parse().with_context(|| format!("bad sweep value `{v}`")))
        .collect::<Result<_, _>>()?;
    Ok(match key.trim() {
        "q" => values.into_iter().map(SweepParameter::Q).collect(),
        "modes" => values.into_iter().map(SweepParameter::Modes).collect(),
        other => bail!("unknown sweep parameter `{other}`"),
    })
}

fn sweep_plan(s: &Scenario, args: &SweepArgs) -> anyhow::Result<(Vec<u32>, Vec<SweepParameter>)> {
    let levels = if !args.levels.is_empty() {
        args.levels.clone()
    } else if let Some(sw) = &s.sweep {
        sw.levels.clone()
    } else {
        vec![s.level]
    };
    let params = match &args.sweep {
        Some(t) => parse_sweep(t)?,
        None => s.sweep_parameters(),
    };
    Ok((levels, params))
}

fn csv_target(common: &Common, s: &Scenario) -> Option<PathBuf> {
    common.csv.clone().or_else(|| s.output.csv.as_ref().map(PathBuf::from))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let out = &mut std::io::stdout().lock();
    match cli.command {
        Command::Spectrum { common, frequency_scale } => {
            let s = Scenario::load(&common.scenario)?;
            if let Some(u) = frequency_scale {
                if !(u > 0.0) {
                    return Err(BenchError::Invalid {
                        field: "frequency-scale".into(),
                        reason: "must be positive".into(),
                    }
                    .into());
                }
            }
            let level = common.level.unwrap_or(s.level);
            let t = Instant::now();
            let r = run_spectrum(&s, level, s.coupling)?;
            writeln!(out, "{}: level {level}, {} dofs, {} multipliers", r.name, r.n_dofs, r.n_multipliers)?;
            writeln!(
                out,
                "kernel {}, {:?} path, {} iterations, residual {:.1e}, constraint {:.1e}, {:.1} s",
                r.kernel_dim,
                r.path,
                r.iterations,
                r.max_residual,
                r.max_constraint_residual,
                t.elapsed().as_secs_f64()
            )?;
            let oracle = oracle_spectrum(&s.geometry, r.eigenvalues.len())?;
            let label = |v: f64| oracle.iter().find(|m| m.value == v).map_or("", |m| m.label.as_str());
            let mut matched = r.comparison.matched.iter().peekable();
            for (i, &c) in r.eigenvalues.iter().enumerate() {
                let freq = frequency_scale.map(|u| format!("  {:.6} GHz", frequency_ghz(c, u))).unwrap_or_default();
                match matched.next_if(|p| p.computed.to_bits() == c.to_bits()) {
                    Some(p) => writeln!(
                        out,
                        "{:>4} {c:>16.9} {:>16.9} {:>10.2e}  {}{freq}",
                        i + 1,
                        p.oracle,
                        p.rel_error,
                        label(p.oracle)
                    )?,
                    None => writeln!(out, "{:>4} {c:>16.9} {:>16} {:>10}  spurious{freq}", i + 1, "", "")?,
                }
            }
            if !r.comparison.missed.is_empty() {
                writeln!(out, "missed: {:?}", r.comparison.missed)?;
            }
            if let Some(path) = csv_target(&common, &s) {
                write_spectrum_csv(&r, frequency_scale, create(&path)?)?;
            }
        }
        Command::Infsup { common, sweep } => {
            let s = Scenario::load(&common.scenario)?;
            let (levels, params) = sweep_plan(&s, &sweep)?;
            let t = Instant::now();
            let rows = infsup_sweep(&s, &levels, &params)?;
            writeln!(out, "{:>6} {:>8} {:>8} {:>8} {:>12}", "level", "param", "ndof", "nmult", "beta")?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>6} {:>8} {:>8} {:>8} {:>12.6}",
                    r.level,
                    r.parameter.label(),
                    r.n_dofs,
                    r.n_multipliers,
                    r.beta
                )?;
            }
            writeln!(out, "{:.1} s", t.elapsed().as_secs_f64())?;
            if let Some(path) = csv_target(&common, &s) {
                write_infsup_csv(&rows, create(&path)?)?;
            }
        }
        Command::Sweep { common, sweep, track } => {
            let s = Scenario::load(&common.scenario)?;
            let (levels, params) = sweep_plan(&s, &sweep)?;
            let track = track.or(s.sweep.as_ref().and_then(|sw| sw.track));
            let t = Instant::now();
            let sw = convergence_sweep(&s, &levels, &params, track)?;
            writeln!(out, "{:>6} {:>8} {:>8} {:>8} {:>12}", "level", "param", "ndof", "spurious", "max_error")?;
            for row in &sw.rows {
                let max = row.errors.iter().fold(0.0f64, |m, &e| m.max(e));
                writeln!(
                    out,
                    "{:>6} {:>8} {:>8} {:>8} {:>12.3e}",
                    row.level,
                    row.parameter.label(),
                    row.report.n_dofs,
                    row.report.comparison.spurious.len(),
                    max
                )?;
            }
            if let Some(k) = sw.track {
                for (p, order) in &sw.orders {
                    match order {
                        Some(o) => writeln!(out, "order of eigenvalue {k} ({}): {o:.3}", p.label())?,
                        None => writeln!(out, "order of eigenvalue {k} ({}): not enough levels", p.label())?,
                    }
                }
            }
            writeln!(out, "{:.1} s", t.elapsed().as_secs_f64())?;
            if let Some(path) = csv_target(&common, &s) {
                write_convergence_csv(&sw, create(&path)?)?;
            }
        }
        Command::ExportMatrices { scenario, level, out: dir } => {
            let s = Scenario::load(&scenario)?;
            let dir = dir
                .or_else(|| s.output.matrices.as_ref().map(PathBuf::from))
                .context("no output directory: pass --out or set output.matrices")?;
            let p = build_problem(&s, level.unwrap_or(s.level), s.coupling)?;
            for f in export_matrices(&p, &dir)? {
                writeln!(out, "{}", f.display())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<std::io::Error>().is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let invalid =
                matches!(e.downcast_ref::<BenchError>(), Some(BenchError::Invalid { .. } | BenchError::Parse(_)));
            ExitCode::from(if invalid { 2 } else { 1 })
        }
    }
}
