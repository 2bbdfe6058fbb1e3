use super::{ConvergenceSweep, InfSupRow, Result, SpectrumReport, SweepParameter};
use std::f64::consts::PI;
use std::io::Write;

/// Version tag written as the first column of every CSV row. Bumped on any
/// change of column layout.
pub const CSV_SCHEMA_VERSION: u32 = 1;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Resonance frequency in GHz of the eigenvalue `omega^2 / c^2` on a
/// geometry whose unit length is `unit_m` meters.
pub fn frequency_ghz(lambda: f64, unit_m: f64) -> f64 {
    lambda.max(0.0).sqrt() * SPEED_OF_LIGHT / (2.0 * PI * unit_m) / 1e9
}

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

/// One row per computed eigenvalue:
/// `schema,index,eigenvalue,oracle,rel_error,status[,frequency_ghz]`.
/// Spurious values leave the oracle columns empty.
pub fn write_spectrum_csv<W: Write>(report: &SpectrumReport, unit_m: Option<f64>, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["schema", "index", "eigenvalue", "oracle", "rel_error", "status"];
    if unit_m.is_some() {
        header.push("frequency_ghz");
    }
    out.write_record(&header)?;
    let mut matched = report.comparison.matched.iter().peekable();
    for (i, &c) in report.eigenvalues.iter().enumerate() {
        let pair = matched.next_if(|p| p.computed.to_bits() == c.to_bits());
        let mut rec = vec![CSV_SCHEMA_VERSION.to_string(), (i + 1).to_string(), num(c)];
        match pair {
            Some(p) => rec.extend([num(p.oracle), num(p.rel_error), "matched".into()]),
            None => rec.extend([String::new(), String::new(), "spurious".into()]),
        }
        if let Some(u) = unit_m {
            rec.push(num(frequency_ghz(c, u)));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Wide table, one row per level:
/// `schema,level,ndof,nmult_<p>,infsup_<p>,...` for each parameter `p` in
/// order of first appearance.
pub fn write_infsup_csv<W: Write>(rows: &[InfSupRow], w: W) -> Result<()> {
    let mut params: Vec<SweepParameter> = Vec::new();
    let mut levels: Vec<u32> = Vec::new();
    for r in rows {
        if !params.contains(&r.parameter) {
            params.push(r.parameter);
        }
        if !levels.contains(&r.level) {
            levels.push(r.level);
        }
    }
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["schema".to_string(), "level".into(), "ndof".into()];
    for p in &params {
        header.push(format!("nmult_{}", p.label()));
        header.push(format!("infsup_{}", p.label()));
    }
    out.write_record(&header)?;
    for &level in &levels {
        let at = |p: &SweepParameter| rows.iter().find(|r| r.level == level && r.parameter == *p);
        let ndof = rows.iter().find(|r| r.level == level).map_or(0, |r| r.n_dofs);
        let mut rec = vec![CSV_SCHEMA_VERSION.to_string(), level.to_string(), ndof.to_string()];
        for p in &params {
            match at(p) {
                Some(r) => rec.extend([r.n_multipliers.to_string(), num(r.beta)]),
                None => rec.extend([String::new(), String::new()]),
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Long table, one row per eigenvalue of every sweep cell:
/// `schema,level,param,ndof,index,eigenvalue,oracle,rel_error`, with
/// errors taken index by index against the exact spectrum.
pub fn write_convergence_csv<W: Write>(sweep: &ConvergenceSweep, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["schema", "level", "param", "ndof", "index", "eigenvalue", "oracle", "rel_error"])?;
    for row in &sweep.rows {
        for (i, &c) in row.report.eigenvalues.iter().enumerate() {
            let (o, e) = match (row.oracle.get(i), row.errors.get(i)) {
                (Some(&o), Some(&e)) => (num(o), num(e)),
                _ => (String::new(), String::new()),
            };
            out.write_record([
                CSV_SCHEMA_VERSION.to_string(),
                row.level.to_string(),
                row.parameter.label(),
                row.report.n_dofs.to_string(),
                (i + 1).to_string(),
                num(c),
                o,
                e,
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}
