use super::{GeometrySpec, Result};
use crate::waveguide_modes::{bessel_prime_zeros_below, bessel_zeros_below, MAX_ARG};
use std::f64::consts::PI;

/// A closed-form cavity eigenvalue `omega^2 eps mu` with its multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleMode {
    pub value: f64,
    pub multiplicity: usize,
    pub label: String,
}

/// Exact eigenvalues of the geometry in ascending order, enough of them
/// to cover `count` eigenvalues counted with multiplicity. Cube variants
/// all describe the unit cube.
pub fn oracle_spectrum(geometry: &GeometrySpec, count: usize) -> Result<Vec<OracleMode>> {
    let modes = match *geometry {
        GeometrySpec::Cube | GeometrySpec::CubeTwoPatches | GeometrySpec::CubeFourPatches => cube(count),
        GeometrySpec::Pillbox { radius, length } => pillbox(radius, length, count)?,
    };
    Ok(modes)
}

/// Values repeated by multiplicity, truncated to `count`.
pub fn expand_multiplicities(modes: &[OracleMode], count: usize) -> Vec<f64> {
    modes.iter().flat_map(|m| std::iter::repeat_n(m.value, m.multiplicity)).take(count).collect()
}

/// `pi^2 (k^2 + l^2 + m^2)` over triples with at least two nonzero
/// entries: one field per triple with a zero entry, two otherwise.
fn cube(count: usize) -> Vec<OracleMode> {
    let mut out = Vec::new();
    let mut total = 0;
    let mut s = 2usize;
    while total < count {
        let bound = (s as f64).sqrt() as usize;
        let mut mult = 0;
        let mut triples = Vec::new();
        for k in 0..=bound {
            for l in 0..=bound {
                for m in 0..=bound {
                    if k * k + l * l + m * m != s {
                        continue;
                    }
                    let nonzero = [k, l, m].iter().filter(|&&v| v > 0).count();
                    if nonzero >= 2 {
                        mult += if nonzero == 3 { 2 } else { 1 };
                        triples.push(format!("({k},{l},{m})"));
                    }
                }
            }
        }
        if mult > 0 {
            out.push(OracleMode { value: PI * PI * s as f64, multiplicity: mult, label: triples.join(" ") });
            total += mult;
        }
        s += 1;
    }
    out
}

/// TM_mnp: `(chi_mn / R)^2 + (p pi / L)^2` with `p >= 0`; TE_mnp with the
/// zeros of `J_m'` and `p >= 1`. Orders `m >= 1` come in cosine/sine pairs.
fn pillbox(r: f64, l: f64, count: usize) -> Result<Vec<OracleMode>> {
    let mut cutoff = (3.0 / r).powi(2) + (PI / l).powi(2);
    loop {
        let xmax = (r * cutoff.sqrt()).min(MAX_ARG);
        let mut modes = Vec::new();
        for m in 0.. {
            // Every zero of J_m and J_m' exceeds m.
            if m as f64 >= xmax {
                break;
            }
            let mult = if m == 0 { 1 } else { 2 };
            for (family, zeros, p0) in
                [("TM", bessel_zeros_below(m, xmax)?, 0usize), ("TE", bessel_prime_zeros_below(m, xmax)?, 1)]
            {
                for (n, chi) in zeros.iter().enumerate() {
                    for p in p0.. {
                        let value = (chi / r).powi(2) + (p as f64 * PI / l).powi(2);
                        if value > cutoff {
                            break;
                        }
                        modes.push(OracleMode { value, multiplicity: mult, label: format!("{family}{m}{}{p}", n + 1) });
                    }
                }
            }
        }
        if modes.iter().map(|m| m.multiplicity).sum::<usize>() >= count || xmax >= MAX_ARG {
            modes.sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| a.label.cmp(&b.label)));
            let mut total = 0;
            let keep = modes
                .iter()
                .take_while(|m| {
                    let before = total;
                    total += m.multiplicity;
                    before < count
                })
                .count();
            modes.truncate(keep);
            return Ok(modes);
        }
        cutoff *= 2.0;
    }
}
