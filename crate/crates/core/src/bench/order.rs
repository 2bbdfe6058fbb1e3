use super::{BenchError, Result};

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn estimate_order(errors: &[f64], h: &[f64]) -> Result<f64> {
    if errors.len() != h.len() || errors.iter().chain(h).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(BenchError::BadSamples);
    }
    if errors.len() < 2 {
        return Err(BenchError::TooFewPoints(errors.len()));
    }
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(BenchError::BadSamples);
    }
    Ok(sxy / sxx)
}
