use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BesselError {
    #[error("argument {0} outside the supported range [0, {MAX_ARG}]")]
    Argument(f64),
    #[error("zero index must start at 1")]
    ZeroIndex,
}

/// Largest supported argument.
pub const MAX_ARG: f64 = 200.0;

/// Arguments below this use the ascending series.
const SERIES_LIMIT: f64 = 4.0;

/// Step of the sign-change scan used to bracket zeros.
const SCAN_STEP: f64 = 0.05;

fn check(x: f64) -> Result<(), BesselError> {
    if !(0.0..=MAX_ARG).contains(&x) {
        return Err(BesselError::Argument(x));
    }
    Ok(())
}

/// Ascending series `sum_k (-1)^k (x/2)^(2k+m) / (k! (k+m)!)`.
fn series(m: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = 1.0;
    for i in 1..=m {
        term *= h / i as f64;
    }
    let mut sum = term;
    let h2 = h * h;
    for k in 1..200 {
        term *= -h2 / (k as f64 * (k + m) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Miller's backward recurrence normalized by `J_0 + 2 sum J_2k = 1`.
fn miller(m: usize, x: f64) -> f64 {
    let start = 2 * ((m.max(x as usize) + 20 + (40.0 * m.max(x as usize) as f64).sqrt() as usize) / 2);
    let (mut jp, mut j) = (0.0f64, 1e-300f64);
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            result *= 1e-250;
            norm *= 1e-250;
        }
        // `j` now holds J_{k-1}.
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * j;
        }
        if k - 1 == m {
            result = j;
        }
    }
    norm += j;
    result / norm
}

/// Bessel function of the first kind `J_m(x)`.
pub fn bessel_j(m: usize, x: f64) -> Result<f64, BesselError> {
    check(x)?;
    Ok(if x <= SERIES_LIMIT { series(m, x) } else { miller(m, x) })
}

/// Derivative `J_m'(x)`.
pub fn bessel_j_prime(m: usize, x: f64) -> Result<f64, BesselError> {
    if m == 0 {
        return Ok(-bessel_j(1, x)?);
    }
    Ok(0.5 * (bessel_j(m - 1, x)? - bessel_j(m + 1, x)?))
}

/// `J_m(x) / x`, continuous at `x = 0`.
pub fn bessel_j_over_x(m: usize, x: f64) -> Result<f64, BesselError> {
    check(x)?;
    if m == 0 || x > 1e-3 {
        return Ok(bessel_j(m, x)? / x);
    }
    // Series of J_m(x)/x with the leading power (x/2)^(m-1) / (2 m!).
    let h = 0.5 * x;
    let mut term = 0.5;
    for i in 1..=m {
        term /= i as f64;
        if i < m {
            term *= h;
        }
    }
    Ok(term * (1.0 - h * h / (m + 1) as f64))
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Positive roots of `f` in `(0, xmax]`, ascending.
fn roots_below(f: &dyn Fn(f64) -> f64, xmax: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut a = SCAN_STEP;
    let mut fa = f(a);
    while a < xmax {
        let b = (a + SCAN_STEP).min(xmax);
        let fb = f(b);
        if fa == 0.0 {
            out.push(a);
        } else if (fa > 0.0) != (fb > 0.0) && fb != 0.0 {
            out.push(bisect(f, a, b));
        }
        a = b;
        fa = fb;
    }
    if fa == 0.0 {
        out.push(a);
    }
    out
}

/// Positive zeros of `J_m` not exceeding `xmax`.
pub fn bessel_zeros_below(m: usize, xmax: f64) -> Result<Vec<f64>, BesselError> {
    check(xmax)?;
    Ok(roots_below(&|x| bessel_j(m, x).unwrap(), xmax))
}

/// Positive zeros of `J_m'` not exceeding `xmax`. The zeros of `J_0'` are
/// exactly those of `J_1`.
pub fn bessel_prime_zeros_below(m: usize, xmax: f64) -> Result<Vec<f64>, BesselError> {
    if m == 0 {
        return bessel_zeros_below(1, xmax);
    }
    check(xmax)?;
    Ok(roots_below(&|x| bessel_j_prime(m, x).unwrap(), xmax))
}

fn kth(k: usize, m: usize, zeros: &dyn Fn(f64) -> Result<Vec<f64>, BesselError>) -> Result<f64, BesselError> {
    if k == 0 {
        return Err(BesselError::ZeroIndex);
    }
    // The k-th zero lies below m + pi (k + m/2 + 1).
    let bound = (m as f64 + std::f64::consts::PI * (k as f64 + 0.5 * m as f64 + 1.0)).min(MAX_ARG);
    zeros(bound)?.get(k - 1).copied().ok_or(BesselError::Argument(bound))
}

/// `k`-th positive zero `chi_{mk}` of `J_m`.
pub fn bessel_zero(m: usize, k: usize) -> Result<f64, BesselError> {
    kth(k, m, &|b| bessel_zeros_below(m, b))
}

/// `k`-th positive zero `chi'_{mk}` of `J_m'`.
pub fn bessel_prime_zero(m: usize, k: usize) -> Result<f64, BesselError> {
    kth(k, m, &|b| bessel_prime_zeros_below(m, b))
}
