//! Open knot vectors and B-spline bases.
//!
//! Knot vectors live on the parametric interval `[0, 1]`. Basis functions are
//! evaluated as right limits everywhere except at `1`, where the left limit is
//! taken so that the last function interpolates.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplineError {
    #[error("knot vector of degree {degree} needs at least {needed} knots, got {got}")]
    TooShort { degree: usize, needed: usize, got: usize },
    #[error("knot vector must start with {0} zeros and end with {0} ones")]
    NotOpen(usize),
    #[error("knots must be non-decreasing inside [0, 1]")]
    Unsorted,
    #[error("interior knot {value} has multiplicity {mult}, more than {max} allowed")]
    Multiplicity { value: f64, mult: usize, max: usize },
    #[error("regularity {r} is invalid for degree {p}")]
    Regularity { p: usize, r: i64 },
    #[error("at least one element is required")]
    NoElements,
    #[error("degree {0} has no derived space")]
    NoDerived(usize),
    #[error("cannot reduce degree {from} to {to}: interior knot {value} has multiplicity {mult}")]
    Reduction { from: usize, to: usize, value: f64, mult: usize },
    #[error("parameter {0} lies outside [0, 1]")]
    OutOfRange(f64),
}

/// Open knot vector of a given degree.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

/// Active basis functions at one parameter: `values[k][j]` is the `k`-th
/// derivative of function `first + j`.
#[derive(Debug, Clone)]
pub struct BasisValues {
    pub first: usize,
    pub values: Vec<Vec<f64>>,
}

impl KnotVector {
    /// Validates an open knot vector. Interior multiplicities up to `degree + 1`
    /// are accepted so that derived vectors of `C^0` spaces stay representable.
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self, SplineError> {
        let needed = 2 * (degree + 1);
        if knots.len() < needed {
            return Err(SplineError::TooShort { degree, needed, got: knots.len() });
        }
        if knots.windows(2).any(|w| !(w[0] <= w[1])) || knots[0] < 0.0 || knots[knots.len() - 1] > 1.0 {
            return Err(SplineError::Unsorted);
        }
        let n = knots.len();
        if knots[..=degree].iter().any(|&k| k != 0.0) || knots[n - degree - 1..].iter().any(|&k| k != 1.0) {
            return Err(SplineError::NotOpen(degree + 1));
        }
        if knots[degree + 1] == 0.0 || knots[n - degree - 2] == 1.0 {
            return Err(SplineError::NotOpen(degree + 1));
        }
        let kv = Self { degree, knots };
        for (value, mult) in kv.interior_breaks() {
            if mult > degree + 1 {
                return Err(SplineError::Multiplicity { value, mult, max: degree + 1 });
            }
        }
        Ok(kv)
    }

    /// Uniform open knot vector with `n_el` elements and global `C^r` continuity.
    /// `r = -1` gives a discontinuous space.
    pub fn open_uniform(degree: usize, n_el: usize, regularity: i64) -> Result<Self, SplineError> {
        let breaks: Vec<f64> = (0..=n_el).map(|k| k as f64 / n_el as f64).collect();
        Self::from_breakpoints(degree, &breaks, regularity)
    }

    /// Open knot vector with `n_el` elements whose lengths grow geometrically
    /// by `ratio` away from the end `toward` (0 or 1).
    pub fn graded(degree: usize, n_el: usize, regularity: i64, ratio: f64, toward: usize) -> Result<Self, SplineError> {
        if n_el == 0 {
            return Err(SplineError::NoElements);
        }
        let sizes: Vec<f64> = (0..n_el).map(|i| ratio.powi(i as i32)).collect();
        let total: f64 = sizes.iter().sum();
        let mut breaks = vec![0.0];
        let mut acc = 0.0;
        for s in &sizes[..n_el - 1] {
            acc += s / total;
            breaks.push(acc);
        }
        breaks.push(1.0);
        if toward == 1 {
            breaks = breaks.iter().rev().map(|b| 1.0 - b).collect();
            breaks[0] = 0.0;
            let last = breaks.len() - 1;
            breaks[last] = 1.0;
        }
        Self::from_breakpoints(degree, &breaks, regularity)
    }

    /// Open knot vector over the given strictly increasing breakpoints, with
    /// every interior breakpoint repeated `degree - regularity` times.
    pub fn from_breakpoints(degree: usize, breaks: &[f64], regularity: i64) -> Result<Self, SplineError> {
        if breaks.len() < 2 {
            return Err(SplineError::NoElements);
        }
        if regularity < -1 || regularity >= degree as i64 {
            return Err(SplineError::Regularity { p: degree, r: regularity });
        }
        if breaks[0] != 0.0 || breaks[breaks.len() - 1] != 1.0 || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SplineError::Unsorted);
        }
        let mult = (degree as i64 - regularity) as usize;
        let mut knots = vec![0.0; degree + 1];
        for &b in &breaks[1..breaks.len() - 1] {
            knots.extend(std::iter::repeat_n(b, mult));
        }
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(degree, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn n_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Distinct knot values in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = Vec::new();
        for &k in &self.knots {
            if b.last() != Some(&k) {
                b.push(k);
            }
        }
        b
    }

    pub fn n_elements(&self) -> usize {
        self.breakpoints().len() - 1
    }

    /// Interior breakpoints together with their multiplicities.
    pub fn interior_breaks(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &k in &self.knots[self.degree + 1..self.knots.len() - self.degree - 1] {
            match out.last_mut() {
                Some((v, m)) if *v == k => *m += 1,
                _ => out.push((k, 1)),
            }
        }
        out
    }

    /// Index `i` of the knot span `[t_i, t_{i+1})` containing `x`; the last
    /// nonempty span is used at `x = 1`.
    pub fn find_span(&self, x: f64) -> Result<usize, SplineError> {
        if !(0.0..=1.0).contains(&x) {
            return Err(SplineError::OutOfRange(x));
        }
        let n = self.n_basis();
        if x >= self.knots[n] {
            return Ok(n - 1);
        }
        // Largest i with t_i <= x.
        let i = self.knots.partition_point(|&t| t <= x) - 1;
        Ok(i.max(self.degree))
    }

    /// Span index of each element, in element order.
    pub fn element_spans(&self) -> Vec<usize> {
        (self.degree..self.n_basis()).filter(|&i| self.knots[i] < self.knots[i + 1]).collect()
    }

    /// Values and derivatives up to order `nder` of the `degree + 1` functions
    /// active at `x`.
    pub fn eval(&self, x: f64, nder: usize) -> Result<BasisValues, SplineError> {
        let span = self.find_span(x)?;
        Ok(self.eval_in_span(span, x, nder))
    }

    /// Same as [`KnotVector::eval`] with a known span, which lets callers take
    /// one-sided limits at element boundaries.
    pub fn eval_in_span(&self, span: usize, x: f64, nder: usize) -> BasisValues {
        let p = self.degree;
        let t = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = x - t[span + 1 - j];
            right[j] = t[span + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let tmp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * tmp;
                saved = left[j - r] * tmp;
            }
            ndu[j][j] = saved;
        }
        let mut ders = vec![vec![0.0; p + 1]; nder + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = [vec![0.0; p + 1], vec![0.0; p + 1]];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=nder.min(p) {
                let mut d = 0.0;
                let rk = r as i64 - k as i64;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if r as i64 - 1 <= pk as i64 { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as i64) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut fac = p as f64;
        for k in 1..=nder.min(p) {
            for v in ders[k].iter_mut() {
                *v *= fac;
            }
            fac *= (p - k) as f64;
        }
        BasisValues { first: span - p, values: ders }
    }

    /// Knot vector of the derivative space: the first and last knot are
    /// dropped and the degree decreases by one.
    pub fn derived(&self) -> Result<Self, SplineError> {
        if self.degree == 0 {
            return Err(SplineError::NoDerived(0));
        }
        Ok(Self { degree: self.degree - 1, knots: self.knots[1..self.knots.len() - 1].to_vec() })
    }

    /// Same breakpoints at degree `q < degree`, obtained by removing
    /// `degree - q` end repetitions. Interior multiplicities must not exceed `q`.
    pub fn reduce_to_degree(&self, q: usize) -> Result<Self, SplineError> {
        if q == 0 || q >= self.degree {
            return Err(SplineError::Regularity { p: self.degree, r: q as i64 });
        }
        for (value, mult) in self.interior_breaks() {
            if mult > q {
                return Err(SplineError::Reduction { from: self.degree, to: q, value, mult });
            }
        }
        let cut = self.degree - q;
        Ok(Self { degree: q, knots: self.knots[cut..self.knots.len() - cut].to_vec() })
    }

    /// Greville abscissae, one per basis function.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        (0..self.n_basis())
            .map(|i| {
                if p == 0 {
                    0.5 * (self.knots[i] + self.knots[i + 1])
                } else {
                    self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64
                }
            })
            .collect()
    }

    /// Mirror image under `x -> 1 - x`.
    pub fn reversed(&self) -> Self {
        let knots = self.knots.iter().rev().map(|&k| 1.0 - k).collect();
        Self { degree: self.degree, knots }
    }

    /// Entries `(row, col, value)` of the matrix mapping spline coefficients
    /// to the coefficients of the derivative in the derived basis.
    pub fn derivative_entries(&self) -> Vec<(usize, usize, f64)> {
        let p = self.degree;
        let t = &self.knots;
        let mut out = Vec::with_capacity(2 * self.n_basis());
        if p == 0 {
            return out;
        }
        for i in 0..self.n_basis() - 1 {
            let len = t[i + p + 1] - t[i + 1];
            if len <= 0.0 {
                continue;
            }
            let c = p as f64 / len;
            out.push((i, i, -c));
            out.push((i, i + 1, c));
        }
        out
    }

    /// Equality of knot values up to `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.degree == other.degree
            && self.knots.len() == other.knots.len()
            && self.knots.iter().zip(&other.knots).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Lexicographic index with the first direction running fastest.
pub fn lex_index(idx: &[usize], dims: &[usize]) -> usize {
    let mut k = 0;
    for d in (0..idx.len()).rev() {
        k = k * dims[d] + idx[d];
    }
    k
}

/// Inverse of [`lex_index`].
pub fn lex_split(mut k: usize, dims: &[usize], out: &mut [usize]) {
    for d in 0..dims.len() {
        out[d] = k % dims[d];
        k /= dims[d];
    }
}
