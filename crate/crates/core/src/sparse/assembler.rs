use super::CsrMatrix;

/// Accumulates element matrices into a square matrix whose sparsity pattern
/// is fixed up front from the element connectivity.
#[derive(Debug, Clone)]
pub struct CsrAssembler {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrAssembler {
    /// Pattern coupling every pair of indices that share an element.
    pub fn new(n: usize, elements: &[Vec<usize>]) -> Self {
        let mut of_row: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (e, dofs) in elements.iter().enumerate() {
            for &d in dofs {
                of_row[d].push(e as u32);
            }
        }
        let mut indptr = Vec::with_capacity(n + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut row: Vec<usize> = Vec::new();
        for elems in &of_row {
            row.clear();
            for &e in elems {
                row.extend_from_slice(&elements[e as usize]);
            }
            row.sort_unstable();
            row.dedup();
            indices.extend_from_slice(&row);
            indptr.push(indices.len());
        }
        let data = vec![0.0; indices.len()];
        Self { n, indptr, indices, data }
    }

    /// Adds `signs[i] * signs[j] * value(i, j)` at `(dofs[i], dofs[j])`.
    pub fn add(&mut self, dofs: &[usize], signs: &[f64], value: impl Fn(usize, usize) -> f64) {
        for (i, &r) in dofs.iter().enumerate() {
            let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
            let cols = &self.indices[lo..hi];
            for (j, &c) in dofs.iter().enumerate() {
                let k = cols.binary_search(&c).expect("entry inside the assembled pattern");
                self.data[lo + k] += signs[i] * signs[j] * value(i, j);
            }
        }
    }

    pub fn finish(self) -> CsrMatrix {
        CsrMatrix::from_parts(self.n, self.n, self.indptr, self.indices, self.data)
    }
}
