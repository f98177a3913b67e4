//! Compressed sparse row storage for symmetric patterns and matrices.

use std::collections::BTreeSet;

/// Structural nonzeros of a square matrix, rows sorted, columns sorted
/// within each row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Build from per-row column sets.
    pub fn from_rows(rows: Vec<BTreeSet<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(rows.iter().map(|r| r.len()).sum());
        row_ptr.push(0);
        for r in rows {
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        SparsityPattern { n, row_ptr, col_idx }
    }

    pub fn dense(n: usize) -> Self {
        Self::from_rows((0..n).map(|_| (0..n).collect()).collect())
    }

    pub fn diagonal(n: usize) -> Self {
        Self::from_rows((0..n).map(|i| BTreeSet::from([i])).collect())
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.row(i).binary_search(&j).is_ok()
    }

    /// Position of `(i, j)` in `col_idx`, if present.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        self.row(i).binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).iter().all(|&j| self.contains(j, i)))
    }

    pub fn has_full_diagonal(&self) -> bool {
        (0..self.n).all(|i| self.contains(i, i))
    }

    /// Sorted `(row, col)` pairs.
    pub fn entries(&self) -> Vec<(usize, usize)> {
        (0..self.n).flat_map(|i| self.row(i).iter().map(move |&j| (i, j))).collect()
    }
}

/// Sparse matrix sharing the CSR layout of a [`SparsityPattern`].
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub pattern: SparsityPattern,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(pattern: SparsityPattern) -> Self {
        let values = vec![0.0; pattern.nnz()];
        CsrMatrix { pattern, values }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(SparsityPattern::diagonal(n));
        m.values.fill(1.0);
        m
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let pattern = SparsityPattern::from_rows(
            rows.iter()
                .enumerate()
                .map(|(i, r)| r.iter().enumerate().filter(|&(j, v)| *v != 0.0 || i == j).map(|(j, _)| j).collect())
                .collect(),
        );
        let values = pattern.entries().iter().map(|&(i, j)| rows[i][j]).collect();
        CsrMatrix { pattern, values }
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.position(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let p = &self.pattern;
        for (i, yi) in y.iter_mut().enumerate() {
            let (a, b) = (p.row_ptr[i], p.row_ptr[i + 1]);
            *yi = p.col_idx[a..b].iter().zip(&self.values[a..b]).map(|(&j, v)| v * x[j]).sum();
        }
    }

    /// Replace the matrix by `(A + A^T) / 2`; the pattern must be symmetric.
    pub fn symmetrize(&mut self) {
        let p = &self.pattern;
        for i in 0..p.n {
            for k in p.row_ptr[i]..p.row_ptr[i + 1] {
                let j = p.col_idx[k];
                if j > i {
                    let kt = p.position(j, i).expect("symmetric pattern");
                    let avg = 0.5 * (self.values[k] + self.values[kt]);
                    self.values[k] = avg;
                    self.values[kt] = avg;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n()]; self.n()];
        for (k, (i, j)) in self.pattern.entries().into_iter().enumerate() {
            d[i][j] = self.values[k];
        }
        d
    }
}
