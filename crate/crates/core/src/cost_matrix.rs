//! Sparse symmetric cost matrix with an empty diagonal.
//!
//! The solver only ever reads whole rows, so storage is compressed sparse
//! rows with column-sorted entries. Construction symmetrizes arbitrary
//! triplet input as `(A + A')/2` and drops diagonal entries: with unit-norm
//! columns they only shift the objective by a constant.

use crate::error::Error;
use crate::factor::FactorMatrix;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl CostMatrix {
    /// Builds the symmetrized matrix from directed triplets `(i, j, w)`.
    ///
    /// Duplicate cells are summed first, then the matrix is symmetrized by
    /// averaging `(i,j)` with `(j,i)`; diagonal triplets are silently
    /// dropped. Entries that sum to exactly zero are kept, so the sparsity
    /// pattern is the set of unordered pairs that appeared in the input.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, w) in triplets {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, n });
            }
            if !w.is_finite() {
                return Err(Error::NonFinite {
                    place: format!("triplet ({i}, {j})"),
                });
            }
            if i == j {
                continue;
            }
            let key = (i.min(j), i.max(j));
            *pairs.entry(key).or_insert(0.0) += w;
        }

        // (A + A')/2 assigns half the accumulated pair weight to both cells.
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(lo, hi), &total) in &pairs {
            let half = total / 2.0;
            rows[lo].push((hi, half));
            rows[hi].push((lo, half));
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut weights = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(j, _)| j);
            for (j, w) in row {
                cols.push(j);
                weights.push(w);
            }
            row_ptr.push(cols.len());
        }
        Ok(CostMatrix { n, row_ptr, cols, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Iterates `(column, weight)` pairs of row `i`, columns ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.weights[span].iter().copied())
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[span.clone()].binary_search(&j) {
            Ok(pos) => self.weights[span][pos],
            Err(_) => 0.0,
        }
    }

    /// `g_i = sum_{j != i} c_ij v_j` written into `out` (length k).
    pub fn row_gather_into(&self, i: usize, v: &FactorMatrix, out: &mut [f64]) {
        debug_assert_eq!(v.n(), self.n);
        debug_assert_eq!(out.len(), v.k());
        out.fill(0.0);
        for (j, w) in self.row(i) {
            let col = v.column(j);
            for (o, &x) in out.iter_mut().zip(col) {
                *o += w * x;
            }
        }
    }

    pub fn row_gather(&self, i: usize, v: &FactorMatrix) -> Vec<f64> {
        let mut out = vec![0.0; v.k()];
        self.row_gather_into(i, v, &mut out);
        out
    }

    /// Max absolute row sum, used for scale-aware tolerances.
    pub fn infinity_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, w)| w.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}
