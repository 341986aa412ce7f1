//! Minimal CSR matrix, just enough for Laplacians and Chebyshev recurrences.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

/// Square sparse matrix in compressed sparse row form.
///
/// Column indices inside each row are sorted ascending; duplicate entries are
/// summed at construction time, so the stored structure is canonical and two
/// matrices built from the same logical entries compare bit-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets. Duplicates are summed, explicit
    /// zeros are kept (callers filter beforehand when they matter).
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(Error::InvalidInput(format!(
                    "triplet ({r},{c}) out of bounds for {n}x{n} matrix"
                )));
            }
            sorted.push((r, c, v));
        }
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { n, row_ptr, col_idx, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries (col, value) of one row.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// y = self * x for a dense right-hand side with one column per feature.
    pub fn mul_dense(&self, x: &ArrayView2<'_, f64>) -> Array2<f64> {
        assert_eq!(x.nrows(), self.n, "dimension mismatch in sparse matmul");
        let cols = x.ncols();
        let mut y = Array2::<f64>::zeros((self.n, cols));
        for i in 0..self.n {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            let mut acc = y.row_mut(i);
            for k in lo..hi {
                let j = self.col_idx[k];
                let w = self.values[k];
                acc.scaled_add(w, &x.row(j));
            }
        }
        y
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "dimension mismatch in sparse matvec");
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        y
    }

    /// a*self + b*I as a new matrix. Missing diagonal entries are created.
    pub fn scale_add_identity(&self, a: f64, b: f64) -> Self {
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() + self.n);
        for (i, j, v) in self.iter_entries() {
            triplets.push((i, j, a * v));
        }
        for i in 0..self.n {
            triplets.push((i, i, b));
        }
        Self::from_triplets(self.n, &triplets).expect("indices already validated")
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut dense = Array2::<f64>::zeros((self.n, self.n));
        for (i, j, v) in self.iter_entries() {
            dense[[i, j]] += v;
        }
        dense
    }

    /// Row sums, i.e. weighted degrees when the matrix is an adjacency.
    pub fn row_sums(&self) -> Array1<f64> {
        Array1::from_iter((0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()))
    }

    /// Exact structural and value symmetry.
    pub fn is_symmetric(&self) -> bool {
        self.iter_entries().all(|(i, j, v)| {
            self.row(j)
                .find(|&(c, _)| c == i)
                .map(|(_, w)| w == v)
                .unwrap_or(false)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn triplets_sorted_and_summed() {
        let m = CsrMatrix::from_triplets(3, &[(1, 2, 0.5), (0, 1, 1.0), (1, 2, 0.25)]).unwrap();
        assert_eq!(m.nnz(), 2);
        let row1: Vec<_> = m.row(1).collect();
        assert_eq!(row1, vec![(2, 0.75)]);
    }

    #[test]
    fn mul_dense_matches_hand_product() {
        let m = CsrMatrix::from_triplets(2, &[(0, 1, -1.0), (1, 0, -1.0)]).unwrap();
        let x = array![[1.0, 2.0], [0.0, -1.0]];
        let y = m.mul_dense(&x.view());
        assert_eq!(y, array![[0.0, 1.0], [-1.0, -2.0]]);
    }

    #[test]
    fn scale_add_identity_creates_diagonal() {
        let m = CsrMatrix::from_triplets(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let s = m.scale_add_identity(2.0, -1.0);
        assert_eq!(s.to_dense(), array![[-1.0, 2.0], [2.0, -1.0]]);
    }

    #[test]
    fn out_of_bounds_triplet_rejected() {
        assert!(CsrMatrix::from_triplets(2, &[(0, 2, 1.0)]).is_err());
    }
}
