//! Sparse and dense matrix storage.
//!
//! `A[i][j]` is the weight of the edge `j -> i`, so row `i` lists the
//! in-edges of node `i` and column `j` lists the out-edges of node `j`.

use crate::error::{Error, Result};
use crate::weight::Weight;

pub type NodeId = usize;

/// Square or rectangular sparse matrix with both row and column views.
///
/// Duplicate coordinates are summed at construction, entries summing to an
/// exact zero are dropped, and both views are sorted by index.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<W = f64> {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    row_val: Vec<W>,
    col_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    col_val: Vec<W>,
}

impl<W: Weight> SparseMatrix<W> {
    pub fn from_triplets<I>(n_rows: usize, n_cols: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, W)>,
    {
        let mut triplets: Vec<(usize, usize, W)> = Vec::new();
        for (r, c, w) in entries {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidInput(format!(
                    "entry ({r}, {c}) outside a {n_rows}x{n_cols} matrix"
                )));
            }
            if !w.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite weight at ({r}, {c})"
                )));
            }
            triplets.push((r, c, w));
        }
        triplets.sort_by_key(|t| (t.0, t.1));

        let mut merged: Vec<(usize, usize, W)> = Vec::with_capacity(triplets.len());
        for (r, c, w) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 = last.2.clone() + w,
                _ => merged.push((r, c, w)),
            }
        }
        merged.retain(|t| !t.2.is_zero());
        Ok(Self::from_sorted_unique(n_rows, n_cols, merged))
    }

    fn from_sorted_unique(n_rows: usize, n_cols: usize, merged: Vec<(usize, usize, W)>) -> Self {
        let nnz = merged.len();
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_ptr = vec![0usize; n_cols + 1];
        for &(r, c, _) in &merged {
            row_ptr[r + 1] += 1;
            col_ptr[c + 1] += 1;
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        for j in 0..n_cols {
            col_ptr[j + 1] += col_ptr[j];
        }

        // Row-major order is the sort order, so the row view is a direct copy;
        // the column view is a counting-sort scatter, which keeps rows ascending.
        let mut row_idx = Vec::with_capacity(nnz);
        let mut row_val = Vec::with_capacity(nnz);
        let mut col_idx = vec![0usize; nnz];
        let mut col_val: Vec<Option<W>> = vec![None; nnz];
        let mut fill = col_ptr.clone();
        for (r, c, w) in merged {
            row_idx.push(c);
            row_val.push(w.clone());
            let slot = fill[c];
            col_idx[slot] = r;
            col_val[slot] = Some(w);
            fill[c] += 1;
        }
        SparseMatrix {
            n_rows,
            n_cols,
            row_ptr,
            row_idx,
            row_val,
            col_ptr,
            col_idx,
            col_val: col_val.into_iter().map(|w| w.expect("filled")).collect(),
        }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self::from_sorted_unique(n_rows, n_cols, Vec::new())
    }

    /// Builds a matrix from dense rows, skipping zeros.
    pub fn from_dense(rows: &[Vec<W>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    found: row.len(),
                    context: "dense row length",
                });
            }
            for (j, w) in row.iter().enumerate() {
                if !w.is_zero() {
                    entries.push((i, j, w.clone()));
                }
            }
        }
        Self::from_triplets(n_rows, n_cols, entries)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Entries `(col, weight)` of row `i`: the in-edges `j -> i`.
    pub fn row(&self, i: NodeId) -> impl Iterator<Item = (NodeId, &W)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(&self.row_val[range])
    }

    /// Entries `(row, weight)` of column `j`: the out-edges `j -> i`.
    pub fn col(&self, j: NodeId) -> impl Iterator<Item = (NodeId, &W)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(&self.col_val[range])
    }

    /// Row indices of column `j`, ascending.
    pub fn col_indices(&self, j: NodeId) -> &[NodeId] {
        &self.col_idx[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> Option<&W> {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.row_idx[range.clone()]
            .binary_search(&j)
            .ok()
            .map(|k| &self.row_val[range.start + k])
    }

    /// All entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (NodeId, NodeId, &W)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, w)| (i, j, w)))
    }

    pub fn max_abs(&self) -> f64 {
        self.row_val.iter().map(Weight::abs_f64).fold(0.0, f64::max)
    }

    pub fn map_weights<V: Weight>(&self, f: impl Fn(&W) -> V) -> SparseMatrix<V> {
        let mapped = self.entries().map(|(i, j, w)| (i, j, f(w)));
        SparseMatrix::from_triplets(self.n_rows, self.n_cols, mapped)
            .expect("mapping preserves coordinates")
    }

    pub fn to_f64(&self) -> SparseMatrix<f64> {
        self.map_weights(|w| w.to_f64())
    }

    pub fn transpose(&self) -> Self {
        let entries = self.entries().map(|(i, j, w)| (j, i, w.clone()));
        Self::from_triplets(self.n_cols, self.n_rows, entries).expect("transpose is in range")
    }

    pub fn to_dense(&self) -> Vec<Vec<W>> {
        let mut out = vec![vec![W::zero(); self.n_cols]; self.n_rows];
        for (i, j, w) in self.entries() {
            out[i][j] = w.clone();
        }
        out
    }

    /// Sparse product `self · other`.
    pub fn mul(&self, other: &SparseMatrix<W>) -> SparseMatrix<W> {
        assert_eq!(self.n_cols, other.n_rows, "inner dimensions");
        let mut entries = Vec::new();
        for i in 0..self.n_rows {
            for (k, w) in self.row(i) {
                for (j, v) in other.row(k) {
                    entries.push((i, j, w.clone() * v.clone()));
                }
            }
        }
        SparseMatrix::from_triplets(self.n_rows, other.n_cols, entries).expect("product in range")
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shift_diagonal(&self, shift: W) -> Self {
        let n = self.n_rows.min(self.n_cols);
        let entries = self
            .entries()
            .map(|(i, j, w)| (i, j, w.clone()))
            .chain((0..n).map(|i| (i, i, shift.clone())));
        Self::from_triplets(self.n_rows, self.n_cols, entries).expect("diagonal is in range")
    }
}

impl SparseMatrix<f64> {
    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let range = self.row_ptr[i]..self.row_ptr[i + 1];
            let mut acc = 0.0;
            for (j, w) in self.row_idx[range.clone()].iter().zip(&self.row_val[range]) {
                acc += w * x[*j];
            }
            *yi = acc;
        }
    }

    /// `y = Aᵀ x`.
    pub fn mul_transpose_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_rows);
        debug_assert_eq!(y.len(), self.n_cols);
        for (j, yj) in y.iter_mut().enumerate() {
            let range = self.col_ptr[j]..self.col_ptr[j + 1];
            let mut acc = 0.0;
            for (i, w) in self.col_idx[range.clone()].iter().zip(&self.col_val[range]) {
                acc += w * x[*i];
            }
            *yj = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                    context: "dense row length",
                });
            }
            data.extend_from_slice(row);
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_sparse(&self) -> SparseMatrix<f64> {
        SparseMatrix::from_dense(&self.to_rows()).expect("rectangular")
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
