//! Compressed-row sparse operators for fast application to dense states.
//!
//! Every operator in the model (ladder, Pauli, number) has O(D) nonzeros on
//! the D-dimensional joint space, so products against a dense D×D state cost
//! O(D²) instead of O(D³).

use super::matrix::{ComplexMatrix, C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Keeps every entry that is not exactly zero.
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let mut row_ptr = Vec::with_capacity(m.rows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m[(i, j)];
                if v != ZERO {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Builds from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut dense = ComplexMatrix::zeros(rows, cols);
        for &(i, j, v) in triplets {
            dense[(i, j)] += v;
        }
        Self::from_dense(&dense)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over the stored entries of row `i` as (column, value).
    #[inline]
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Iterates over all stored entries as (row, column, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.entries() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut t: Vec<(usize, usize, C64)> =
            self.entries().map(|(i, j, v)| (j, i, v.conj())).collect();
        t.sort_by_key(|&(i, j, _)| (i, j));
        Self::from_triplets(self.cols, self.rows, &t)
    }

    pub fn dot_sparse(&self, other: &SparseMatrix) -> Self {
        Self::from_dense(&self.to_dense().dot(&other.to_dense()))
    }

    /// out += s·(self · m), with m dense row-major `self.cols × n`.
    pub fn left_mul_acc(&self, s: C64, m: &[C64], n: usize, out: &mut [C64]) {
        debug_assert_eq!(m.len(), self.cols * n);
        debug_assert_eq!(out.len(), self.rows * n);
        for i in 0..self.rows {
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, v) in self.row(i) {
                let c = s * v;
                let m_row = &m[k * n..(k + 1) * n];
                for (o, &x) in out_row.iter_mut().zip(m_row) {
                    *o += c * x;
                }
            }
        }
    }

    /// out += s·(m · self), with m dense row-major `r × self.rows`.
    pub fn right_mul_acc(&self, s: C64, m: &[C64], r: usize, out: &mut [C64]) {
        debug_assert_eq!(m.len(), r * self.rows);
        debug_assert_eq!(out.len(), r * self.cols);
        for i in 0..r {
            let m_row = &m[i * self.rows..(i + 1) * self.rows];
            let out_row = &mut out[i * self.cols..(i + 1) * self.cols];
            for (k, &x) in m_row.iter().enumerate() {
                if x == ZERO {
                    continue;
                }
                let c = s * x;
                for (j, v) in self.row(k) {
                    out_row[j] += c * v;
                }
            }
        }
    }

    /// out += s·(m · self†), with m dense row-major `r × self.cols`.
    ///
    /// Reads the rows of `self` directly, so no transposed copy is needed.
    pub fn right_mul_adjoint_acc(&self, s: C64, m: &[C64], r: usize, out: &mut [C64]) {
        debug_assert_eq!(m.len(), r * self.cols);
        debug_assert_eq!(out.len(), r * self.rows);
        for i in 0..r {
            let m_row = &m[i * self.cols..(i + 1) * self.cols];
            let out_row = &mut out[i * self.rows..(i + 1) * self.rows];
            for (j, o) in out_row.iter_mut().enumerate() {
                let mut acc = ZERO;
                for (k, v) in self.row(j) {
                    acc += m_row[k] * v.conj();
                }
                *o += s * acc;
            }
        }
    }

    /// Dense product self · m.
    pub fn left_mul(&self, m: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, m.rows());
        let mut out = ComplexMatrix::zeros(self.rows, m.cols());
        self.left_mul_acc(C64::new(1.0, 0.0), m.data(), m.cols(), out.data_mut());
        out
    }

    /// Dense product m · self.
    pub fn right_mul(&self, m: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(m.cols(), self.rows);
        let mut out = ComplexMatrix::zeros(m.rows(), self.cols);
        self.right_mul_acc(C64::new(1.0, 0.0), m.data(), m.rows(), out.data_mut());
        out
    }
}
