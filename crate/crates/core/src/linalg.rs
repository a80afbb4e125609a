//! Sparse storage and the banded Cholesky factorization used by the time
//! stepper.
//!
//! Node numbering on the uniform grid is row-major, so every operator
//! assembled there has a lower bandwidth equal to the grid width. A dense
//! band factor is small (`n * (p + 1)` entries) and its triangular solves run
//! over contiguous memory, which is what dominates the solver's run time.

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for &(i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            rows[i].push((j, v));
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let mut iter = row.into_iter().peekable();
            while let Some((j, mut v)) = iter.next() {
                while let Some(&(jn, vn)) = iter.peek() {
                    if jn != j {
                        break;
                    }
                    v += vn;
                    iter.next();
                }
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        }
    }

    pub fn diagonal_from(values: &[f64]) -> Self {
        let n = values.len();
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: values.to_vec(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.indptr[i]..self.indptr[i + 1];
        match self.indices[range.clone()].binary_search(&j) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let start = self.indptr[i];
            let end = self.indptr[i + 1];
            let mut acc = 0.0;
            for k in start..end {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yi = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.nrows);
        let mut total = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            let start = self.indptr[i];
            let end = self.indptr[i + 1];
            let mut acc = 0.0;
            for k in start..end {
                acc += self.values[k] * y[self.indices[k]];
            }
            total += xi * acc;
        }
        total
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    /// Extracts `A[rows, cols]`. Both index lists must be strictly increasing.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_pos = vec![usize::MAX; self.ncols];
        for (p, &c) in cols.iter().enumerate() {
            col_pos[c] = p;
        }
        let mut triplets = Vec::new();
        for (new_i, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                let p = col_pos[j];
                if p != usize::MAX {
                    triplets.push((new_i, p, v));
                }
            }
        }
        CsrMatrix::from_triplets(rows.len(), cols.len(), &triplets)
    }

    /// `alpha * self + beta * other`; both must share a shape.
    pub fn linear_combination(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            triplets.extend(self.row(i).map(|(j, v)| (i, j, alpha * v)));
            triplets.extend(other.row(i).map(|(j, v)| (i, j, beta * v)));
        }
        CsrMatrix::from_triplets(self.nrows, self.ncols, &triplets)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// Largest `|i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        let mut p = 0;
        for i in 0..self.nrows {
            for (j, _) in self.row(i) {
                p = p.max(i.abs_diff(j));
            }
        }
        p
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in dense.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        dense
    }
}

/// `L L^T` factor of a symmetric positive definite band matrix.
///
/// Row `i` of `L` is stored in `band[i * (p + 1)..(i + 1) * (p + 1)]`, with
/// column `j` at offset `j + p - i` for `i - p <= j <= i`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    p: usize,
    band: Vec<f64>,
    inv_diag: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!(
                "cannot factor a {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        let p = a.bandwidth();
        let w = p + 1;
        let mut band = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in a.row(i) {
                if j <= i {
                    band[i * w + j + p - i] = v;
                }
            }
        }
        let mut inv_diag = vec![0.0; n];
        for i in 0..n {
            let lo_i = i.saturating_sub(p);
            for j in lo_i..=i {
                let lo = lo_i.max(j.saturating_sub(p));
                let mut s = band[i * w + j + p - i];
                let row_i = &band[i * w + lo + p - i..i * w + j + p - i];
                let row_j = &band[j * w + lo + p - j..j * w + p];
                s -= dot(row_i, row_j);
                if j == i {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Numeric(format!(
                            "matrix is not positive definite (pivot {s:e} at row {i})"
                        )));
                    }
                    let d = s.sqrt();
                    band[i * w + p] = d;
                    inv_diag[i] = 1.0 / d;
                } else {
                    band[i * w + j + p - i] = s * inv_diag[j];
                }
            }
        }
        Ok(BandedCholesky {
            n,
            p,
            band,
            inv_diag,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Overwrites `x` (holding the right-hand side) with `A^{-1} x`.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n, "right-hand side has the wrong length");
        let p = self.p;
        let w = p + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(p);
            let row = &self.band[i * w + lo + p - i..i * w + p];
            let s = x[i] - dot(row, &x[lo..i]);
            x[i] = s * self.inv_diag[i];
        }
        for i in (0..self.n).rev() {
            let xi = x[i] * self.inv_diag[i];
            x[i] = xi;
            let lo = i.saturating_sub(p);
            let row = &self.band[i * w + lo + p - i..i * w + p];
            for (xk, &l) in x[lo..i].iter_mut().zip(row) {
                *xk -= l * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four accumulators let the compiler vectorize without reassociating.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
