//! Minimal sparse matrix toolkit.
//!
//! Matrices are assembled as coordinate triplets and consolidated into CSR.
//! Consolidation sorts by (row, col), sums duplicates and drops entries whose
//! magnitude falls below `1e-14` times the largest absolute entry, so the
//! stored pattern is canonical regardless of assembly order.

use crate::scalar::{cast, Scalar};

/// Coordinate-format accumulator.
#[derive(Debug, Clone)]
pub struct Coo<T> {
    pub nrows: usize,
    pub ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> Coo<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, entries: Vec::new() }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != T::zero() {
            self.entries.push((row, col, value));
        }
    }

    pub fn to_csr(&self) -> Csr<T> {
        let mut entries = self.entries.clone();
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));

        let mut max_abs = T::zero();
        let mut merged: Vec<(usize, usize, T)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        for &(_, _, v) in &merged {
            if v.abs() > max_abs {
                max_abs = v.abs();
            }
        }
        let drop_tol = cast::<T>(1e-14) * max_abs;

        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(merged.len());
        let mut values = Vec::with_capacity(merged.len());
        for (r, c, v) in merged {
            if v.abs() <= drop_tol {
                continue;
            }
            indptr[r + 1] += 1;
            indices.push(c);
            values.push(v);
        }
        for i in 0..self.nrows {
            indptr[i + 1] += indptr[i];
        }
        Csr { nrows: self.nrows, ncols: self.ncols, indptr, indices, values }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr<T> {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> Csr<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![T::one(); n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut s = T::zero();
            for (&c, &v) in cols.iter().zip(vals) {
                s += v * x[c];
            }
            y[i] = s;
        }
    }

    pub fn matvec_alloc(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.matvec(x, &mut y);
        y
    }

    /// `y += A^T x`.
    pub fn matvec_transpose_add(&self, x: &[T], y: &mut [T]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for i in 0..self.nrows {
            let xi = x[i];
            if xi == T::zero() {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * xi;
            }
        }
    }

    pub fn matvec_transpose_alloc(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.ncols];
        self.matvec_transpose_add(x, &mut y);
        y
    }

    pub fn transpose(&self) -> Csr<T> {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let indptr = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        let mut next = counts;
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = next[c];
                indices[slot] = r;
                values[slot] = v;
                next[c] += 1;
            }
        }
        Csr { nrows: self.ncols, ncols: self.nrows, indptr, indices, values }
    }

    /// Sparse product `A^T A`, the Gram matrix of the columns.
    pub fn gram(&self) -> Csr<T> {
        let at = self.transpose();
        at.mul(self)
    }

    /// General CSR x CSR product.
    pub fn mul(&self, other: &Csr<T>) -> Csr<T> {
        assert_eq!(self.ncols, other.nrows);
        let n = other.ncols;
        let mut acc = vec![T::zero(); n];
        let mut marker = vec![usize::MAX; n];
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            let (cols, vals) = self.row(i);
            for (&k, &v) in cols.iter().zip(vals) {
                let (kcols, kvals) = other.row(k);
                for (&c, &w) in kcols.iter().zip(kvals) {
                    if marker[c] != i {
                        marker[c] = i;
                        acc[c] = T::zero();
                        touched.push(c);
                    }
                    acc[c] += v * w;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                indices.push(c);
                values.push(acc[c]);
            }
            indptr.push(indices.len());
        }
        Csr { nrows: self.nrows, ncols: n, indptr, indices, values }
    }

    /// `self + scale * other`, patterns merged.
    pub fn add_scaled(&self, other: &Csr<T>, scale: T) -> Csr<T> {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..self.nrows {
            let (ac, av) = self.row(i);
            let (bc, bv) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                let (col, val) = if q >= bc.len() || (p < ac.len() && ac[p] < bc[q]) {
                    let out = (ac[p], av[p]);
                    p += 1;
                    out
                } else if p >= ac.len() || bc[q] < ac[p] {
                    let out = (bc[q], scale * bv[q]);
                    q += 1;
                    out
                } else {
                    let out = (ac[p], av[p] + scale * bv[q]);
                    p += 1;
                    q += 1;
                    out
                };
                indices.push(col);
                values.push(val);
            }
            indptr.push(indices.len());
        }
        Csr { nrows: self.nrows, ncols: self.ncols, indptr, indices, values }
    }

    /// Adds `s` to every diagonal entry (pattern must already contain it,
    /// or the entry is inserted).
    pub fn add_diagonal(&self, s: T) -> Csr<T> {
        let n = self.nrows.min(self.ncols);
        let mut diag = Coo::new(self.nrows, self.ncols);
        for i in 0..n {
            diag.push(i, i, s);
        }
        self.add_scaled(&diag.to_csr(), T::one())
    }

    pub fn diagonal(&self) -> Vec<T> {
        let n = self.nrows.min(self.ncols);
        let mut d = vec![T::zero(); n];
        for i in 0..n {
            let (cols, vals) = self.row(i);
            if let Ok(pos) = cols.binary_search(&i) {
                d[i] = vals[pos];
            }
        }
        d
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => T::zero(),
        }
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for &v in &self.values {
            if v.abs() > m {
                m = v.abs();
            }
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.ncols]; self.nrows];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[i][c] = v;
            }
        }
        out
    }

    /// Stacks blocks row-wise and column-wise: `blocks[i][j]` becomes the
    /// (i, j) block of the result. All blocks in a block-row must share
    /// heights; all blocks in a block-column must share widths.
    pub fn from_blocks(blocks: &[Vec<&Csr<T>>]) -> Csr<T> {
        assert!(!blocks.is_empty() && !blocks[0].is_empty());
        let block_cols = blocks[0].len();
        let col_widths: Vec<usize> = (0..block_cols).map(|j| blocks[0][j].ncols).collect();
        let mut col_offsets = vec![0usize; block_cols + 1];
        for j in 0..block_cols {
            col_offsets[j + 1] = col_offsets[j] + col_widths[j];
        }
        let mut indptr = vec![0usize];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut nrows = 0usize;
        for row_blocks in blocks {
            assert_eq!(row_blocks.len(), block_cols);
            let h = row_blocks[0].nrows;
            for b in row_blocks.iter() {
                assert_eq!(b.nrows, h);
            }
            for (j, b) in row_blocks.iter().enumerate() {
                assert_eq!(b.ncols, col_widths[j]);
            }
            for r in 0..h {
                for (j, b) in row_blocks.iter().enumerate() {
                    let (cols, vals) = b.row(r);
                    for (&c, &v) in cols.iter().zip(vals) {
                        indices.push(col_offsets[j] + c);
                        values.push(v);
                    }
                }
                indptr.push(indices.len());
            }
            nrows += h;
        }
        Csr { nrows, ncols: col_offsets[block_cols], indptr, indices, values }
    }
}
