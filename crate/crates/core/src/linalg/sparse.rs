//! Compressed sparse row storage.
//!
//! [`CsrMatrix`] is a general rectangular matrix used for transformations
//! and projections. [`SparseSymMatrix`] wraps a square CSR matrix holding both
//! triangles of a symmetric operator; it is built through [`SymAssembler`],
//! which accepts entries in either triangle and sums repeated indices.

use super::dense::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from coordinate triplets; repeated `(row, col)` pairs are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(i, j, _) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            counts[i + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            let p = next[i];
            cols[p] = j;
            vals[p] = v;
            next[i] += 1;
        }

        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        indptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..nrows {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|p| (cols[p], vals[p])));
            row.sort_unstable_by_key(|e| e.0);
            for &(j, v) in row.iter() {
                if indices.len() > indptr[i] && *indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(j);
                    values.push(v);
                }
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

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut t = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)] != 0.0 {
                    t.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.rows(), m.cols(), &t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// Number of stored entries that are not exactly zero.
    pub fn count_nonzero(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn tr_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let t: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        CsrMatrix::from_triplets(self.ncols, self.nrows, &t)
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows, "inner dimensions differ");
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![0.0; other.ncols];
        let mut mark = vec![usize::MAX; other.ncols];
        let mut pattern: Vec<usize> = Vec::new();
        indptr.push(0);
        for i in 0..self.nrows {
            pattern.clear();
            let (acols, avals) = self.row(i);
            for (&k, &a) in acols.iter().zip(avals) {
                let (bcols, bvals) = other.row(k);
                for (&j, &b) in bcols.iter().zip(bvals) {
                    if mark[j] != i {
                        mark[j] = i;
                        acc[j] = 0.0;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                indices.push(j);
                values.push(acc[j]);
            }
            indptr.push(indices.len());
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: other.ncols,
            indptr,
            indices,
            values,
        }
    }

    /// `self + alpha · other` with the union sparsity pattern.
    pub fn add_scaled(&self, alpha: f64, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let t: Vec<_> = self
            .triplets()
            .chain(other.triplets().map(|(i, j, v)| (i, j, alpha * v)))
            .collect();
        CsrMatrix::from_triplets(self.nrows, self.ncols, &t)
    }

    /// Extracts the submatrix with the given rows and columns (in that order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &old) in cols.iter().enumerate() {
            col_map[old] = new;
        }
        let mut t = Vec::new();
        for (new_i, &old_i) in rows.iter().enumerate() {
            let (c, v) = self.row(old_i);
            for (&j, &x) in c.iter().zip(v) {
                if col_map[j] != usize::MAX {
                    t.push((new_i, col_map[j], x));
                }
            }
        }
        CsrMatrix::from_triplets(rows.len(), cols.len(), &t)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Square symmetric sparse matrix; both triangles are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    csr: CsrMatrix,
}

impl SparseSymMatrix {
    /// Wraps a CSR matrix after symmetrizing it as `(M + Mᵀ)/2`.
    pub fn from_csr(csr: CsrMatrix) -> Self {
        assert_eq!(csr.nrows(), csr.ncols(), "symmetric matrix must be square");
        let t = csr.transpose();
        let sym = csr.add_scaled(1.0, &t);
        let t: Vec<_> = sym.triplets().map(|(i, j, v)| (i, j, 0.5 * v)).collect();
        SparseSymMatrix {
            csr: CsrMatrix::from_triplets(csr.nrows(), csr.ncols(), &t),
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        Self::from_csr(CsrMatrix::from_dense(m))
    }

    pub fn identity(n: usize) -> Self {
        SparseSymMatrix {
            csr: CsrMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.csr.nrows()
    }

    pub fn csr(&self) -> &CsrMatrix {
        &self.csr
    }

    pub fn into_csr(self) -> CsrMatrix {
        self.csr
    }

    /// Stored entries in both triangles.
    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn count_nonzero(&self) -> usize {
        self.csr.count_nonzero()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.csr.get(i, j)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.csr.diagonal()
    }

    pub fn max_diagonal(&self) -> f64 {
        self.diagonal().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.csr.matvec(x)
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        self.csr.matvec_into(x, y)
    }

    /// Entries `(i, j, v)` with `i <= j`.
    pub fn upper_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.csr.triplets().filter(|(i, j, _)| i <= j)
    }

    /// Principal submatrix on `indices`.
    pub fn principal_submatrix(&self, indices: &[usize]) -> SparseSymMatrix {
        SparseSymMatrix {
            csr: self.csr.submatrix(indices, indices),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.csr.to_dense()
    }

    /// `Pᵀ · self · P` for a (not necessarily square) `P`.
    pub fn congruence(&self, p: &CsrMatrix) -> SparseSymMatrix {
        let ap = self.csr.matmul(p);
        let ptap = p.transpose().matmul(&ap);
        SparseSymMatrix::from_csr(ptap)
    }
}

/// Collects symmetric entries; `(i, j)` and `(j, i)` address the same entry.
#[derive(Debug, Clone)]
pub struct SymAssembler {
    dim: usize,
    upper: Vec<(usize, usize, f64)>,
}

impl SymAssembler {
    pub fn new(dim: usize) -> Self {
        SymAssembler {
            dim,
            upper: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, capacity: usize) -> Self {
        SymAssembler {
            dim,
            upper: Vec::with_capacity(capacity),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `value` to entry `(i, j)`; only one triangle is recorded.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(i < self.dim && j < self.dim, "entry ({i}, {j}) out of bounds");
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        self.upper.push((r, c, value));
    }

    /// Adds a dense symmetric block at the given global indices. Only the
    /// upper triangle of `block` (in local numbering) is read.
    pub fn add_block(&mut self, indices: &[usize], block: &DenseMatrix) {
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate().skip(a) {
                let v = block[(a, b)];
                if v != 0.0 {
                    self.add(i, j, v);
                }
            }
        }
    }

    /// Sums repeated entries and mirrors the strict upper triangle.
    pub fn finalize(self) -> SparseSymMatrix {
        let mut t = Vec::with_capacity(2 * self.upper.len());
        for &(i, j, v) in &self.upper {
            t.push((i, j, v));
            if i != j {
                t.push((j, i, v));
            }
        }
        SparseSymMatrix {
            csr: CsrMatrix::from_triplets(self.dim, self.dim, &t),
        }
    }
}
