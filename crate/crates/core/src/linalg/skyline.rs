//! Skyline (profile) Cholesky factorization of sparse symmetric matrices.
//!
//! Rows of the lower factor are stored contiguously from their first
//! nonzero column to the diagonal, so fill stays within the envelope of the
//! permuted matrix. Callers pick the ordering; block-arrow orderings (local
//! blocks first, coupling unknowns last) keep the envelope close to the
//! local bandwidth.

use std::collections::VecDeque;

use super::dense::dot;
use super::sparse::SparseSymMatrix;
use crate::error::{Error, Result};

/// Pivots below this fraction of the original diagonal entry are treated as
/// a loss of definiteness.
const PIVOT_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorKind {
    /// The matrix must be positive definite.
    Definite,
    /// Factorizes `M + shift · max(diag M) · I`; for semidefinite matrices.
    ShiftedSemidefinite { shift: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ordering {
    Natural,
    ReverseCuthillMcKee,
    /// `perm[new] = old`.
    Given(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct Factorization {
    dim: usize,
    kind: FactorKind,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// `inv[old] = new`
    inv: Vec<usize>,
    first: Vec<usize>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

pub fn factorize(matrix: &SparseSymMatrix, kind: FactorKind) -> Result<Factorization> {
    Factorization::new(matrix, kind, Ordering::ReverseCuthillMcKee)
}

impl Factorization {
    pub fn new(matrix: &SparseSymMatrix, kind: FactorKind, ordering: Ordering) -> Result<Self> {
        let n = matrix.dim();
        let perm = match ordering {
            Ordering::Natural => (0..n).collect(),
            Ordering::ReverseCuthillMcKee => reverse_cuthill_mckee(matrix),
            Ordering::Given(p) => {
                assert_eq!(p.len(), n, "ordering has wrong length");
                p
            }
        };
        let mut inv = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            assert!(inv[old] == usize::MAX, "ordering is not a permutation");
            inv[old] = new;
        }

        let csr = matrix.csr();
        let mut first: Vec<usize> = (0..n).collect();
        for old_i in 0..n {
            let i = inv[old_i];
            for &old_j in csr.row(old_i).0 {
                let j = inv[old_j];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + (i - first[i] + 1));
        }
        let mut values = vec![0.0; offsets[n]];
        let mut diag = vec![0.0; n];
        for old_i in 0..n {
            let i = inv[old_i];
            let (cols, vals) = csr.row(old_i);
            for (&old_j, &v) in cols.iter().zip(vals) {
                let j = inv[old_j];
                if j <= i {
                    values[offsets[i] + (j - first[i])] += v;
                }
                if j == i {
                    diag[i] = v;
                }
            }
        }
        if let FactorKind::ShiftedSemidefinite { shift } = kind {
            let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
            for i in 0..n {
                values[offsets[i + 1] - 1] += shift * scale;
                diag[i] += shift * scale;
            }
        }

        for i in 0..n {
            let fi = first[i];
            let row_start = offsets[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let (before, row_i) = values.split_at_mut(row_start);
                let row_j = &before[offsets[j]..offsets[j + 1]];
                let s = dot(&row_i[k0 - fi..j - fi], &row_j[k0 - fj..j - fj]);
                let ljj = row_j[j - fj];
                row_i[j - fi] = (row_i[j - fi] - s) / ljj;
            }
            let row_i = &mut values[row_start..offsets[i + 1]];
            let len = i - fi;
            let s = dot(&row_i[..len], &row_i[..len]);
            let d = row_i[len] - s;
            let reference = diag[i].abs().max(f64::MIN_POSITIVE);
            if !(d > PIVOT_RATIO * reference) {
                return Err(Error::NotPositiveDefinite {
                    row: perm[i],
                    pivot: d,
                });
            }
            row_i[len] = d.sqrt();
        }

        Ok(Factorization {
            dim: n,
            kind,
            perm,
            inv,
            first,
            offsets,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> FactorKind {
        self.kind
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Entries stored in the lower factor.
    pub fn stored_entries(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.dim);
        let n = self.dim;
        let mut y: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        for i in 0..n {
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let fi = self.first[i];
            let len = i - fi;
            let s = dot(&row[..len], &y[fi..i]);
            y[i] = (y[i] - s) / row[len];
        }
        for i in (0..n).rev() {
            let row = &self.values[self.offsets[i]..self.offsets[i + 1]];
            let fi = self.first[i];
            let len = i - fi;
            y[i] /= row[len];
            let yi = y[i];
            for (k, &l) in row[..len].iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        for (old, &new) in self.inv.iter().enumerate() {
            b[old] = y[new];
        }
    }
}

/// Reverse Cuthill–McKee ordering of the matrix graph, one pseudo-peripheral
/// start per connected component. Returns `perm[new] = old`.
pub fn reverse_cuthill_mckee(matrix: &SparseSymMatrix) -> Vec<usize> {
    let n = matrix.dim();
    let csr = matrix.csr();
    let adjacency: Vec<Vec<usize>> = (0..n)
        .map(|i| csr.row(i).0.iter().copied().filter(|&j| j != i).collect())
        .collect();
    let degree: Vec<usize> = adjacency.iter().map(Vec::len).collect();

    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    let mut level = vec![usize::MAX; n];
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adjacency, &degree, &mut level);
        let mut queue = VecDeque::new();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adjacency[v]
                .iter()
                .copied()
                .filter(|&w| !visited[w])
                .collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn pseudo_peripheral(
    seed: usize,
    adjacency: &[Vec<usize>],
    degree: &[usize],
    level: &mut [usize],
) -> usize {
    let mut start = seed;
    let mut eccentricity = 0;
    for _ in 0..8 {
        let (last_level, depth) = bfs_levels(start, adjacency, level);
        let candidate = last_level
            .into_iter()
            .min_by_key(|&v| (degree[v], v))
            .unwrap_or(start);
        if depth <= eccentricity {
            break;
        }
        eccentricity = depth;
        start = candidate;
    }
    start
}

fn bfs_levels(start: usize, adjacency: &[Vec<usize>], level: &mut [usize]) -> (Vec<usize>, usize) {
    let mut touched = vec![start];
    level[start] = 0;
    let mut frontier = vec![start];
    let mut depth = 0;
    loop {
        let mut next = Vec::new();
        for &v in &frontier {
            for &w in &adjacency[v] {
                if level[w] == usize::MAX {
                    level[w] = depth + 1;
                    touched.push(w);
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        depth += 1;
        frontier = next;
    }
    for v in touched {
        level[v] = usize::MAX;
    }
    (frontier, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::{lu_solve, norm, DenseMatrix};
    use crate::linalg::sparse::SymAssembler;

    fn laplacian_1d(n: usize) -> SparseSymMatrix {
        let mut asm = SymAssembler::new(n);
        for i in 0..n {
            asm.add(i, i, 2.0);
            if i + 1 < n {
                asm.add(i, i + 1, -1.0);
            }
        }
        asm.finalize()
    }

    #[test]
    fn scalar_case() {
        let m = SparseSymMatrix::from_dense(&DenseMatrix::from_row_major(1, 1, vec![4.0]));
        let f = factorize(&m, FactorKind::Definite).unwrap();
        assert_eq!(f.solve(&[8.0]), vec![2.0]);
    }

    #[test]
    fn identity_solve_is_identity() {
        let m = SparseSymMatrix::identity(7);
        let f = factorize(&m, FactorKind::Definite).unwrap();
        let b: Vec<f64> = (0..7).map(|i| i as f64 - 3.5).collect();
        assert_eq!(f.solve(&b), b);
    }

    #[test]
    fn three_by_three_matches_elimination_oracle() {
        let dense = DenseMatrix::from_row_major(
            3,
            3,
            vec![4.0, 1.0, 0.5, 1.0, 3.0, -0.25, 0.5, -0.25, 2.0],
        );
        let b = [1.0, -2.0, 0.75];
        let expected = lu_solve(&dense, &b).unwrap();
        for ordering in [
            Ordering::Natural,
            Ordering::ReverseCuthillMcKee,
            Ordering::Given(vec![2, 0, 1]),
        ] {
            let f = Factorization::new(
                &SparseSymMatrix::from_dense(&dense),
                FactorKind::Definite,
                ordering,
            )
            .unwrap();
            let x = f.solve(&b);
            for (a, e) in x.iter().zip(&expected) {
                assert!((a - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        // Pure Neumann Laplacian: constants are in the kernel.
        let mut asm = SymAssembler::new(3);
        for (i, j) in [(0, 1), (1, 2)] {
            asm.add(i, i, 1.0);
            asm.add(j, j, 1.0);
            asm.add(i, j, -1.0);
        }
        let m = asm.finalize();
        assert!(matches!(
            factorize(&m, FactorKind::Definite),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let f = factorize(&m, FactorKind::ShiftedSemidefinite { shift: 1e-6 }).unwrap();
        assert!(f.solve(&[1.0, 0.0, -1.0]).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rcm_keeps_path_graph_banded() {
        let m = laplacian_1d(50);
        let f = factorize(&m, FactorKind::Definite).unwrap();
        assert_eq!(f.stored_entries(), 2 * 50 - 1);
        let b = vec![1.0; 50];
        let x = f.solve(&b);
        let r: Vec<f64> = m.matvec(&x).iter().zip(&b).map(|(a, b)| a - b).collect();
        assert!(norm(&r) < 1e-10 * norm(&b));
    }
}
