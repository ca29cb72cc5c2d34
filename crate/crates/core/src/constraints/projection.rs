use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, DenseCholesky, DenseMatrix};

/// Relative pivot below which the Gram matrix is declared singular.
const GRAM_PIVOT_TOL: f64 = 1e-10;

/// `Π = I − Dᵀ(DDᵀ)⁻¹D`, stored as dense blocks over the connected
/// components of the row/column graph of `D`. Identity elsewhere.
#[derive(Debug, Clone)]
pub struct Projector {
    dim: usize,
    pub blocks: Vec<ProjectorBlock>,
}

#[derive(Debug, Clone)]
pub struct ProjectorBlock {
    /// Sorted indices touched by the block.
    pub indices: Vec<usize>,
    /// `Π` restricted to `indices`.
    pub matrix: DenseMatrix,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

pub fn build_projection(d: &CsrMatrix) -> Result<Projector> {
    let dim = d.ncols();
    let rows = d.nrows();
    // Union rows that share a column.
    let mut parent: Vec<usize> = (0..rows).collect();
    let mut owner = vec![usize::MAX; dim];
    for r in 0..rows {
        for &c in d.row(r).0 {
            if owner[c] == usize::MAX {
                owner[c] = r;
            } else {
                let (a, b) = (find(&mut parent, owner[c]), find(&mut parent, r));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for r in 0..rows {
        let root = find(&mut parent, r);
        groups.entry(root).or_default().push(r);
    }

    let mut blocks = Vec::with_capacity(groups.len());
    for rows in groups.into_values() {
        let mut indices: Vec<usize> = rows.iter().flat_map(|&r| d.row(r).0.iter().copied()).collect();
        indices.sort_unstable();
        indices.dedup();
        let dc = DenseMatrix::from_fn(rows.len(), indices.len(), |a, b| d.get(rows[a], indices[b]));
        let gram = dc.matmul(&dc.transpose());
        let scale = (0..gram.rows()).map(|i| gram[(i, i)]).fold(0.0, f64::max);
        let chol = DenseCholesky::new(&gram).map_err(|_| Error::SingularGram)?;
        let l = chol.lower();
        if scale == 0.0 || (0..l.rows()).any(|i| l[(i, i)] * l[(i, i)] <= GRAM_PIVOT_TOL * scale) {
            return Err(Error::SingularGram);
        }
        let n = indices.len();
        let mut matrix = DenseMatrix::identity(n);
        // Dᵀ G⁻¹ D, one column of D at a time.
        let solved: Vec<Vec<f64>> = (0..n).map(|b| chol.solve(&dc.column(b))).collect();
        for a in 0..n {
            let col_a = dc.column(a);
            for b in 0..n {
                let v: f64 = col_a.iter().zip(&solved[b]).map(|(x, y)| x * y).sum();
                matrix[(a, b)] -= v;
            }
        }
        matrix.symmetrize();
        blocks.push(ProjectorBlock { indices, matrix });
    }
    Ok(Projector { dim, blocks })
}

impl Projector {
    pub fn identity(dim: usize) -> Self {
        Projector { dim, blocks: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Indices where `Π` differs from the identity.
    pub fn touched(&self) -> Vec<bool> {
        let mut out = vec![false; self.dim];
        for b in &self.blocks {
            for &i in &b.indices {
                out[i] = true;
            }
        }
        out
    }

    pub fn apply_in_place(&self, x: &mut [f64]) {
        for b in &self.blocks {
            let v: Vec<f64> = b.indices.iter().map(|&i| x[i]).collect();
            for (&i, y) in b.indices.iter().zip(b.matrix.matvec(&v)) {
                x[i] = y;
            }
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.apply_in_place(&mut y);
        y
    }

    /// `Π` as a sparse matrix; with `complement`, `I − Π` instead.
    pub fn to_csr(&self, complement: bool) -> CsrMatrix {
        let touched = self.touched();
        let mut triplets = Vec::new();
        if !complement {
            triplets.extend((0..self.dim).filter(|&i| !touched[i]).map(|i| (i, i, 1.0)));
        }
        for b in &self.blocks {
            for (a, &i) in b.indices.iter().enumerate() {
                for (c, &j) in b.indices.iter().enumerate() {
                    let mut v = b.matrix[(a, c)];
                    if complement {
                        v = if a == c { 1.0 - v } else { -v };
                    }
                    if v != 0.0 {
                        triplets.push((i, j, v));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(self.dim, self.dim, &triplets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_rows_give_identity() {
        let d = CsrMatrix::from_triplets(0, 5, &[]);
        let p = build_projection(&d).unwrap();
        assert!(p.is_identity());
        assert_eq!(p.apply(&[1.0, 2.0, 3.0, 4.0, 5.0]), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn single_difference_row_averages_the_pair() {
        let d = CsrMatrix::from_triplets(1, 4, &[(0, 1, 1.0), (0, 3, -1.0)]);
        let p = build_projection(&d).unwrap();
        let dense = p.to_csr(false).to_dense();
        for (i, j, v) in [(1, 1, 0.5), (1, 3, 0.5), (3, 1, 0.5), (3, 3, 0.5), (0, 0, 1.0), (2, 2, 1.0)] {
            assert!((dense[(i, j)] - v).abs() < 1e-15);
        }
    }

    #[test]
    fn duplicate_rows_are_rejected() {
        let d = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 1, -1.0), (1, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(build_projection(&d), Err(Error::SingularGram)));
    }
}
