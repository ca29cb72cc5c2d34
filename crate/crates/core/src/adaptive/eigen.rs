use super::pair::SubdomainPair;
use crate::constraints::{glob_dofs, GlobAverage, Provenance};
use crate::error::Result;
use crate::fem::Mesh;
use crate::linalg::qr::DEFAULT_RANK_TOL;
use crate::linalg::{generalized_eig_sym, pivoted_qr, DenseMatrix};
use crate::substructuring::{GlobKind, GlobSet};

/// How many eigenvectors of a pair become constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Selection {
    /// All eigenvalues above `τ`, at most `max_vectors`.
    Threshold { tau: f64, max_vectors: usize },
    /// The dominant `count`, regardless of their size.
    Fixed(usize),
}

impl Selection {
    fn requested(self) -> usize {
        match self {
            Selection::Threshold { max_vectors, .. } => max_vectors + 1,
            Selection::Fixed(count) => count + 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PairEigenResult {
    pub pair: (usize, usize),
    /// Largest eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Selected eigenvectors in pair coordinates.
    pub eigenvectors: DenseMatrix,
    /// `k_ij`.
    pub selected: usize,
    /// The cap was reached with eigenvalues above `τ` left over.
    pub saturated: bool,
    /// `d_ℓ = Π(I − E)ᵀ S (I − E) Π w_ℓ` for the selected eigenvectors.
    pub raw_rows: Vec<Vec<f64>>,
}

impl PairEigenResult {
    /// `ω_ij = λ_1`.
    pub fn omega(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `λ_{k+1}`: the largest eigenvalue left after the selected
    /// constraints are added.
    pub fn remaining(&self) -> f64 {
        self.eigenvalues.get(self.selected).copied().unwrap_or(0.0)
    }
}

/// Orthonormal basis of `null(D_ij)` with the Dirichlet dofs removed, and
/// without continuous rigid body modes for floating pairs.
pub fn constrained_basis(pair: &SubdomainPair, mesh: &Mesh) -> DenseMatrix {
    let n = pair.dim;
    let free: Vec<usize> = (0..n).filter(|&a| !pair.fixed[a]).collect();
    let d = &pair.constraints;
    let mut z = if d.rows() == 0 {
        DenseMatrix::from_fn(n, free.len(), |a, b| if free[b] == a { 1.0 } else { 0.0 })
    } else {
        let dt = DenseMatrix::from_fn(free.len(), d.rows(), |a, r| d[(r, free[a])]);
        let qr = pivoted_qr(&dt, DEFAULT_RANK_TOL);
        let m = free.len() - qr.rank;
        let mut z = DenseMatrix::zeros(n, m);
        for (a, &row) in free.iter().enumerate() {
            for b in 0..m {
                z[(row, b)] = qr.q[(a, qr.rank + b)];
            }
        }
        z
    };
    if pair.floating {
        let modes = pair.rigid_modes(mesh);
        let y = DenseMatrix::from_fn(z.cols(), modes.len(), |a, m| {
            (0..n).map(|r| z[(r, a)] * modes[m][r]).sum()
        });
        let qr = pivoted_qr(&y, DEFAULT_RANK_TOL);
        let complement = DenseMatrix::from_fn(z.cols(), z.cols() - qr.rank, |a, b| qr.q[(a, qr.rank + b)]);
        z = z.matmul(&complement);
    }
    z
}

/// `(I − E_ij)` applied to every column of `z`.
fn jump_columns(pair: &SubdomainPair, z: &DenseMatrix) -> DenseMatrix {
    let mut b = DenseMatrix::zeros(z.rows(), z.cols());
    for &(a, c, wa, wc) in &pair.shared {
        for k in 0..z.cols() {
            let diff = z[(a, k)] - z[(c, k)];
            b[(a, k)] = wc * diff;
            b[(c, k)] = -wa * diff;
        }
    }
    b
}

/// Solves `Π(I − E)ᵀS(I − E)Π w = λ ΠSΠ w` for the pair, with `s` the dense
/// pair Schur complement.
pub fn solve_pair_eigenproblem(
    pair: &SubdomainPair,
    s: &DenseMatrix,
    mesh: &Mesh,
    selection: Selection,
) -> Result<PairEigenResult> {
    let z = constrained_basis(pair, mesh);
    let b = jump_columns(pair, &z);
    let mut lhs = b.tr_matmul(&s.matmul(&b));
    let mut rhs = z.tr_matmul(&s.matmul(&z));
    lhs.symmetrize();
    rhs.symmetrize();
    let report = generalized_eig_sym(&lhs, &rhs, selection.requested())?;
    let eigenvalues = report.eigenvalues;
    let available = eigenvalues.len();
    let (selected, saturated) = match selection {
        Selection::Threshold { tau, max_vectors } => {
            let above = eigenvalues.iter().take_while(|&&l| l > tau).count();
            (above.min(max_vectors), above > max_vectors)
        }
        Selection::Fixed(count) => (count.min(available), false),
    };
    let columns: Vec<Vec<f64>> = (0..selected)
        .map(|l| z.matvec(&report.eigenvectors.column(l)))
        .collect();
    let raw_rows = columns
        .iter()
        .map(|w| {
            let v = pair.jump_transpose(&s.matvec(&pair.jump(w)));
            z.matvec(&z.tr_matvec(&v))
        })
        .collect();
    Ok(PairEigenResult {
        pair: (pair.i, pair.j),
        eigenvalues,
        eigenvectors: DenseMatrix::from_columns(pair.dim, &columns),
        selected,
        saturated,
        raw_rows,
    })
}

/// `ω̃`: the largest eigenvalue left over any pair after enrichment.
pub fn indicator(results: &[PairEigenResult]) -> f64 {
    results.iter().map(PairEigenResult::remaining).fold(0.0, f64::max)
}

/// Rows below this fraction of the raw row's largest entry are dropped.
const SPLIT_TOL: f64 = 1e-10;

/// Splits each raw row into one average per shared glob, read off the copy
/// in subdomain `i` and scaled to unit largest coefficient. Edge rows are
/// kept only on request.
pub fn extract_constraints(
    pair: &SubdomainPair,
    result: &PairEigenResult,
    globs: &GlobSet,
    dofs_per_node: usize,
    keep_edges: bool,
) -> Vec<GlobAverage> {
    let n_i = pair.map_i.len();
    let mut out = Vec::new();
    for row in &result.raw_rows {
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            continue;
        }
        for &g in &pair.globs {
            let glob = &globs.globs[g];
            if glob.kind == GlobKind::Edge && !keep_edges {
                continue;
            }
            let coefficients: Vec<f64> = glob_dofs(glob, dofs_per_node)
                .iter()
                .map(|&dof| {
                    let a = pair.global_dofs[..n_i]
                        .iter()
                        .position(|&x| x == dof)
                        .expect("shared glob dof on the interface of i");
                    row[a]
                })
                .collect();
            let size = coefficients.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if size <= SPLIT_TOL * scale {
                continue;
            }
            out.push(GlobAverage {
                glob: g,
                coefficients: coefficients.iter().map(|c| c / size).collect(),
                provenance: Provenance::Adaptive { pair: result.pair },
            });
        }
    }
    out
}
