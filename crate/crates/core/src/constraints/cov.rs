use log::warn;

use super::set::{glob_dofs, wc_index, ConstraintSet};
use crate::fem::SubdomainSystem;
use crate::linalg::qr::DEFAULT_RANK_TOL;
use crate::linalg::{pivoted_qr, CsrMatrix, DenseMatrix};
use crate::substructuring::{EmbeddingMaps, GlobSet};

/// Change of variables on one glob, identical on every sharing subdomain.
/// Matrices act on the glob dofs in `glob_dofs` order.
#[derive(Debug, Clone)]
pub struct GlobTransform {
    pub glob: usize,
    /// Global dofs of the glob.
    pub dofs: Vec<usize>,
    /// Pivot positions, the first `rank` of which carry the averages.
    pub permutation: Vec<usize>,
    pub rank: usize,
    /// Upper triangular `U` (`rank × rank`) and `V` (`rank × (n − rank)`).
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    /// `H` maps original to transformed variables; `T = H⁻¹`.
    pub h: DenseMatrix,
    pub t: DenseMatrix,
    /// Local dofs of the glob in each sharing subdomain.
    pub local: Vec<(usize, Vec<usize>)>,
}

impl GlobTransform {
    /// Glob positions of the explicit average dofs.
    pub fn explicit(&self) -> &[usize] {
        &self.permutation[..self.rank]
    }
}

/// Builds `T` for a stack of average rows `c` (`k × n`). Rows whose `U`
/// diagonal falls below the drop tolerance are discarded.
pub fn glob_transform(c: &DenseMatrix) -> (Vec<usize>, usize, DenseMatrix, DenseMatrix, DenseMatrix, DenseMatrix) {
    let n = c.cols();
    let qr = pivoted_qr(c, DEFAULT_RANK_TOL);
    let r = qr.rank;
    // Rows of R scaled to a positive diagonal.
    let sign: Vec<f64> = (0..r).map(|a| if qr.r[(a, a)] < 0.0 { -1.0 } else { 1.0 }).collect();
    let u = DenseMatrix::from_fn(r, r, |a, b| sign[a] * qr.r[(a, b)]);
    let v = DenseMatrix::from_fn(r, n - r, |a, b| sign[a] * qr.r[(a, r + b)]);
    // U⁻¹ by back substitution on unit vectors.
    let mut u_inv = DenseMatrix::zeros(r, r);
    for col in 0..r {
        for row in (0..=col).rev() {
            let mut s = if row == col { 1.0 } else { 0.0 };
            for k in row + 1..=col {
                s -= u[(row, k)] * u_inv[(k, col)];
            }
            u_inv[(row, col)] = s / u[(row, row)];
        }
    }
    let u_inv_v = u_inv.matmul(&v);
    let p = &qr.permutation;
    let mut t = DenseMatrix::zeros(n, n);
    let mut h = DenseMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let (tv, hv) = if a < r {
                if b < r {
                    (u_inv[(a, b)], u[(a, b)])
                } else {
                    (-u_inv_v[(a, b - r)], v[(a, b - r)])
                }
            } else {
                let id = if a == b { 1.0 } else { 0.0 };
                (id, id)
            };
            t[(p[a], p[b])] = tv;
            h[(p[a], p[b])] = hv;
        }
    }
    (qr.permutation, r, u, v, h, t)
}

#[derive(Debug, Clone, Default)]
pub struct ChangeOfVariables {
    pub transforms: Vec<GlobTransform>,
    /// Averages discarded as numerically redundant.
    pub dropped: usize,
}

/// `D̄^c` after the change of variables: each explicit average dof has one
/// copy per sharing subdomain, and consecutive copies are equated.
#[derive(Debug, Clone, Default)]
pub struct TransformedConstraints {
    /// `W^c` indices of the copies of each explicit dof.
    pub groups: Vec<Vec<usize>>,
    /// `(+1 column, −1 column)` of every row.
    pub rows: Vec<(usize, usize)>,
}

impl TransformedConstraints {
    pub fn to_csr(&self, dim: usize) -> CsrMatrix {
        let mut triplets = Vec::with_capacity(2 * self.rows.len());
        for (r, &(a, b)) in self.rows.iter().enumerate() {
            triplets.push((r, a, 1.0));
            triplets.push((r, b, -1.0));
        }
        CsrMatrix::from_triplets(self.rows.len(), dim, &triplets)
    }
}

pub fn change_of_variables(
    constraints: &ConstraintSet,
    globs: &GlobSet,
    maps: &EmbeddingMaps,
    systems: &[SubdomainSystem],
) -> (ChangeOfVariables, TransformedConstraints) {
    let d = maps.dofs_per_node;
    let mut cov = ChangeOfVariables::default();
    let mut tc = TransformedConstraints::default();
    for (g, averages) in constraints.by_glob() {
        let glob = &globs.globs[g];
        let dofs = glob_dofs(glob, d);
        let c = DenseMatrix::from_fn(averages.len(), dofs.len(), |a, b| averages[a].coefficients[b]);
        let (permutation, rank, u, v, h, t) = glob_transform(&c);
        if rank < averages.len() {
            warn!(
                "glob {g}: dropped {} numerically redundant averages",
                averages.len() - rank
            );
            cov.dropped += averages.len() - rank;
        }
        if rank == 0 {
            continue;
        }
        let local = glob
            .subdomains
            .iter()
            .map(|&s| {
                let ids = dofs
                    .iter()
                    .map(|&gd| systems[s].local_dof(gd).expect("glob dof in subdomain"))
                    .collect();
                (s, ids)
            })
            .collect();
        for &pos in &permutation[..rank] {
            let group: Vec<usize> = glob.subdomains.iter().map(|&s| wc_index(maps, dofs[pos], s)).collect();
            for k in 1..group.len() {
                tc.rows.push((group[0], group[k]));
            }
            tc.groups.push(group);
        }
        cov.transforms.push(GlobTransform {
            glob: g,
            dofs,
            permutation,
            rank,
            u,
            v,
            h,
            t,
            local,
        });
    }
    (cov, tc)
}

impl ChangeOfVariables {
    fn for_subdomain(&self, s: usize) -> impl Iterator<Item = (&GlobTransform, &[usize])> {
        self.transforms.iter().filter_map(move |tr| {
            tr.local
                .iter()
                .find(|(t, _)| *t == s)
                .map(|(_, ids)| (tr, ids.as_slice()))
        })
    }

    /// `x ← T_s x` on a full local vector of subdomain `s`.
    pub fn apply(&self, s: usize, x: &mut [f64]) {
        for (tr, ids) in self.for_subdomain(s) {
            let v: Vec<f64> = ids.iter().map(|&l| x[l]).collect();
            let y = tr.t.matvec(&v);
            for (&l, y) in ids.iter().zip(y) {
                x[l] = y;
            }
        }
    }

    /// `x ← T_sᵀ x`.
    pub fn apply_transpose(&self, s: usize, x: &mut [f64]) {
        for (tr, ids) in self.for_subdomain(s) {
            let v: Vec<f64> = ids.iter().map(|&l| x[l]).collect();
            let y = tr.t.tr_matvec(&v);
            for (&l, y) in ids.iter().zip(y) {
                x[l] = y;
            }
        }
    }

    /// `T_s` as a sparse matrix over the local dofs of subdomain `s`.
    pub fn local_matrix(&self, s: usize, dim: usize) -> CsrMatrix {
        let mut touched = vec![false; dim];
        let mut triplets = Vec::new();
        for (tr, ids) in self.for_subdomain(s) {
            for (a, &la) in ids.iter().enumerate() {
                touched[la] = true;
                for (b, &lb) in ids.iter().enumerate() {
                    let v = tr.t[(a, b)];
                    if v != 0.0 {
                        triplets.push((la, lb, v));
                    }
                }
            }
        }
        for (l, &t) in touched.iter().enumerate() {
            if !t {
                triplets.push((l, l, 1.0));
            }
        }
        CsrMatrix::from_triplets(dim, dim, &triplets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_unit_average_gives_elementary_transform() {
        for n in 1..6 {
            let c = DenseMatrix::from_row_major(1, n, vec![1.0; n]);
            let (perm, rank, _, _, h, t) = glob_transform(&c);
            assert_eq!(rank, 1);
            assert_eq!(perm[0], 0);
            let expected = DenseMatrix::from_fn(n, n, |a, b| match (a, b) {
                (0, 0) => 1.0,
                (0, _) => -1.0,
                _ if a == b => 1.0,
                _ => 0.0,
            });
            for a in 0..n {
                for b in 0..n {
                    assert!((t[(a, b)] - expected[(a, b)]).abs() < 1e-14, "n={n} ({a},{b})");
                }
            }
            let ht = h.matmul(&t);
            for a in 0..n {
                for b in 0..n {
                    let e = if a == b { 1.0 } else { 0.0 };
                    assert!((ht[(a, b)] - e).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn proportional_averages_keep_one_explicit_dof() {
        let c = DenseMatrix::from_row_major(2, 3, vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
        let (_, rank, ..) = glob_transform(&c);
        assert_eq!(rank, 1);
    }
}
