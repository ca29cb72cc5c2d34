//! Dense symmetric eigensolvers: Householder tridiagonalization followed by
//! implicit QL iterations, and a generalized solver for semidefinite pencils.

use log::warn;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Eigenvalues of `rhs` below this fraction of its largest eigenvalue span
/// its numerical null space.
pub const NULL_TOL: f64 = 1e-10;

/// `lhs` must map the null space of `rhs` to vectors no larger than this
/// fraction of its own scale.
pub const INCLUSION_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` belongs to `values[k]`.
    pub vectors: DenseMatrix,
}

/// Eigenvalues in descending order with `rhs`-orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenReport {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
    pub requested: usize,
    /// Dimension of the factor space the pencil was solved in.
    pub rank: usize,
}

pub fn symmetric_eigen(a: &DenseMatrix) -> SymmetricEigen {
    assert!(a.is_square());
    let n = a.rows();
    if n == 0 {
        return SymmetricEigen {
            values: Vec::new(),
            vectors: DenseMatrix::zeros(0, 0),
        };
    }
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| 0.5 * (a[(i, j)] + a[(j, i)])).collect())
        .collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut d, &mut e, Some(&mut v));

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, k| v[i][order[k]]);
    SymmetricEigen { values, vectors }
}

/// Ascending eigenvalues of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 0 {
        return Vec::new();
    }
    assert_eq!(off.len() + 1, n);
    let mut d = diag.to_vec();
    // tql2 expects the sub-diagonal shifted by one.
    let mut e = vec![0.0; n];
    e[1..].copy_from_slice(off);
    tql2(&mut d, &mut e, None);
    d.sort_by(f64::total_cmp);
    d
}

/// Solves `lhs x = λ rhs x` for symmetric positive semidefinite `lhs` and
/// `rhs` in the factor space modulo `null(rhs)`, returning the `k` largest
/// eigenvalues.
pub fn generalized_eig_sym(lhs: &DenseMatrix, rhs: &DenseMatrix, k: usize) -> Result<EigenReport> {
    let n = lhs.rows();
    assert!(lhs.is_square() && rhs.is_square() && rhs.rows() == n);
    let b = symmetric_eigen(rhs);
    let top = b.values.last().copied().unwrap_or(0.0).max(0.0);
    let range: Vec<usize> = (0..n).filter(|&i| b.values[i] > NULL_TOL * top).collect();
    let null: Vec<usize> = (0..n).filter(|&i| b.values[i] <= NULL_TOL * top).collect();

    let lhs_scale = lhs.max_abs();
    if !null.is_empty() && lhs_scale > 0.0 {
        let nb = b.vectors.select_columns(&null);
        let image = lhs.matmul(&nb);
        let residual = image.max_abs() / lhs_scale;
        if residual > INCLUSION_TOL {
            return Err(Error::NullspaceInclusionViolated { residual });
        }
    }

    let r = range.len();
    let mut basis = b.vectors.select_columns(&range);
    for (c, &i) in range.iter().enumerate() {
        let s = 1.0 / b.values[i].sqrt();
        for row in 0..n {
            basis[(row, c)] *= s;
        }
    }
    let mut reduced = basis.tr_matmul(&lhs.matmul(&basis));
    reduced.symmetrize();
    let eig = symmetric_eigen(&reduced);

    let count = k.min(r);
    let floor = -1e-12 * eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut eigenvalues = Vec::with_capacity(count);
    let mut columns = Vec::with_capacity(count);
    for idx in (0..r).rev().take(count) {
        let mut value = eig.values[idx];
        if value < 0.0 && value >= floor {
            value = 0.0;
        }
        eigenvalues.push(value);
        columns.push(basis.matvec(&eig.vectors.column(idx)));
    }
    Ok(EigenReport {
        eigenvalues,
        eigenvectors: DenseMatrix::from_columns(n, &columns),
        requested: k,
        rank: r,
    })
}

fn tred2(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1][..n]);
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in j + 1..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)` with `e[i]` coupling rows `i-1`
/// and `i`. Accumulates rotations into `v` when given.
fn tql2(d: &mut [f64], e: &mut [f64], mut v: Option<&mut [Vec<f64>]>) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    let max_iter = 30 * n.max(1) + 30;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(v) = v.as_deref_mut() {
                        for row in v.iter_mut() {
                            let h = row[i + 1];
                            row[i + 1] = s * row[i] + c * h;
                            row[i] = c * row[i] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
                if iter >= max_iter {
                    warn!("tridiagonal QL iteration did not converge for eigenvalue {l}");
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let g = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let mut m = g.tr_matmul(&g);
        for i in 0..n {
            m[(i, i)] += n as f64 * 0.1;
        }
        m
    }

    #[test]
    fn diagonal_matrix() {
        let a = DenseMatrix::diagonal(&[3.0, -1.0, 2.0]);
        let e = symmetric_eigen(&a);
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn decomposition_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_spd(12, &mut rng);
        let e = symmetric_eigen(&a);
        let mut lambda_vt = e.vectors.transpose();
        for k in 0..12 {
            for j in 0..12 {
                lambda_vt[(k, j)] *= e.values[k];
            }
        }
        let rebuilt = e.vectors.matmul(&lambda_vt);
        let mut diff = rebuilt;
        diff.add_scaled(-1.0, &a);
        assert!(diff.max_abs() < 1e-12 * a.max_abs());
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let d = [2.0, 3.0, 1.0, 4.0];
        let off = [0.5, -1.0, 0.25];
        let a = DenseMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                d[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        });
        let dense = symmetric_eigen(&a).values;
        let tri = tridiagonal_eigenvalues(&d, &off);
        for (x, y) in dense.iter().zip(&tri) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn identity_pencil() {
        let i = DenseMatrix::identity(4);
        let r = generalized_eig_sym(&i, &i, 4).unwrap();
        assert!(r.eigenvalues.iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn diagonal_pencil() {
        let lhs = DenseMatrix::diagonal(&[4.0, 1.0, 0.0]);
        let r = generalized_eig_sym(&lhs, &DenseMatrix::identity(3), 3).unwrap();
        assert_eq!(r.eigenvalues, vec![4.0, 1.0, 0.0]);
    }

    #[test]
    fn random_pencil_matches_cholesky_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lhs = random_spd(20, &mut rng);
        let rhs = random_spd(20, &mut rng);
        let r = generalized_eig_sym(&lhs, &rhs, 20).unwrap();

        // Oracle: C = L⁻¹ A L⁻ᵀ.
        let chol = crate::linalg::dense::DenseCholesky::new(&rhs).unwrap();
        let mut linv_a = DenseMatrix::zeros(20, 20);
        for j in 0..20 {
            linv_a.set_column(j, &chol.forward(&lhs.column(j)));
        }
        let mut c = DenseMatrix::zeros(20, 20);
        let t = linv_a.transpose();
        for j in 0..20 {
            c.set_column(j, &chol.forward(&t.column(j)));
        }
        let mut oracle = symmetric_eigen(&c).values;
        oracle.reverse();
        for (a, b) in r.eigenvalues.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
        }
        let bx = rhs.matmul(&r.eigenvectors);
        let gram = r.eigenvectors.tr_matmul(&bx);
        for i in 0..20 {
            for j in 0..20 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - e).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn null_space_violation_is_reported() {
        let lhs = DenseMatrix::identity(2);
        let rhs = DenseMatrix::diagonal(&[1.0, 0.0]);
        assert!(matches!(
            generalized_eig_sym(&lhs, &rhs, 2),
            Err(Error::NullspaceInclusionViolated { .. })
        ));
        let lhs = DenseMatrix::diagonal(&[3.0, 0.0]);
        let r = generalized_eig_sym(&lhs, &rhs, 2).unwrap();
        assert_eq!(r.rank, 1);
        assert!((r.eigenvalues[0] - 3.0).abs() < 1e-14);
    }
}
