//! Householder QR with column pivoting for small dense matrices.

use super::dense::DenseMatrix;

/// Default relative drop tolerance on the diagonal of `R`.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// `a[:, permutation] = q · r`, with `r` upper trapezoidal and
/// `|r[0,0]| ≥ |r[1,1]| ≥ …`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    /// `permutation[k]` is the original column placed at position `k`.
    pub permutation: Vec<usize>,
    /// Diagonal entries with `|r[k,k]| > rel_tol · |r[0,0]|`.
    pub rank: usize,
}

pub fn pivoted_qr(a: &DenseMatrix, rel_tol: f64) -> PivotedQr {
    let m = a.rows();
    let n = a.cols();
    let steps = m.min(n);
    let mut r = a.clone();
    let mut q = DenseMatrix::identity(m);
    let mut permutation: Vec<usize> = (0..n).collect();
    let mut norms: Vec<f64> = (0..n).map(|j| column_norm_sq(&r, j, 0)).collect();

    for k in 0..steps {
        // Pivot: first column of maximal remaining norm.
        let mut p = k;
        for j in k + 1..n {
            if norms[j] > norms[p] {
                p = j;
            }
        }
        if p != k {
            for i in 0..m {
                let tmp = r[(i, k)];
                r[(i, k)] = r[(i, p)];
                r[(i, p)] = tmp;
            }
            permutation.swap(k, p);
            norms.swap(k, p);
        }

        let (v, tau, beta) = householder(&r, k);
        if tau != 0.0 {
            // r := (I − τ v vᵀ) r on rows k.., columns k..
            for j in k..n {
                let mut s = 0.0;
                for i in k..m {
                    s += v[i - k] * r[(i, j)];
                }
                s *= tau;
                for i in k..m {
                    r[(i, j)] -= s * v[i - k];
                }
            }
            // q := q (I − τ v vᵀ)
            for i in 0..m {
                let mut s = 0.0;
                for l in k..m {
                    s += q[(i, l)] * v[l - k];
                }
                s *= tau;
                for l in k..m {
                    q[(i, l)] -= s * v[l - k];
                }
            }
            r[(k, k)] = beta;
        }
        for i in k + 1..m {
            r[(i, k)] = 0.0;
        }
        // Downdating loses accuracy; recompute the trailing norms exactly.
        for j in k + 1..n {
            norms[j] = column_norm_sq(&r, j, k + 1);
        }
    }

    let lead = if steps > 0 { r[(0, 0)].abs() } else { 0.0 };
    let rank = (0..steps)
        .take_while(|&k| lead > 0.0 && r[(k, k)].abs() > rel_tol * lead)
        .count();
    PivotedQr {
        q,
        r,
        permutation,
        rank,
    }
}

fn column_norm_sq(a: &DenseMatrix, j: usize, from: usize) -> f64 {
    (from..a.rows()).map(|i| a[(i, j)] * a[(i, j)]).sum()
}

/// Reflector annihilating `a[k+1.., k]`: returns `(v, τ, β)` with `v[0] = 1`.
fn householder(a: &DenseMatrix, k: usize) -> (Vec<f64>, f64, f64) {
    let m = a.rows();
    let alpha = a[(k, k)];
    let tail: f64 = (k + 1..m).map(|i| a[(i, k)] * a[(i, k)]).sum();
    let mut v = vec![0.0; m - k];
    v[0] = 1.0;
    if tail == 0.0 {
        return (v, 0.0, alpha);
    }
    let norm = (alpha * alpha + tail).sqrt();
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    for i in k + 1..m {
        v[i - k] = a[(i, k)] * scale;
    }
    (v, tau, beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reconstruction_error(a: &DenseMatrix, f: &PivotedQr) -> f64 {
        let qr = f.q.matmul(&f.r);
        let mut err = 0.0f64;
        for i in 0..a.rows() {
            for (k, &j) in f.permutation.iter().enumerate() {
                err = err.max((qr[(i, k)] - a[(i, j)]).abs());
            }
        }
        err
    }

    #[test]
    fn single_average_row() {
        let a = DenseMatrix::from_row_major(1, 5, vec![1.0; 5]);
        let f = pivoted_qr(&a, DEFAULT_RANK_TOL);
        assert_eq!(f.rank, 1);
        assert_eq!(f.permutation[0], 0);
        assert!((f.r[(0, 0)].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identical_rows_have_rank_one() {
        let a = DenseMatrix::from_row_major(2, 3, vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let f = pivoted_qr(&a, DEFAULT_RANK_TOL);
        assert_eq!(f.rank, 1);
        assert!(reconstruction_error(&a, &f) < 1e-12);
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let f = pivoted_qr(&DenseMatrix::zeros(2, 4), DEFAULT_RANK_TOL);
        assert_eq!(f.rank, 0);
    }

    #[test]
    fn random_rows_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = DenseMatrix::from_fn(2, 4, |_, _| rng.gen_range(-1.0..1.0));
            let f = pivoted_qr(&a, DEFAULT_RANK_TOL);
            assert_eq!(f.rank, 2);
            let qtq = f.q.tr_matmul(&f.q);
            for i in 0..2 {
                for j in 0..2 {
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert!((qtq[(i, j)] - e).abs() < 1e-12);
                }
            }
            assert!(reconstruction_error(&a, &f) < 1e-12);
            assert!(f.r[(0, 0)].abs() >= f.r[(1, 1)].abs());
        }
    }
}
