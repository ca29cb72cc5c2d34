use adaptive_bddc::linalg::dense::lu_solve;
use adaptive_bddc::linalg::{generalized_eig_sym, symmetric_eigen, DenseMatrix};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_na(a: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> DenseMatrix {
    let g = DenseMatrix::from_fn(n, rank, |_, _| rng.gen_range(-1.0..1.0));
    let mut a = g.matmul(&g.transpose());
    a.symmetrize();
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetric_eigenvalues_match_reference(seed in 0u64..10_000, n in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        a.symmetrize();
        let ours = symmetric_eigen(&a).values;
        let mut reference: Vec<f64> = to_na(&a).symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&reference) {
            prop_assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn generalized_eigenvalues_match_reference(seed in 0u64..10_000, n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_spd(&mut rng, n, n);
        let a = random_spd(&mut rng, n, n / 2 + 1);
        let ours = generalized_eig_sym(&a, &b, n).unwrap().eigenvalues;
        // λ(B⁻¹A) through the Cholesky factor of B.
        let l = to_na(&b).cholesky().unwrap().l();
        let li = l.clone().try_inverse().unwrap();
        let c = &li * to_na(&a) * li.transpose();
        let c = (&c + c.transpose()) * 0.5;
        let mut reference: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(|x, y| y.total_cmp(x));
        let scale = reference[0].abs().max(1.0);
        for (x, y) in ours.iter().zip(&reference) {
            prop_assert!((x - y).abs() < 1e-8 * scale, "{x} vs {y}");
        }
    }

    #[test]
    fn lu_matches_reference(seed in 0u64..10_000, n in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DenseMatrix::from_fn(n, n, |i, j| rng.gen_range(-1.0..1.0) + if i == j { 4.0 } else { 0.0 });
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ours = lu_solve(&a, &b).unwrap();
        let reference = to_na(&a).lu().solve(&DVector::from_vec(b)).unwrap();
        for (x, y) in ours.iter().zip(reference.iter()) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn singular_pencil_is_solved_modulo_the_null_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let b = random_spd(&mut rng, 8, 5);
    // lhs = B M B keeps null(B) in null(lhs).
    let m = random_spd(&mut rng, 8, 8);
    let mut a = b.matmul(&m.matmul(&b));
    a.symmetrize();
    let report = generalized_eig_sym(&a, &b, 8).unwrap();
    assert_eq!(report.rank, 5);
    assert_eq!(report.eigenvalues.len(), 5);
}
