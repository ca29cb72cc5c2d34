use adaptive_bddc::constraints::{
    arithmetic_constraints, assemble_stabilized, build_projection, glob_transform, ArithmeticGlobs, ConstraintSet,
    Stabilization,
};
use adaptive_bddc::fem::{Physics, Problem, ProblemSpec};
use adaptive_bddc::linalg::{CsrMatrix, DenseMatrix};
use adaptive_bddc::solver::{bddc_solve, PcgConfig};
use adaptive_bddc::substructuring::Substructuring;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(subs: [usize; 3], h: usize, physics: Physics) -> (Problem, Substructuring) {
    let problem = Problem::build(&ProblemSpec::cube(subs, h, physics)).unwrap();
    let sub = Substructuring::new(&problem).unwrap();
    (problem, sub)
}

fn edges(problem: &Problem, sub: &Substructuring) -> ConstraintSet {
    arithmetic_constraints(&sub.globs, problem.mesh.dofs_per_node(), &problem.fixed, ArithmeticGlobs::Edges)
}

fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale
}

#[test]
fn edge_averages_on_the_elastic_cube() {
    let (problem, sub) = setup([2, 2, 2], 4, Physics::Elasticity);
    let set = edges(&problem, &sub);
    assert_eq!(set.row_count(&sub.globs), 54);
    let with = assemble_stabilized(&sub, &problem.systems, &set, Stabilization::MaxDiagonal, true).unwrap();
    let without = assemble_stabilized(&sub, &problem.systems, &set, Stabilization::MaxDiagonal, false).unwrap();
    assert_eq!(with.dim(), 2925);
    assert_eq!(with.transformed.rows.len(), 54);
    assert!(with.nnz() < without.nnz(), "{} vs {}", with.nnz(), without.nnz());
}

#[test]
fn rows_annihilate_continuous_vectors() {
    let (problem, sub) = setup([2, 2, 2], 2, Physics::Elasticity);
    let set = edges(&problem, &sub);
    let d = set.rows_wc(&sub.globs, &sub.maps);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let u: Vec<f64> = (0..problem.dof_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let wc = sub.maps.continuous_wc(&u, &problem.systems);
        let r = d.matvec(&wc);
        assert!(r.iter().all(|x| x.abs() < 1e-10));
    }
}

#[test]
fn transform_inverts_on_every_glob() {
    let (problem, sub) = setup([2, 2, 2], 2, Physics::Elasticity);
    let mut set = edges(&problem, &sub);
    set.extend(arithmetic_constraints(&sub.globs, 3, &problem.fixed, ArithmeticGlobs::Faces));
    let op = assemble_stabilized(&sub, &problem.systems, &set, Stabilization::MaxDiagonal, true).unwrap();
    for tr in &op.cov.transforms {
        let n = tr.dofs.len();
        for m in [tr.h.matmul(&tr.t), tr.t.matmul(&tr.h)] {
            for a in 0..n {
                for b in 0..n {
                    let e = if a == b { 1.0 } else { 0.0 };
                    assert!((m[(a, b)] - e).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn transformed_rows_pair_opposite_unit_entries() {
    let (problem, sub) = setup([2, 2, 1], 3, Physics::Elasticity);
    let set = arithmetic_constraints(&sub.globs, 3, &problem.fixed, ArithmeticGlobs::EdgesAndFaces);
    let op = assemble_stabilized(&sub, &problem.systems, &set, Stabilization::MaxDiagonal, true).unwrap();
    let d = op.transformed.to_csr(op.dim());
    for r in 0..d.nrows() {
        let (cols, vals) = d.row(r);
        assert_eq!(cols.len(), 2);
        let mut v = vals.to_vec();
        v.sort_by(f64::total_cmp);
        assert_eq!(v, vec![-1.0, 1.0]);
    }
}

#[test]
fn stabilized_solve_matches_saddle_point() {
    let (problem, sub) = setup([2, 1, 1], 2, Physics::Scalar);
    let set = arithmetic_constraints(&sub.globs, 1, &problem.fixed, ArithmeticGlobs::Faces);
    for use_transform in [true, false] {
        let op = assemble_stabilized(&sub, &problem.systems, &set, Stabilization::Value(3.7), use_transform).unwrap();
        let n = op.dim();
        let a = op.assembled.to_dense();
        let d = op.constraint_rows.to_dense();
        let m = d.rows();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // [A Dᵀ; D 0] [w; μ] = [Πf; 0]
        let pf = op.projector.apply(&f);
        let k = DenseMatrix::from_fn(n + m, n + m, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => d[(j - n, i)],
            (false, true) => d[(i - n, j)],
            _ => 0.0,
        });
        let mut rhs = pf.clone();
        rhs.resize(n + m, 0.0);
        let saddle = adaptive_bddc::linalg::dense::lu_solve(&k, &rhs).unwrap();
        let stab = op.solve_wc(&pf);
        assert!(relative_error(&stab, &saddle[..n]) < 1e-9);
    }
}

#[test]
fn pipeline_matches_direct_solve() {
    for (subs, physics) in [([2, 2, 1], Physics::Scalar), ([2, 2, 2], Physics::Elasticity)] {
        let (problem, sub) = setup(subs, 3, physics);
        let set = edges(&problem, &sub);
        let op = assemble_stabilized(&sub, &problem.systems, &set, Stabilization::MaxDiagonal, true).unwrap();
        let (u, report) = bddc_solve(&problem, &sub, &op, &PcgConfig::default(), |_| {}).unwrap();
        assert!(report.converged);
        let direct = problem.direct_solve().unwrap();
        assert!(relative_error(&u, &direct) < 1e-6);
    }
}

#[test]
fn preconditioner_is_symmetric() {
    let (problem, sub) = setup([2, 2, 2], 2, Physics::Elasticity);
    let set = edges(&problem, &sub);
    let op = assemble_stabilized(&sub, &problem.systems, &set, Stabilization::MaxDiagonal, true).unwrap();
    let n = sub.interface_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let r1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m1 = op.apply_preconditioner(&sub, &problem.systems, &r1);
        let m2 = op.apply_preconditioner(&sub, &problem.systems, &r2);
        let a: f64 = m1.iter().zip(&r2).map(|(x, y)| x * y).sum();
        let b: f64 = r1.iter().zip(&m2).map(|(x, y)| x * y).sum();
        assert!((a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0));
    }
}

fn random_rows(seed: u64, rows: usize, dim: usize) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triplets = Vec::new();
    for r in 0..rows {
        for c in 0..dim {
            if rng.gen_bool(0.3) {
                triplets.push((r, c, rng.gen_range(-1.0..1.0)));
            }
        }
        triplets.push((r, (r * 7) % dim, 1.0 + rng.gen::<f64>()));
    }
    CsrMatrix::from_triplets(rows, dim, &triplets)
}

proptest! {
    #[test]
    fn projector_laws(seed in 0u64..1000) {
        let d = random_rows(seed, 10, 30);
        let p = build_projection(&d).unwrap().to_csr(false).to_dense();
        let pp = p.matmul(&p);
        let pd = p.matmul(&d.to_dense().transpose());
        for i in 0..30 {
            for j in 0..30 {
                prop_assert!((p[(i, j)] - p[(j, i)]).abs() < 1e-12);
                prop_assert!((pp[(i, j)] - p[(i, j)]).abs() < 1e-12);
            }
            for r in 0..10 {
                prop_assert!(pd[(i, r)].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transform_round_trip(seed in 0u64..1000, rows in 1usize..4, n in 4usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = DenseMatrix::from_fn(rows, n, |_, _| rng.gen_range(-1.0..1.0));
        let (_, rank, _, _, h, t) = glob_transform(&c);
        prop_assert_eq!(rank, rows);
        let ht = h.matmul(&t);
        for a in 0..n {
            for b in 0..n {
                let e = if a == b { 1.0 } else { 0.0 };
                prop_assert!((ht[(a, b)] - e).abs() < 1e-12);
            }
        }
        // Averages become the explicit dofs: c T has zero columns outside them.
        let ct = c.matmul(&t);
        let (perm, ..) = glob_transform(&c);
        for &col in &perm[rank..] {
            for r in 0..rows {
                prop_assert!(ct[(r, col)].abs() < 1e-12);
            }
        }
    }
}
