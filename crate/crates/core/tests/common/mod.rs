#![allow(dead_code)]

use adaptive_bddc::constraints::BddcOperator;
use adaptive_bddc::fem::{Physics, Problem, ProblemSpec};
use adaptive_bddc::linalg::{generalized_eig_sym, DenseMatrix};
use adaptive_bddc::substructuring::Substructuring;

pub fn setup(spec: &ProblemSpec) -> (Problem, Substructuring) {
    let problem = Problem::build(spec).unwrap();
    let sub = Substructuring::new(&problem).unwrap();
    (problem, sub)
}

pub fn cube(subs: [usize; 3], h: usize, physics: Physics) -> (Problem, Substructuring) {
    setup(&ProblemSpec::cube(subs, h, physics))
}

pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / scale
}

fn columns_of(n: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> DenseMatrix {
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|k| {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            f(&e)
        })
        .collect();
    DenseMatrix::from_columns(n, &cols)
}

/// The assembled interface Schur complement, column by column.
pub fn dense_interface_schur(sub: &Substructuring) -> DenseMatrix {
    let mut s = columns_of(sub.interface_dim(), |x| sub.schur_apply(x));
    s.symmetrize();
    s
}

pub fn dense_preconditioner(op: &BddcOperator, sub: &Substructuring, problem: &Problem) -> DenseMatrix {
    columns_of(sub.interface_dim(), |r| op.apply_preconditioner(sub, &problem.systems, r))
}

/// Eigenvalues of `M S`, descending, from the symmetric pencil
/// `(S M S, S)`.
pub fn preconditioned_eigenvalues(s: &DenseMatrix, m: &DenseMatrix) -> Vec<f64> {
    let mut sms = s.matmul(&m.matmul(s));
    sms.symmetrize();
    generalized_eig_sym(&sms, s, s.rows()).unwrap().eigenvalues
}
