use rayon::prelude::*;

use super::cov::{change_of_variables, ChangeOfVariables, TransformedConstraints};
use super::projection::{build_projection, Projector};
use super::set::ConstraintSet;
use crate::error::Result;
use crate::fem::SubdomainSystem;
use crate::linalg::skyline::reverse_cuthill_mckee;
use crate::linalg::{FactorKind, Factorization, Ordering, SparseSymMatrix, SymAssembler};
use crate::substructuring::Substructuring;

/// Choice of `t` in `Ã = ΠÂΠ + t(I − Π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Stabilization {
    /// Largest diagonal entry of the assembled (transformed) matrix.
    #[default]
    MaxDiagonal,
    Value(f64),
}

/// The coarse-plus-local BDDC operator on `W^c`, factorized once.
#[derive(Debug, Clone)]
pub struct BddcOperator {
    pub use_transform: bool,
    pub cov: ChangeOfVariables,
    pub transformed: TransformedConstraints,
    /// Constraint rows in the variables of `Â`: `D̄^c` with the change of
    /// variables, `D^c` without.
    pub constraint_rows: crate::linalg::CsrMatrix,
    pub projector: Projector,
    /// `Σ R^cᵀ T_iᵀ A_i T_i R^c`.
    pub assembled: SparseSymMatrix,
    /// `Ã`.
    pub matrix: SparseSymMatrix,
    pub stabilization: f64,
    /// Set when `t` exceeds the diagonal of `Â`; solves then take one
    /// refinement step on the range of `Π`.
    pub refine: bool,
    factor: Factorization,
}

pub fn assemble_stabilized(
    sub: &Substructuring,
    systems: &[SubdomainSystem],
    constraints: &ConstraintSet,
    stabilization: Stabilization,
    use_transform: bool,
) -> Result<BddcOperator> {
    let maps = &sub.maps;
    let (cov, transformed, constraint_rows) = if use_transform {
        let (cov, tc) = change_of_variables(constraints, &sub.globs, maps, systems);
        let rows = tc.to_csr(maps.wc_dim);
        (cov, tc, rows)
    } else {
        let mut filtered = constraints.clone();
        filtered.filter_dependent();
        let rows = filtered.rows_wc(&sub.globs, maps);
        (ChangeOfVariables::default(), TransformedConstraints::default(), rows)
    };

    let locals: Vec<SparseSymMatrix> = systems
        .par_iter()
        .map(|sys| {
            if use_transform {
                sys.matrix.congruence(&cov.local_matrix(sys.id, sys.dim()))
            } else {
                sys.matrix.clone()
            }
        })
        .collect();
    let capacity = locals.iter().map(SparseSymMatrix::nnz).sum();
    let mut asm = SymAssembler::with_capacity(maps.wc_dim, capacity);
    for (sys, local) in systems.iter().zip(&locals) {
        let map = &maps.local_to_wc[sys.id];
        for (i, j, v) in local.upper_triplets() {
            asm.add(map[i], map[j], v);
        }
    }
    let assembled = asm.finalize();

    let projector = build_projection(&constraint_rows)?;
    let t = match stabilization {
        Stabilization::MaxDiagonal => assembled.max_diagonal(),
        Stabilization::Value(t) => t,
    };
    let matrix = if projector.is_identity() {
        assembled.clone()
    } else {
        let pi = projector.to_csr(false);
        let projected = assembled.congruence(&pi).into_csr();
        let complement = projector.to_csr(true);
        SparseSymMatrix::from_csr(projected.add_scaled(t, &complement))
    };

    let refine = t > assembled.max_diagonal() && !projector.is_identity();
    let ordering = block_arrow_ordering(&matrix, &projector, maps.corner_offset);
    let factor = Factorization::new(&matrix, FactorKind::Definite, Ordering::Given(ordering))?;
    Ok(BddcOperator {
        use_transform,
        cov,
        transformed,
        constraint_rows,
        projector,
        assembled,
        matrix,
        stabilization: t,
        refine,
        factor,
    })
}

/// Subdomain-local dofs first (RCM within the local blocks), then the dofs
/// coupled across subdomains by `Π` or by corners.
fn block_arrow_ordering(matrix: &SparseSymMatrix, projector: &Projector, corner_offset: usize) -> Vec<usize> {
    let touched = projector.touched();
    let (head, tail): (Vec<usize>, Vec<usize>) =
        (0..matrix.dim()).partition(|&i| i < corner_offset && !touched[i]);
    let local = reverse_cuthill_mckee(&matrix.principal_submatrix(&head));
    local.into_iter().map(|k| head[k]).chain(tail).collect()
}

impl BddcOperator {
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Nonzero entries of `Ã`.
    pub fn nnz(&self) -> usize {
        self.matrix.count_nonzero()
    }

    /// Entries stored by the factorization of `Ã`.
    pub fn factor_entries(&self) -> usize {
        self.factor.stored_entries()
    }

    /// `Ã⁻¹ rhs`. With a large `t` the part in the range of `Π` is refined
    /// against `Π Â Π`, whose residual does not involve `t`.
    pub fn solve_wc(&self, rhs: &[f64]) -> Vec<f64> {
        if !self.refine {
            return self.factor.solve(rhs);
        }
        let p_rhs = self.projector.apply(rhs);
        let mut y = self.projector.apply(&self.factor.solve(&p_rhs));
        let ay = self.projector.apply(&self.assembled.matvec(&y));
        let r: Vec<f64> = p_rhs.iter().zip(&ay).map(|(b, a)| b - a).collect();
        let dy = self.projector.apply(&self.factor.solve(&r));
        for (((yi, di), b), pb) in y.iter_mut().zip(&dy).zip(rhs).zip(&p_rhs) {
            *yi += di + (b - pb) / self.stabilization;
        }
        y
    }

    /// `M r` for an interface residual `r` over `Γ`: distribute with `Eᵀ`,
    /// transform, solve the projected coarse-plus-local problem, transform
    /// back and average.
    pub fn apply_preconditioner(&self, sub: &Substructuring, systems: &[SubdomainSystem], r: &[f64]) -> Vec<f64> {
        let maps = &sub.maps;
        let pieces = sub.averaging.distribute_interface(r, systems, maps);
        let locals: Vec<Vec<f64>> = systems
            .par_iter()
            .zip(&pieces)
            .map(|(sys, piece)| {
                let mut x = vec![0.0; sys.dim()];
                for (&l, &v) in sys.interface.iter().zip(piece) {
                    x[l] = v;
                }
                if self.use_transform {
                    self.cov.apply_transpose(sys.id, &mut x);
                }
                x
            })
            .collect();
        let mut wc = maps.w_to_wc(&locals);
        self.projector.apply_in_place(&mut wc);
        let mut sol = self.solve_wc(&wc);
        self.projector.apply_in_place(&mut sol);
        let w = maps.wc_to_w(&sol);
        let back: Vec<Vec<f64>> = systems
            .par_iter()
            .zip(w)
            .map(|(sys, mut x)| {
                if self.use_transform {
                    self.cov.apply(sys.id, &mut x);
                }
                sys.interface.iter().map(|&l| x[l]).collect()
            })
            .collect();
        sub.averaging.average_interface(&back, systems, maps)
    }
}
