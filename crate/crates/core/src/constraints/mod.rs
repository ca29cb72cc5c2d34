//! Weak constraints between subdomains: constraint rows, the change of
//! variables that makes them explicit, the projection onto their null space
//! and the stabilized coarse-plus-local operator.

mod cov;
mod operator;
mod projection;
mod set;

pub use cov::{change_of_variables, glob_transform, ChangeOfVariables, GlobTransform, TransformedConstraints};
pub use operator::{assemble_stabilized, BddcOperator, Stabilization};
pub use projection::{build_projection, Projector, ProjectorBlock};
pub use set::{
    arithmetic_constraints, glob_dofs, wc_index, ArithmeticGlobs, ConstraintSet, GlobAverage, Provenance,
    DEPENDENCE_TOL,
};
