use rayon::prelude::*;

use super::pcg::{pcg_observed, IterationRecord, PcgConfig, PcgReport};
use crate::constraints::BddcOperator;
use crate::error::Result;
use crate::fem::Problem;
use crate::substructuring::Substructuring;

/// The problem reduced to the interface `Γ`: the assembled Schur complement
/// and the condensed load.
pub struct InterfaceProblem<'a> {
    pub problem: &'a Problem,
    pub sub: &'a Substructuring,
    pub rhs: Vec<f64>,
}

pub fn reduce_to_interface<'a>(problem: &'a Problem, sub: &'a Substructuring) -> InterfaceProblem<'a> {
    let condensed: Vec<Vec<f64>> = sub
        .harmonic
        .locals
        .par_iter()
        .zip(&problem.systems)
        .map(|(loc, sys)| loc.condense(&sys.load))
        .collect();
    let rhs = sub.scatter_interface(&condensed);
    InterfaceProblem { problem, sub, rhs }
}

impl InterfaceProblem<'_> {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.sub.schur_apply(x)
    }

    /// Global solution from interface values: independent interior solves
    /// with the subdomain loads.
    pub fn recover(&self, u_gamma: &[f64]) -> Vec<f64> {
        let boundary = self.sub.gather_interface(u_gamma);
        let locals: Vec<Vec<f64>> = self
            .sub
            .harmonic
            .locals
            .par_iter()
            .zip(&self.problem.systems)
            .zip(&boundary)
            .map(|((loc, sys), b)| loc.extend(b, Some(&sys.load)))
            .collect();
        let mut u = vec![0.0; self.problem.dof_count()];
        for (sys, local) in self.problem.systems.iter().zip(&locals) {
            for (&g, &v) in sys.dofs.iter().zip(local) {
                u[g] = v;
            }
        }
        u
    }
}

/// Reduce, run PCG with the BDDC preconditioner and recover the interiors.
pub fn bddc_solve(
    problem: &Problem,
    sub: &Substructuring,
    operator: &BddcOperator,
    config: &PcgConfig,
    observer: impl FnMut(&IterationRecord),
) -> Result<(Vec<f64>, PcgReport)> {
    let reduced = reduce_to_interface(problem, sub);
    let (u_gamma, report) = pcg_observed(
        |x| reduced.apply(x),
        |r| operator.apply_preconditioner(sub, &problem.systems, r),
        &reduced.rhs,
        config,
        observer,
    )?;
    Ok((reduced.recover(&u_gamma), report))
}
