//! Adaptive selection of weighted averages from generalized eigenvalue
//! problems on pairs of face-sharing subdomains.

mod eigen;
mod pair;

pub use eigen::{
    constrained_basis, extract_constraints, indicator, solve_pair_eigenproblem, PairEigenResult, Selection,
};
pub use pair::{build_pair, dense_schur, SubdomainPair};

use std::io::Write;

use rayon::prelude::*;

use crate::constraints::ConstraintSet;
use crate::error::Result;
use crate::fem::Problem;
use crate::linalg::DenseMatrix;
use crate::substructuring::Substructuring;

pub const DEFAULT_MAX_VECTORS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnrichOptions {
    pub selection: Selection,
    pub keep_edges: bool,
}

impl EnrichOptions {
    pub fn threshold(tau: f64) -> Self {
        EnrichOptions {
            selection: Selection::Threshold {
                tau,
                max_vectors: DEFAULT_MAX_VECTORS,
            },
            keep_edges: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Enrichment {
    pub constraints: ConstraintSet,
    pub results: Vec<PairEigenResult>,
    /// `ω̃`.
    pub indicator: f64,
    /// Adaptive averages removed as linearly dependent.
    pub dropped: usize,
}

/// Dense Schur complements of all subdomains.
pub fn dense_schurs(sub: &Substructuring) -> Vec<DenseMatrix> {
    sub.harmonic.locals.iter().map(dense_schur).collect()
}

/// Solves the eigenproblem of every face-sharing pair with `base` as the
/// initial constraints and appends the selected averages.
pub fn adaptive_enrich(
    problem: &Problem,
    sub: &Substructuring,
    base: &ConstraintSet,
    options: EnrichOptions,
) -> Result<Enrichment> {
    let schurs = dense_schurs(sub);
    adaptive_enrich_with(problem, sub, base, options, &schurs)
}

/// As [`adaptive_enrich`], reusing precomputed dense Schur complements.
pub fn adaptive_enrich_with(
    problem: &Problem,
    sub: &Substructuring,
    base: &ConstraintSet,
    options: EnrichOptions,
    schurs: &[DenseMatrix],
) -> Result<Enrichment> {
    let d = problem.mesh.dofs_per_node();
    let solved = sub
        .globs
        .adjacent_pairs()
        .into_par_iter()
        .map(|(i, j)| {
            let pair = build_pair(sub, &problem.systems, base, i, j)?;
            let s = pair.assemble_schur(&schurs[i], &schurs[j]);
            let result = solve_pair_eigenproblem(&pair, &s, &problem.mesh, options.selection)?;
            let rows = extract_constraints(&pair, &result, &sub.globs, d, options.keep_edges);
            Ok((result, rows))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut constraints = base.clone();
    let before = constraints.len();
    let mut results = Vec::with_capacity(solved.len());
    let mut added = 0;
    for (result, rows) in solved {
        added += rows.len();
        constraints.averages.extend(rows);
        results.push(result);
    }
    constraints.filter_dependent();
    let dropped = before + added - constraints.len();
    Ok(Enrichment {
        indicator: indicator(&results),
        constraints,
        results,
        dropped,
    })
}

/// Per-pair report: `i, j, omega, k, saturated, eigenvalues`.
pub fn write_pair_report(out: impl Write, results: &[PairEigenResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["i", "j", "omega", "k", "saturated", "eigenvalues"])?;
    for r in results {
        let values: Vec<String> = r.eigenvalues.iter().map(|v| format!("{v:.6e}")).collect();
        w.write_record([
            r.pair.0.to_string(),
            r.pair.1.to_string(),
            format!("{:.6e}", r.omega()),
            r.selected.to_string(),
            r.saturated.to_string(),
            values.join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}
