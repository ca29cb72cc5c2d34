//! Experiment driver: a problem plus a list of constraint modes, run one
//! after the other and summarized in a table.

mod table;

pub use table::{emit_table, parse_table, significant, write_table, TableFormat};

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use crate::adaptive::{adaptive_enrich_with, dense_schurs, EnrichOptions, PairEigenResult, Selection, DEFAULT_MAX_VECTORS};
use crate::constraints::{arithmetic_constraints, assemble_stabilized, ArithmeticGlobs, ConstraintSet, Stabilization};
use crate::error::{Error, Result};
use crate::fem::{LoadSpec, Problem, ProblemSpec};
use crate::linalg::mm;
use crate::solver::{bddc_solve, IterationRecord, PcgConfig, PcgReport, Stopping};
use crate::substructuring::{assemble_corner_operator, Substructuring};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintMode {
    #[serde(rename = "c")]
    Corners,
    #[serde(rename = "c+e")]
    Edges,
    #[serde(rename = "c+e+f")]
    EdgesFaces,
    /// Edge averages plus the three dominant eigenvectors of every face.
    #[serde(rename = "c+e+f-3eigv")]
    ThreeEigenvectors,
    #[serde(rename = "adaptive")]
    Adaptive,
}

impl ConstraintMode {
    pub const ALL: [ConstraintMode; 5] = [
        ConstraintMode::Corners,
        ConstraintMode::Edges,
        ConstraintMode::EdgesFaces,
        ConstraintMode::ThreeEigenvectors,
        ConstraintMode::Adaptive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintMode::Corners => "c",
            ConstraintMode::Edges => "c+e",
            ConstraintMode::EdgesFaces => "c+e+f",
            ConstraintMode::ThreeEigenvectors => "c+e+f-3eigv",
            ConstraintMode::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for ConstraintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstraintMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConstraintMode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown constraint mode {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub stopping: Stopping,
}

impl Default for SolverSection {
    fn default() -> Self {
        let pcg = PcgConfig::default();
        SolverSection {
            tolerance: pcg.tolerance,
            max_iterations: pcg.max_iterations,
            stopping: pcg.stopping,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub modes: Vec<ConstraintMode>,
    /// Thresholds for the adaptive mode, one row each.
    pub tau: Vec<f64>,
    pub keep_edge_constraints: bool,
    pub max_eigenvectors: usize,
    /// `t` of the stabilized operator; the largest diagonal entry when absent.
    pub stabilization: Option<f64>,
    pub change_of_variables: bool,
    /// Overrides the seed of random loads.
    pub seed: Option<u64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            modes: vec![ConstraintMode::Edges],
            tau: Vec::new(),
            keep_edge_constraints: false,
            max_eigenvectors: DEFAULT_MAX_VECTORS,
            stabilization: None,
            change_of_variables: true,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    #[serde(flatten)]
    pub problem: ProblemSpec,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.problem.validate()?;
        let e = &self.experiment;
        if e.modes.is_empty() {
            return Err(Error::InvalidSpec("no constraint modes given".into()));
        }
        if e.modes.contains(&ConstraintMode::Adaptive) && e.tau.is_empty() {
            return Err(Error::InvalidSpec("adaptive mode needs at least one tau".into()));
        }
        if e.tau.iter().any(|&t| t.is_nan() || t <= 0.0) {
            return Err(Error::InvalidSpec("tau must be positive".into()));
        }
        if !(self.solver.tolerance > 0.0) {
            return Err(Error::InvalidSpec("solver tolerance must be positive".into()));
        }
        if e.stabilization.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::InvalidSpec("stabilization must be positive".into()));
        }
        Ok(())
    }

    pub fn pcg_config(&self) -> PcgConfig {
        PcgConfig {
            tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
            estimate_condition: true,
            stopping: self.solver.stopping,
        }
    }

    /// The problem with the seed override applied to random loads.
    pub fn effective_problem(&self) -> ProblemSpec {
        let mut problem = self.problem.clone();
        if let Some(s) = self.experiment.seed {
            for l in &mut problem.load {
                if let LoadSpec::Random { seed, .. } = l {
                    *seed = s;
                }
            }
        }
        problem
    }
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    /// Problem setup, glob analysis and constraint selection.
    pub analysis: f64,
    pub factorization: f64,
    pub iterations: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub mode: ConstraintMode,
    pub tau: Option<f64>,
    /// `ω̃`, adaptive modes only.
    pub indicator: Option<f64>,
    /// Installed constraint rows.
    pub nc: usize,
    pub condition: f64,
    pub iterations: usize,
    pub converged: bool,
    pub times: PhaseTimes,
}

impl ResultRow {
    /// The first table column: the mode, or `τ` for adaptive rows.
    pub fn label(&self) -> String {
        row_label(self.mode, self.tau)
    }
}

fn row_label(mode: ConstraintMode, tau: Option<f64>) -> String {
    match tau {
        Some(t) if t.is_infinite() => "tau=inf".to_string(),
        Some(t) => format!("tau={}", significant(t)),
        None => mode.name().to_string(),
    }
}

/// Called with the row label after every PCG iteration.
pub type Observer<'a> = dyn FnMut(&str, &IterationRecord) + 'a;

/// Optional side outputs of a run.
#[derive(Default)]
pub struct RunOptions<'a> {
    /// Matrix Market exports of `A^c`, `Ã`, the constraint rows, and a
    /// constraint listing, one set per row.
    pub export_dir: Option<PathBuf>,
    /// Per-pair eigenvalue report for the eigenvector-based modes.
    pub pair_report: Option<PathBuf>,
    pub observer: Option<&'a mut Observer<'a>>,
}

/// Runs every configured mode. PCG failures to converge produce rows with
/// `converged = false`; other errors abort with the phase named.
pub fn run_experiment(spec: &ExperimentSpec, options: &mut RunOptions<'_>) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let start = Instant::now();
    let problem = Problem::build(&spec.effective_problem()).map_err(|e| e.in_phase("assembly"))?;
    let sub = Substructuring::new(&problem).map_err(|e| e.in_phase("analysis"))?;
    let d = problem.mesh.dofs_per_node();
    let e = &spec.experiment;
    let edges = arithmetic_constraints(&sub.globs, d, &problem.fixed, ArithmeticGlobs::Edges);
    let needs_eigen = e
        .modes
        .iter()
        .any(|m| matches!(m, ConstraintMode::Adaptive | ConstraintMode::ThreeEigenvectors));
    let schurs = if needs_eigen { dense_schurs(&sub) } else { Vec::new() };
    let setup_schurs = start.elapsed().as_secs_f64();

    let mut rows = Vec::new();
    let mut pair_reports: Vec<(String, Vec<PairEigenResult>)> = Vec::new();
    for &mode in &e.modes {
        let cases: Vec<Option<f64>> = if mode == ConstraintMode::Adaptive {
            e.tau.iter().map(|&t| Some(t)).collect()
        } else {
            vec![None]
        };
        for tau in cases {
            let t0 = Instant::now();
            let selection = match (mode, tau) {
                (ConstraintMode::ThreeEigenvectors, _) => Some(Selection::Fixed(3)),
                (ConstraintMode::Adaptive, Some(tau)) => Some(Selection::Threshold {
                    tau,
                    max_vectors: e.max_eigenvectors,
                }),
                _ => None,
            };
            let (constraints, indicator) = match (mode, selection) {
                (ConstraintMode::Corners, _) => (ConstraintSet::default(), None),
                (ConstraintMode::Edges, _) => (edges.clone(), None),
                (ConstraintMode::EdgesFaces, _) => (
                    arithmetic_constraints(&sub.globs, d, &problem.fixed, ArithmeticGlobs::EdgesAndFaces),
                    None,
                ),
                (_, Some(selection)) => {
                    let options = EnrichOptions {
                        selection,
                        keep_edges: e.keep_edge_constraints,
                    };
                    let en = adaptive_enrich_with(&problem, &sub, &edges, options, &schurs)
                        .map_err(|e| e.in_phase("eigenproblems"))?;
                    pair_reports.push((row_label(mode, tau), en.results));
                    (en.constraints, Some(en.indicator))
                }
                (_, None) => unreachable!("eigenvector modes always select"),
            };
            let analysis = t0.elapsed().as_secs_f64();

            let t1 = Instant::now();
            let stabilization = e.stabilization.map_or(Stabilization::MaxDiagonal, Stabilization::Value);
            let op = assemble_stabilized(&sub, &problem.systems, &constraints, stabilization, e.change_of_variables)
                .map_err(|e| e.in_phase("factorization"))?;
            let factorization = t1.elapsed().as_secs_f64();

            let row_label = row_label(mode, tau);
            if let Some(dir) = &options.export_dir {
                export(dir, &row_label, &sub, &problem, &op, &constraints)?;
            }

            let t2 = Instant::now();
            let label = row_label.clone();
            let observer = &mut options.observer;
            let outcome = bddc_solve(&problem, &sub, &op, &spec.pcg_config(), |rec| {
                if let Some(obs) = observer.as_mut() {
                    obs(&label, rec);
                }
            });
            let report: PcgReport = match outcome {
                Ok((_, report)) => report,
                Err(Error::MaxIterationsExceeded(report)) => *report,
                Err(other) => return Err(other.in_phase("iterations")),
            };
            let iterations = t2.elapsed().as_secs_f64();
            // The shared setup is charged to the first row.
            let shared = if rows.is_empty() { setup_schurs } else { 0.0 };
            let row = ResultRow {
                mode,
                tau,
                indicator,
                nc: op.constraint_rows.nrows(),
                condition: report.condition,
                iterations: report.iterations,
                converged: report.converged,
                times: PhaseTimes {
                    analysis: shared + analysis,
                    factorization,
                    iterations,
                    total: shared + analysis + factorization + iterations,
                },
            };
            info!(
                "{}: Nc={} kappa={} it={}",
                row.label(),
                row.nc,
                significant(row.condition),
                row.iterations
            );
            rows.push(row);
        }
    }
    if let Some(path) = &options.pair_report {
        write_pair_reports(path, &pair_reports)?;
    }
    Ok(rows)
}

fn export(
    dir: &Path,
    label: &str,
    sub: &Substructuring,
    problem: &Problem,
    op: &crate::constraints::BddcOperator,
    constraints: &ConstraintSet,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let stem = label.replace(['=', '+'], "_");
    mm::write_symmetric(&dir.join(format!("{stem}_Ac.mtx")), &assemble_corner_operator(&problem.systems, &sub.maps))?;
    mm::write_symmetric(&dir.join(format!("{stem}_Atilde.mtx")), &op.matrix)?;
    mm::write_general(&dir.join(format!("{stem}_D.mtx")), &op.constraint_rows)?;
    std::fs::write(dir.join(format!("{stem}_constraints.txt")), constraints.dump())?;
    Ok(())
}

fn write_pair_reports(path: &Path, reports: &[(String, Vec<PairEigenResult>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["run", "i", "j", "omega", "k", "saturated", "eigenvalues"])?;
    for (label, results) in reports {
        for r in results {
            let values: Vec<String> = r.eigenvalues.iter().map(|v| format!("{v:.6e}")).collect();
            w.write_record([
                label.clone(),
                r.pair.0.to_string(),
                r.pair.1.to_string(),
                format!("{:.6e}", r.omega()),
                r.selected.to_string(),
                r.saturated.to_string(),
                values.join(" "),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
