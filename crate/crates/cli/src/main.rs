//! `bddc`: run BDDC experiments described by a TOML file and print the
//! result table.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use adaptive_bddc::experiment::{emit_table, run_experiment, ConstraintMode, ExperimentSpec, RunOptions, TableFormat};
use adaptive_bddc::solver::{IterationRecord, Stopping};
use adaptive_bddc::Error;
use clap::Parser;

#[derive(Debug, Parser)]
#[command(name = "bddc", version, about = "Adaptive BDDC experiments on structured hexahedral meshes")]
struct Args {
    /// Experiment file (TOML).
    #[arg(long)]
    spec: PathBuf,

    /// Constraint modes, comma separated: c, c+e, c+e+f, c+e+f-3eigv, adaptive.
    #[arg(long, value_delimiter = ',')]
    mode: Option<Vec<ConstraintMode>>,

    /// Thresholds for the adaptive mode, comma separated (`inf` allowed).
    #[arg(long, value_delimiter = ',')]
    tau: Option<Vec<f64>>,

    /// Relative residual tolerance of PCG.
    #[arg(long)]
    tol: Option<f64>,

    /// Stop on the preconditioned residual instead of the true residual.
    #[arg(long)]
    preconditioned_stopping: bool,

    /// Result table path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, default_value = "csv")]
    format: TableFormat,

    /// Write A^c, the stabilized operator and the constraint rows in Matrix
    /// Market format, plus a constraint listing, into this directory.
    #[arg(long, num_args = 0..=1, default_missing_value = "matrices")]
    export_matrices: Option<PathBuf>,

    /// Keep the edge parts of adaptive averages.
    #[arg(long)]
    keep_edge_constraints: bool,

    /// Seed for random loads.
    #[arg(long)]
    seed: Option<u64>,

    /// Cap on adaptive averages per pair.
    #[arg(long)]
    max_eigenvectors: Option<usize>,

    /// CSV of per-pair eigenvalues for the eigenvector-based modes.
    #[arg(long)]
    pair_report: Option<PathBuf>,

    /// CSV of every PCG iteration: run, iteration, residual, condition.
    #[arg(long)]
    iteration_log: Option<PathBuf>,

    /// Leave the timing columns out, making the table reproducible.
    #[arg(long)]
    no_times: bool,
}

fn configure(args: &Args) -> Result<ExperimentSpec, Error> {
    let mut spec = ExperimentSpec::load(&args.spec)?;
    let e = &mut spec.experiment;
    if let Some(m) = &args.mode {
        e.modes = m.clone();
    }
    if let Some(t) = &args.tau {
        e.tau = t.clone();
        if args.mode.is_none() && !e.modes.contains(&ConstraintMode::Adaptive) {
            e.modes.push(ConstraintMode::Adaptive);
        }
    }
    if let Some(n) = args.max_eigenvectors {
        e.max_eigenvectors = n;
    }
    if args.keep_edge_constraints {
        e.keep_edge_constraints = true;
    }
    if args.seed.is_some() {
        e.seed = args.seed;
    }
    if let Some(tol) = args.tol {
        spec.solver.tolerance = tol;
    }
    if args.preconditioned_stopping {
        spec.solver.stopping = Stopping::Preconditioned;
    }
    spec.validate()?;
    Ok(spec)
}

fn run(args: &Args) -> Result<bool, Error> {
    let spec = configure(args)?;
    let mut log = match &args.iteration_log {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            writeln!(w, "run,iteration,residual,condition")?;
            Some(w)
        }
        None => None,
    };
    let mut io_error = None;
    let mut observer = |label: &str, rec: &IterationRecord| {
        if let Some(w) = log.as_mut() {
            if let Err(e) = writeln!(w, "{label},{},{:e},{:e}", rec.iteration, rec.residual, rec.condition) {
                io_error.get_or_insert(e);
            }
        }
    };
    let mut options = RunOptions {
        export_dir: args.export_matrices.clone(),
        pair_report: args.pair_report.clone(),
        observer: Some(&mut observer),
    };
    let rows = run_experiment(&spec, &mut options)?;
    drop(options);
    if let Some(e) = io_error {
        return Err(e.into());
    }
    if let Some(mut w) = log {
        w.flush()?;
    }

    let table = emit_table(&rows, args.format, !args.no_times)?;
    match &args.out {
        Some(path) => std::fs::write(path, table)?,
        None => print!("{table}"),
    }
    for r in rows.iter().filter(|r| !r.converged) {
        log::warn!("{}: no convergence in {} iterations", r.label(), r.iterations);
    }
    Ok(rows.iter().all(|r| r.converged))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
