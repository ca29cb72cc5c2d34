use adaptive_bddc::experiment::{
    emit_table, parse_table, run_experiment, ConstraintMode, ExperimentSpec, ResultRow, RunOptions, TableFormat,
};
use adaptive_bddc::fem::{Material, Physics, ProblemSpec, Region};
use adaptive_bddc::solver::Stopping;
use adaptive_bddc::Error;

const CUBE: &str = r#"
physics = "elasticity"

[mesh]
subdomains = [2, 2, 2]
elements_per_subdomain = 4

[[materials]]
young = 1.0
poisson = 0.3

[dirichlet]
faces = ["x-"]

[[load]]
kind = "traction"
face = "x+"
value = [0.0, 0.0, 1.0]

[experiment]
modes = ["c", "c+e", "c+e+f"]
"#;

fn run(spec: &ExperimentSpec) -> Vec<ResultRow> {
    run_experiment(spec, &mut RunOptions::default()).unwrap()
}

fn spec_with(problem: ProblemSpec, modes: &[ConstraintMode], tau: &[f64]) -> ExperimentSpec {
    let mut spec = ExperimentSpec::from_toml(CUBE).unwrap();
    spec.problem = problem;
    spec.experiment.modes = modes.to_vec();
    spec.experiment.tau = tau.to_vec();
    spec
}

#[test]
fn parses_experiment_files() {
    let spec = ExperimentSpec::from_toml(CUBE).unwrap();
    assert_eq!(spec.problem.mesh.subdomains, [2, 2, 2]);
    assert_eq!(spec.problem.physics, Physics::Elasticity);
    assert_eq!(spec.experiment.modes.len(), 3);
    assert_eq!(spec.solver.stopping, Stopping::TrueResidual);
    assert!(spec.experiment.change_of_variables);

    let with_tau = format!("{CUBE}tau = [inf, 10.0]\n").replace("\"c+e+f\"]", "\"adaptive\"]");
    let spec = ExperimentSpec::from_toml(&with_tau).unwrap();
    assert_eq!(spec.experiment.tau, [f64::INFINITY, 10.0]);
    assert_eq!("c+e+f-3eigv".parse::<ConstraintMode>().unwrap(), ConstraintMode::ThreeEigenvectors);
}

#[test]
fn rejects_invalid_experiments() {
    let adaptive = CUBE.replace("\"c+e+f\"]", "\"adaptive\"]");
    assert!(matches!(ExperimentSpec::from_toml(&adaptive), Err(Error::InvalidSpec(_))));
    let negative = format!("{adaptive}tau = [-1.0]\n");
    assert!(matches!(ExperimentSpec::from_toml(&negative), Err(Error::InvalidSpec(_))));
    let unknown = format!("{CUBE}colour = \"red\"\n");
    assert!(ExperimentSpec::from_toml(&unknown).is_err());
    let bad_mode = CUBE.replace("\"c+e+f\"", "\"faces\"");
    assert!(ExperimentSpec::from_toml(&bad_mode).is_err());
}

#[test]
fn edge_mode_counts_edge_rows() {
    let spec = spec_with(ProblemSpec::cube([2, 2, 2], 2, Physics::Elasticity), &[ConstraintMode::Edges], &[]);
    let rows = run(&spec);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].nc, 54);
    assert!(rows[0].converged);
    assert_eq!(rows[0].indicator, None);
}

#[test]
fn infinite_threshold_reproduces_edge_row() {
    let spec = spec_with(
        ProblemSpec::cube([2, 2, 2], 2, Physics::Elasticity),
        &[ConstraintMode::Edges, ConstraintMode::Adaptive],
        &[f64::INFINITY],
    );
    let rows = run(&spec);
    assert_eq!(rows[1].label(), "tau=inf");
    assert!(rows[1].indicator.unwrap() >= 1.0);
    assert_eq!(
        (rows[0].nc, rows[0].condition, rows[0].iterations),
        (rows[1].nc, rows[1].condition, rows[1].iterations)
    );
}

#[test]
fn single_row_csv_and_markdown_round_trip() {
    let spec = spec_with(ProblemSpec::cube([2, 1, 1], 2, Physics::Scalar), &[ConstraintMode::Corners], &[]);
    let rows = run(&spec);
    let csv = emit_table(&rows, TableFormat::Csv, true).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(csv.lines().next().unwrap(), "mode,omega,nc,kappa,it,analysis,factorization,iterations,total");

    let spec = spec_with(
        ProblemSpec::cube([2, 2, 1], 2, Physics::Scalar),
        &[ConstraintMode::Corners, ConstraintMode::Adaptive],
        &[3.0],
    );
    let rows = run(&spec);
    let csv = emit_table(&rows, TableFormat::Csv, false).unwrap();
    let md = emit_table(&rows, TableFormat::Markdown, false).unwrap();
    assert_eq!(parse_table(&md).unwrap(), parse_table(&csv).unwrap());
    let (header, cells) = parse_table(&md).unwrap();
    assert_eq!(header, ["mode", "omega", "nc", "kappa", "it"]);
    assert_eq!(cells[1][0], "tau=3.000");
}

#[test]
fn matches_golden_table() {
    let spec = ExperimentSpec::from_toml(CUBE).unwrap();
    let table = emit_table(&run(&spec), TableFormat::Csv, false).unwrap();
    assert_eq!(table, include_str!("golden/cube_2x2x2.csv"));
}

#[test]
fn runs_are_deterministic() {
    let mut problem = ProblemSpec::cube([2, 2, 1], 3, Physics::Elasticity);
    problem.load = vec![adaptive_bddc::fem::LoadSpec::Random { amplitude: 1.0, seed: 0 }];
    let mut spec = spec_with(problem, &[ConstraintMode::EdgesFaces, ConstraintMode::Adaptive], &[2.0]);
    spec.experiment.seed = Some(11);
    let a = emit_table(&run(&spec), TableFormat::Csv, false).unwrap();
    let b = emit_table(&run(&spec), TableFormat::Csv, false).unwrap();
    assert_eq!(a, b);
    spec.experiment.seed = Some(12);
    let c = emit_table(&run(&spec), TableFormat::Csv, false).unwrap();
    assert_ne!(a, c);
}

#[test]
fn non_convergence_is_reported_as_a_row() {
    let mut spec = spec_with(ProblemSpec::cube([2, 2, 1], 3, Physics::Elasticity), &[ConstraintMode::Corners], &[]);
    spec.solver.max_iterations = 2;
    let rows = run(&spec);
    assert!(!rows[0].converged);
    assert_eq!(rows[0].iterations, 2);
}

#[test]
fn failures_name_their_phase() {
    let mut problem = ProblemSpec::cube([2, 1, 1], 2, Physics::Elasticity);
    problem.dirichlet.faces.clear();
    let spec = spec_with(problem, &[ConstraintMode::Corners], &[]);
    let err = run_experiment(&spec, &mut RunOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Phase { phase: "factorization", .. }), "{err}");
    assert!(matches!(err.root(), Error::NotPositiveDefinite { .. }), "{err}");
}

#[test]
fn adaptive_beats_edges_on_a_reinforced_cube() {
    let mut problem = ProblemSpec::cube([2, 2, 2], 4, Physics::Elasticity);
    problem.materials = vec![
        Material::Elastic { young: 1e6, poisson: 0.45 },
        Material::Elastic { young: 2.1e11, poisson: 0.3 },
    ];
    let bar = |min: [usize; 3], max: [usize; 3]| Region { material: 1, min, max };
    problem.regions = vec![bar([0, 1, 1], [8, 2, 2]), bar([2, 0, 5], [3, 8, 6]), bar([1, 6, 0], [2, 7, 8])];
    let mut spec = spec_with(problem, &[ConstraintMode::Edges, ConstraintMode::Adaptive], &[100.0]);
    spec.solver.max_iterations = 1000;
    let rows = run(&spec);
    assert!(rows.iter().all(|r| r.converged));
    assert!(rows[1].iterations < rows[0].iterations, "{} vs {}", rows[1].iterations, rows[0].iterations);
}
