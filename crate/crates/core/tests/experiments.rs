use std::path::PathBuf;

use diverge::config::ExperimentSpec;
use diverge::experiments::{self, property_suite_with};
use diverge::riemann::solve_fluxes;
use diverge::{DivergeModel, Fluxes, Result, RiemannInput};

fn repo_file(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn spec(rel: &str) -> ExperimentSpec {
    ExperimentSpec::from_file(&repo_file(rel), None, None).unwrap()
}

#[test]
fn convergence_matches_golden_epsilon() {
    let report = experiments::run(&spec("configs/converge.toml")).unwrap();
    assert!(report.passed(), "{}", report.render());
    let got = report.files.iter().find(|f| f.name == "epsilon_M160.csv").unwrap();
    let golden = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/epsilon_M160.csv"),
    )
    .unwrap();
    assert_eq!(got.contents, golden);
}

#[test]
fn reruns_are_identical() {
    let s = spec("configs/riemann_verify.toml");
    let a = experiments::run(&s).unwrap();
    let b = experiments::run(&s).unwrap();
    assert_eq!(a, b);
    assert!(a.render().contains(&s.config_hash));
}

#[test]
fn reference_verification_refines() {
    let report = experiments::run(&spec("configs/riemann_verify.toml")).unwrap();
    assert!(report.passed(), "{}", report.render());
    assert!(report.check_named("refinement").unwrap().passed);
    assert!(report.check_named("last-cell proportion").unwrap().passed);
}

#[test]
fn shock_fronts_are_checked() {
    let report = experiments::run(&spec("configs/shock.toml")).unwrap();
    assert!(report.passed(), "{}", report.render());
    assert!(report.check_named("shock front link 0").is_some());
    assert!(report.check_named("shock front link 1").is_some());
}

const EMPTY: &str = r#"
experiment = "riemann-verify"
[model]
kind = "daganzo-fifo"
xi = [0.5, 0.5]
[sim]
cells_per_link = 20
link_length = 10.0
horizon = 20.0
initial_densities = [0.0, 0.0, 0.0]
"#;

#[test]
fn zero_demand_verification_passes() {
    let report = experiments::run(&ExperimentSpec::from_toml(EMPTY, None, None).unwrap()).unwrap();
    assert!(report.passed(), "{}", report.render());
}

#[test]
fn identical_models_have_zero_epsilon() {
    let text = r#"
experiment = "convergence"
resolutions = [10, 20]
[model]
kind = "daganzo-fifo"
xi = [0.7, 0.3]
[convergence]
reference = { kind = "daganzo-fifo", xi = [0.7, 0.3] }
[sim]
cells_per_link = 10
link_length = 10.0
horizon = 60.0
initial_densities = [1.0, 1.0, 0.1]
"#;
    let report = experiments::run(&ExperimentSpec::from_toml(text, None, None).unwrap()).unwrap();
    assert!(report.passed());
    for f in report.files.iter().filter(|f| f.name.starts_with("epsilon_")) {
        assert!(f.contents.lines().skip(1).all(|l| l.ends_with(",0.00000000000e0")), "{}", f.name);
    }
}

/// Daganzo's rule with the outer `min` swapped for `max`.
fn max_instead_of_min(model: &DivergeModel, input: &RiemannInput) -> Result<Fluxes> {
    match model.xi() {
        Some(xi) if model.is_fifo_family() => {
            let s = input.supplies();
            let q0 = input.d0().max(s[0] / xi[0]).min(s[1] / xi[1]);
            Ok(Fluxes::from_split(xi[0] * q0, xi[1] * q0))
        }
        _ => solve_fluxes(model, input),
    }
}

#[test]
fn mutated_solver_fails_the_oracle() {
    let text = r#"
experiment = "property-suite"
seed = 5
[properties]
samples = 200
oracle_grid = 5
simulations = 0
[[models]]
kind = "daganzo-fifo"
xi = [0.7, 0.3]
"#;
    let s = ExperimentSpec::from_toml(text, None, None).unwrap();
    let good = property_suite_with(&s, solve_fluxes).unwrap();
    assert!(good.passed(), "{}", good.render());
    let bad = property_suite_with(&s, max_instead_of_min).unwrap();
    let oracle = bad.checks.iter().find(|c| c.name.starts_with("oracle")).unwrap();
    assert!(!oracle.passed);
    assert!(oracle.detail.contains("counterexample: D0="), "{}", oracle.detail);
}

#[test]
fn flux_map_table_shape() {
    let report = experiments::run(&spec("configs/flux_map.toml")).unwrap();
    assert!(report.passed());
    let csv = &report.files[0].contents;
    assert_eq!(csv.lines().next().unwrap(), "model,d0,s1,s2,q0,q1,q2,region");
    assert_eq!(csv.lines().count(), 1 + 4 * 41 * 41);
}
