use std::fmt::Write as _;

use crate::config::ExperimentSpec;
use crate::properties::{run_suite, PropertySettings, Solver};
use crate::riemann::solve_fluxes;
use crate::{DivergeModel, Result};

use super::{num, Report};

fn default_models() -> Result<Vec<DivergeModel>> {
    Ok(vec![
        DivergeModel::daganzo([0.7, 0.3])?,
        DivergeModel::lebacque([0.7, 0.3])?,
        DivergeModel::supply_proportional(),
        DivergeModel::priority([0.5, 0.5])?,
        DivergeModel::partial([0.3, 0.2], [0.5, 0.5])?,
    ])
}

pub fn property_suite(spec: &ExperimentSpec) -> Result<Report> {
    property_suite_with(spec, solve_fluxes)
}

/// Property suite against an arbitrary flux solver.
pub fn property_suite_with(spec: &ExperimentSpec, solver: Solver) -> Result<Report> {
    let mut settings = PropertySettings::new(spec.seed, spec.diagrams);
    settings.samples = spec.properties.samples;
    settings.oracle_grid = spec.properties.oracle_grid;
    settings.simulations = spec.properties.simulations;
    settings.oracle_models = if spec.models.is_empty() {
        default_models()?
    } else {
        spec.models.clone()
    };
    settings.execution = spec.execution;
    let outcomes = run_suite(&settings, solver)?;

    let mut report = Report::new(spec);
    report.line(format!(
        "samples per property: {}, oracle grid: {}^3, simulations: {}",
        settings.samples, settings.oracle_grid, settings.simulations
    ));
    let mut csv = String::from("property,trials,failures,max_error,tolerance,passed\n");
    for o in &outcomes {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            o.name,
            o.trials,
            o.failures,
            num(o.max_error),
            num(o.tolerance),
            o.passed()
        );
        let mut detail = format!(
            "{} trials, {} failures, max error {:.3e} (tol {:.0e})",
            o.trials, o.failures, o.max_error, o.tolerance
        );
        if let Some(c) = &o.counterexample {
            detail.push_str("; counterexample: ");
            detail.push_str(c);
        }
        report.check(o.name.clone(), o.passed(), detail);
    }
    report.file("properties.csv", csv);
    Ok(report)
}
