use std::fmt::Write as _;

use crate::config::ExperimentSpec;
use crate::ctm::{self, solution_difference, EpsilonPoint};
use crate::{Error, Result};

use super::{num, Report};

/// `step,epsilon`.
pub fn epsilon_csv(points: &[EpsilonPoint]) -> String {
    let mut s = String::from("step,epsilon\n");
    for p in points {
        let _ = writeln!(s, "{},{}", p.step, num(p.epsilon));
    }
    s
}

/// Runs the configured model and the reference model side by side at every
/// resolution and compares them with the L1 difference `eps(t)`.
pub fn convergence_study(spec: &ExperimentSpec) -> Result<Report> {
    let reference = spec
        .reference
        .ok_or_else(|| Error::Config("convergence needs [convergence] reference".into()))?;
    let mut report = Report::new(spec);
    let configs = spec
        .resolutions
        .iter()
        .map(|&m| spec.sim_at(m))
        .collect::<Result<Vec<_>>>()?;
    let model = configs[0].model;
    report.line(format!("model: {model}"));
    report.line(format!("reference: {reference}"));

    let series = spec.execution.map(&configs, |cfg| -> Result<Vec<EpsilonPoint>> {
        let mut other = cfg.clone();
        other.model = reference;
        let (a, b) = spec.execution.join(|| ctm::run(cfg), || ctm::run(&other));
        solution_difference(&a?, &b?)
    });

    let mut finals = Vec::new();
    for (cfg, eps) in configs.iter().zip(series) {
        let eps = eps?;
        let last = eps.last().map_or(0.0, |p| p.epsilon);
        let peak = eps.iter().map(|p| p.epsilon).fold(0.0, f64::max);
        report.line(format!(
            "M={} N={} dt={}: eps(T) = {:.6e}, max eps = {:.6e}",
            cfg.cells_per_link,
            cfg.time_steps,
            cfg.dt(),
            last,
            peak
        ));
        report.file(format!("epsilon_M{}.csv", cfg.cells_per_link), epsilon_csv(&eps));
        finals.push((cfg.cells_per_link, last));
    }

    let mut summary = String::from("cells,epsilon_final\n");
    for (m, e) in &finals {
        let _ = writeln!(summary, "{m},{}", num(*e));
    }
    report.file("convergence.csv", summary);

    // Identical models give eps = 0 at every resolution, which is the
    // expected outcome rather than a failure to converge.
    let identical = finals.iter().all(|f| f.1 == 0.0);
    let decreasing = identical || finals.windows(2).all(|w| w[1].1 < w[0].1);
    let listing: Vec<String> = finals.iter().map(|(m, e)| format!("M={m}: {e:.6e}")).collect();
    report.check("eps(T) decreases with M", decreasing, listing.join(", "));
    Ok(report)
}
