use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::config::ExperimentSpec;
use crate::riemann::solve_fluxes;
use crate::{DivergeModel, Error, Fluxes, Result, RiemannInput};

use super::{num, Report};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Which constraint binds at a point.
///
/// FIFO models use regions I, II, III for `q_0 = D_0`, `S_1 / xi_1`,
/// `S_2 / xi_2`. The evacuation models list the quantities met with
/// equality (`D0`, `S1`, `S2`); `route` means only a routed share caps the
/// flux. Ties join labels with `+`.
pub fn region_label(model: &DivergeModel, d0: f64, s: [f64; 2], q: &Fluxes) -> String {
    let mut hit = Vec::new();
    if let (true, Some(xi)) = (model.is_fifo_family(), model.xi()) {
        let t = [d0, s[0] / xi[0], s[1] / xi[1]];
        let min = t.iter().copied().fold(f64::INFINITY, f64::min);
        for (k, name) in ["I", "II", "III"].into_iter().enumerate() {
            if close(t[k], min) {
                hit.push(name);
            }
        }
    } else {
        for (bound, value, name) in [(d0, q.q0, "D0"), (s[0], q.q1, "S1"), (s[1], q.q2, "S2")] {
            if close(bound, value) {
                hit.push(name);
            }
        }
        if hit.is_empty() {
            hit.push("route");
        }
    }
    hit.join("+")
}

pub fn flux_map(spec: &ExperimentSpec) -> Result<Report> {
    let sweep = spec
        .sweep
        .ok_or_else(|| Error::Config("flux-map needs [sweep]".into()))?;
    let fds = spec.diagrams;
    let [d0s, s1s, s2s] = sweep.axes(&fds);
    let mut points = Vec::with_capacity(d0s.len() * s1s.len() * s2s.len());
    for &d in &d0s {
        for &a in &s1s {
            for &b in &s2s {
                points.push([d, a, b]);
            }
        }
    }
    let mut report = Report::new(spec);
    let mut csv = String::from("model,d0,s1,s2,q0,q1,q2,region\n");
    let mut conserved = true;
    let mut feasible = true;
    for model in &spec.models {
        let rows = spec.execution.map(&points, |p| -> Result<(Fluxes, String)> {
            let input = RiemannInput::from_demand_supply(fds, p[0], p[1], p[2])?;
            let q = solve_fluxes(model, &input)?;
            Ok((q, region_label(model, p[0], [p[1], p[2]], &q)))
        });
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for (p, row) in points.iter().zip(rows) {
            let (q, region) = row?;
            conserved &= q.q0 == q.q1 + q.q2;
            feasible &= q.q1 >= 0.0
                && q.q2 >= 0.0
                && q.q0 <= p[0] + 1e-12
                && q.q1 <= p[1] + 1e-12
                && q.q2 <= p[2] + 1e-12;
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{},{},{region}",
                model.tag(),
                num(p[0]),
                num(p[1]),
                num(p[2]),
                num(q.q0),
                num(q.q1),
                num(q.q2)
            );
            *counts.entry(region).or_default() += 1;
        }
        let summary: Vec<String> = counts.iter().map(|(r, n)| format!("{r}: {n}")).collect();
        report.line(format!("{model}: {} points; {}", points.len(), summary.join(", ")));
    }
    report.check("conservation", conserved, "q0 = q1 + q2 at every point");
    report.check("feasibility", feasible, "0 <= q_i <= S_i and q0 <= D0 at every point");
    report.file("flux_map.csv", csv);
    Ok(report)
}
