use crate::config::ExperimentSpec;
use crate::ctm::{self, InitialDensity, InitialProportions, SimConfig, Trajectory};
use crate::riemann::{solve, RiemannSolution};
use crate::wave::{link_waves, WaveDescription, WaveKind};
use crate::{Error, Fluxes, Result, RiemannInput, TrafficState};

use super::{fields_csv, junction_csv, num, Report};

/// Position of the steepest density jump on `link`, measured from the
/// junction (negative upstream). `None` for links shorter than two cells.
pub fn front_position(densities: &[f64], link: usize, dx: f64) -> Option<f64> {
    let m = densities.len();
    let k = (1..m)
        .max_by(|&a, &b| {
            let ga = (densities[a] - densities[a - 1]).abs();
            let gb = (densities[b] - densities[b - 1]).abs();
            // Earliest interface wins a tie.
            ga.total_cmp(&gb).then(b.cmp(&a))
        })?;
    // Interface k sits between cells k-1 and k.
    Some(if link == 0 {
        -((m - k) as f64) * dx
    } else {
        k as f64 * dx
    })
}

/// Numerical values next to the junction at the final time.
struct Measured {
    cells: usize,
    states: [TrafficState; 3],
    densities: [f64; 3],
    fluxes: Fluxes,
    xi_last: [f64; 2],
    error: f64,
}

fn uniform_densities(cfg: &SimConfig) -> Result<[f64; 3]> {
    let mut rho = [0.0; 3];
    for (link, d) in cfg.initial_densities.iter().enumerate() {
        match d {
            InitialDensity::Uniform(v) => rho[link] = *v,
            InitialDensity::Cells(_) => {
                return Err(Error::Config(format!(
                    "riemann-verify needs uniform initial densities, link {link} is per-cell"
                )))
            }
        }
    }
    Ok(rho)
}

fn measure(cfg: &SimConfig, traj: &Trajectory, exact: &RiemannSolution) -> Result<Measured> {
    let m = cfg.cells_per_link;
    let fs = &traj.final_state;
    let densities = [fs.densities[0][m - 1], fs.densities[1][0], fs.densities[2][0]];
    let mut states = [TrafficState::new(0.0, 0.0); 3];
    for link in 0..3 {
        states[link] = cfg.diagrams[link].state_of(densities[link])?;
    }
    let fluxes = traj.junction.last().map_or(Fluxes::ZERO, |r| r.fluxes);
    let stat = exact.stationary_states();
    let mut error = exact.fluxes.max_abs_diff(&fluxes);
    for link in 0..3 {
        error = error
            .max((states[link].demand - stat[link].demand).abs())
            .max((states[link].supply - stat[link].supply).abs());
    }
    Ok(Measured {
        cells: m,
        states,
        densities,
        fluxes,
        xi_last: fs.proportions[m - 1],
        error,
    })
}

pub fn riemann_verify(spec: &ExperimentSpec) -> Result<Report> {
    let base = spec
        .sim
        .as_ref()
        .ok_or_else(|| Error::Config("riemann-verify needs [sim]".into()))?;
    let tol = spec.tolerance;
    let fds = base.diagrams;
    let rho = uniform_densities(base)?;
    let input = RiemannInput::from_densities(fds, rho)?;
    let exact = solve(&base.model, &input)?;
    let mut report = Report::new(spec);

    report.line(format!("model: {}", base.model));
    report.line(format!(
        "initial densities: {}, {}, {}",
        rho[0], rho[1], rho[2]
    ));
    report.line(format!("analytical fluxes: {}", exact.fluxes));
    let names = ["U0(0-)", "U1(0+)", "U2(0+)"];
    let stat = exact.stationary_states();
    let inter = exact.interior_states();
    let mut exact_rho = [0.0; 3];
    for link in 0..3 {
        exact_rho[link] = fds[link].density_from_state(stat[link])?;
        report.line(format!(
            "analytical {}: stationary {} density {:.6}, interior {}",
            names[link], stat[link], exact_rho[link], inter[link]
        ));
    }
    if let Some(xi) = exact.interior_proportions {
        report.line(format!("analytical interior proportions: ({:.6}, {:.6})", xi[0], xi[1]));
    }

    let waves = link_waves(&exact, &input);
    match &waves {
        Ok(w) => {
            for (link, wave) in w.iter().enumerate() {
                report.line(format!(
                    "link {link} wave: {} speeds [{:.6}, {:.6}]",
                    wave.kind, wave.speed_range[0], wave.speed_range[1]
                ));
            }
            report.check("wave signs", true, "upstream speeds <= 0, downstream >= 0");
        }
        Err(e) => report.check("wave signs", false, e.to_string()),
    }

    // Coarser resolutions first; the finest one gets the detailed checks.
    let mut cells: Vec<usize> = spec.resolutions.clone();
    if !cells.contains(&base.cells_per_link) {
        cells.push(base.cells_per_link);
        cells.sort_unstable();
    }
    let configs: Vec<SimConfig> = cells
        .iter()
        .map(|&m| if m == base.cells_per_link { Ok(base.clone()) } else { spec.sim_at(m) })
        .collect::<Result<_>>()?;
    let runs = spec.execution.map(&configs, ctm::run);
    let mut measured = Vec::new();
    let mut finest = None;
    for (cfg, run) in configs.iter().zip(runs) {
        let traj = run?;
        let mm = measure(cfg, &traj, &exact)?;
        report.line(format!(
            "M={} N={}: max |numerical - analytical| = {:.6e}",
            cfg.cells_per_link, cfg.time_steps, mm.error
        ));
        measured.push(mm);
        finest = Some((cfg, traj));
    }
    let (cfg, traj) = finest.expect("at least one resolution");
    let fin = measured.last().expect("at least one resolution");

    let q = fin.fluxes;
    let flux_err = exact.fluxes.max_abs_diff(&q);
    report.check(
        "junction fluxes",
        flux_err < tol,
        format!("numerical {q} vs analytical {}, max diff {flux_err:.3e} (tol {tol})", exact.fluxes),
    );
    for link in 0..3 {
        let u = fin.states[link];
        let e = (u.demand - stat[link].demand).abs().max((u.supply - stat[link].supply).abs());
        report.check(
            format!("state {}", names[link]),
            e < tol,
            format!("numerical {u} vs analytical {}, max diff {e:.3e}", stat[link]),
        );
        let e = (fin.densities[link] - exact_rho[link]).abs();
        report.check(
            format!("density {}", names[link]),
            e < tol,
            format!("numerical {:.6} vs analytical {:.6}", fin.densities[link], exact_rho[link]),
        );
    }

    if cfg.model.is_fifo_family() {
        if let Some(xi) = exact.interior_proportions {
            let e = (fin.xi_last[0] - xi[0]).abs();
            report.check(
                "last-cell proportion",
                e < tol,
                format!("numerical xi1 {:.6} vs interior {:.6}", fin.xi_last[0], xi[0]),
            );
        }
    }
    if let InitialProportions::Uniform(xi0) = cfg.initial_proportions {
        if cfg.inflow_proportions == xi0 {
            let m = cfg.cells_per_link;
            let changed = traj.final_state.proportions[..m - 1].iter().position(|xi| *xi != xi0);
            report.check(
                "untouched proportions",
                changed.is_none(),
                match changed {
                    None => format!("cells 0..{} keep ({}, {}) exactly", m - 1, xi0[0], xi0[1]),
                    Some(c) => format!("cell {c} has {:?}", traj.final_state.proportions[c]),
                },
            );
        }
    }

    let drift = traj.conservation.relative_drift();
    report.check("conservation", drift < 1e-8, format!("relative drift {drift:.3e}"));

    if let Ok(w) = &waves {
        front_checks(&mut report, cfg, &traj, w);
    }

    if measured.len() > 1 {
        let errs: Vec<String> = measured.iter().map(|m| format!("M={}: {:.6e}", m.cells, m.error)).collect();
        let decreasing = measured.windows(2).all(|p| p[1].error < p[0].error);
        report.check("refinement", decreasing, errs.join(", "));
    }

    report.file("fields.csv", fields_csv(&traj));
    report.file("junction.csv", junction_csv(&traj.junction));
    report.file("summary.csv", summary_csv(&measured, &exact, exact_rho));
    Ok(report)
}

/// Shock fronts that are still inside their link at the final time are
/// located by the steepest density jump and must sit within one cell of the
/// Rankine-Hugoniot position.
fn front_checks(report: &mut Report, cfg: &SimConfig, traj: &Trajectory, waves: &[WaveDescription; 3]) {
    let dx = cfg.dx();
    for (link, w) in waves.iter().enumerate() {
        if w.kind != WaveKind::Shock {
            continue;
        }
        let predicted = w.speed_range[0] * cfg.horizon;
        if predicted.abs() < 2.0 * dx || predicted.abs() > cfg.link_length - 2.0 * dx {
            report.line(format!(
                "link {link} shock front at {predicted:.4} is not inside the link; position not checked"
            ));
            continue;
        }
        match front_position(&traj.final_state.densities[link], link, dx) {
            Some(x) => {
                let e = (x - predicted).abs();
                report.check(
                    format!("shock front link {link}"),
                    e <= dx,
                    format!("measured {x:.4} vs predicted {predicted:.4}, |diff| {e:.4} (cell {dx:.4})"),
                );
            }
            None => report.line(format!("link {link} too short to locate the front")),
        }
    }
}

fn summary_csv(measured: &[Measured], exact: &RiemannSolution, exact_rho: [f64; 3]) -> String {
    let mut s = String::from("cells,q0,q1,q2,d0,s0,d1,s1,d2,s2,rho0,rho1,rho2,xi1,xi2,error\n");
    let mut row = |cells: String, q: Fluxes, u: [TrafficState; 3], rho: [f64; 3], xi: [f64; 2], err: String| {
        s.push_str(&cells);
        for v in [q.q0, q.q1, q.q2] {
            s.push(',');
            s.push_str(&num(v));
        }
        for st in u {
            s.push_str(&format!(",{},{}", num(st.demand), num(st.supply)));
        }
        for v in rho.into_iter().chain(xi) {
            s.push(',');
            s.push_str(&num(v));
        }
        s.push(',');
        s.push_str(&err);
        s.push('\n');
    };
    for m in measured {
        row(m.cells.to_string(), m.fluxes, m.states, m.densities, m.xi_last, num(m.error));
    }
    let stat = exact.stationary_states();
    let xi = exact.interior_proportions.unwrap_or([f64::NAN; 2]);
    row("exact".into(), exact.fluxes, stat, exact_rho, xi, String::new());
    s
}
