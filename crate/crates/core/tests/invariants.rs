#![allow(clippy::needless_range_loop)]

use diverge::ctm::{self, proportion_update, InitialDensity, SimConfig};
use diverge::properties::{run_suite, PropertySettings};
use diverge::riemann::{local_discrete_flux, solve, solve_fluxes};
use diverge::{DivergeModel, Execution, FundamentalDiagram, RiemannInput, TrafficState};
use proptest::prelude::*;

fn diagrams() -> [FundamentalDiagram; 3] {
    [
        FundamentalDiagram::mainline(),
        FundamentalDiagram::mainline(),
        FundamentalDiagram::ramp(),
    ]
}

fn any_diagram() -> impl Strategy<Value = FundamentalDiagram> {
    prop_oneof![
        Just(FundamentalDiagram::mainline()),
        Just(FundamentalDiagram::ramp()),
        Just(FundamentalDiagram::greenshields(1.0, 1.0).unwrap()),
        Just(FundamentalDiagram::triangular(1.0, 0.5, 1.0).unwrap()),
    ]
}

/// Flux at x = 0 of the exact LWR Riemann solution for a unimodal Q: the
/// minimum of Q between the states for rho_l <= rho_r, the maximum
/// otherwise. Evaluated by dense sampling; also returns the sampling error
/// bound (twice the steepest sampled slope times the spacing).
fn exact_interface_flux(fd: &FundamentalDiagram, rho_l: f64, rho_r: f64) -> (f64, f64) {
    let n = 4000;
    let (lo, hi) = (rho_l.min(rho_r), rho_l.max(rho_r));
    let h = (hi - lo) / n as f64;
    let values: Vec<f64> = (0..=n).map(|i| fd.flow(lo + h * i as f64).unwrap()).collect();
    let slope = values.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let flux = if rho_l <= rho_r {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    } else {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    };
    (flux, 2.0 * slope + 1e-12)
}

fn model(kind: usize, xi1: f64, alpha1: f64, p: [f64; 2]) -> DivergeModel {
    match kind {
        0 => DivergeModel::daganzo([xi1, 1.0 - xi1]).unwrap(),
        1 => DivergeModel::lebacque([xi1, 1.0 - xi1]).unwrap(),
        2 => DivergeModel::supply_proportional(),
        3 => DivergeModel::priority([alpha1, 1.0 - alpha1]).unwrap(),
        _ => {
            let x = [p[0] * 0.5, p[1] * 0.5];
            let a1 = x[0] + alpha1 * (1.0 - x[1] - x[0]);
            DivergeModel::partial(x, [a1, 1.0 - a1]).unwrap()
        }
    }
}

proptest! {
    #[test]
    fn godunov_matches_exact_riemann_flux(fd in any_diagram(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let jam = fd.jam_density();
        let (rl, rr) = (a * jam, b * jam);
        let godunov = fd.demand(rl).unwrap().min(fd.supply(rr).unwrap());
        let (exact, bound) = exact_interface_flux(&fd, rl, rr);
        prop_assert!((godunov - exact).abs() <= bound, "{godunov} vs {exact} (bound {bound})");
    }

    #[test]
    fn demand_supply_representation(fd in any_diagram(), a in 0.0f64..=1.0) {
        let rho = a * fd.jam_density();
        let u = fd.state_of(rho).unwrap();
        let q = fd.flow(rho).unwrap();
        prop_assert!((u.demand.max(u.supply) - fd.capacity()).abs() < 1e-12);
        prop_assert!((u.demand.min(u.supply) - q).abs() < 1e-12);
        let back = fd.density_from_state(u).unwrap();
        prop_assert!((fd.flow(back).unwrap() - q).abs() < 1e-9);
    }

    #[test]
    fn global_fluxes_are_feasible(
        kind in 0usize..5,
        xi1 in 0.05f64..0.95,
        alpha1 in 0.0f64..=1.0,
        p in prop::array::uniform2(0.0f64..=1.0),
        x in prop::array::uniform3(0.0f64..=1.0),
    ) {
        let fds = diagrams();
        let c = fds.map(|f| f.capacity());
        let m = model(kind, xi1, alpha1, p);
        let input = RiemannInput::from_demand_supply(fds, x[0] * c[0], x[1] * c[1], x[2] * c[2]).unwrap();
        let q = solve_fluxes(&m, &input).unwrap();
        prop_assert_eq!(q.q0, q.q1 + q.q2);
        prop_assert!(q.q1 >= 0.0 && q.q2 >= 0.0);
        prop_assert!(q.q0 <= input.d0() + 1e-12);
        prop_assert!(q.q1 <= input.supplies()[0] + 1e-12 && q.q2 <= input.supplies()[1] + 1e-12);
    }

    #[test]
    fn interior_states_reproduce_global_fluxes(
        kind in 0usize..5,
        xi1 in 0.05f64..0.95,
        alpha1 in 0.0f64..=1.0,
        p in prop::array::uniform2(0.0f64..=1.0),
        rho in prop::array::uniform3(0.0f64..=1.0),
    ) {
        let fds = diagrams();
        let m = model(kind, xi1, alpha1, p);
        let rho = [0, 1, 2].map(|l| rho[l] * fds[l].jam_density());
        let input = RiemannInput::from_densities(fds, rho).unwrap();
        let sol = solve(&m, &input).unwrap();
        let xi = sol.interior_proportions.or(m.xi()).unwrap_or([0.0, 0.0]);
        let local = local_discrete_flux(&m, sol.interior_upstream, sol.interior_downstream, xi).unwrap();
        prop_assert!(local.max_abs_diff(&sol.fluxes) < 1e-12, "{} vs {}", local, sol.fluxes);
    }

    #[test]
    fn daganzo_local_rule_equals_global_at_initial_states(
        xi1 in 0.05f64..0.95,
        x in prop::array::uniform3(0.0f64..=1.0),
    ) {
        let fds = diagrams();
        let c = fds.map(|f| f.capacity());
        let m = DivergeModel::daganzo([xi1, 1.0 - xi1]).unwrap();
        let up = TrafficState::under_critical(x[0] * c[0], c[0]);
        let down = [
            TrafficState::over_critical(c[1], x[1] * c[1]),
            TrafficState::over_critical(c[2], x[2] * c[2]),
        ];
        let input = RiemannInput::new(up, down, fds).unwrap();
        let local = local_discrete_flux(&m, up, down, [xi1, 1.0 - xi1]).unwrap();
        prop_assert!(local.max_abs_diff(&solve_fluxes(&m, &input).unwrap()) < 1e-15);
    }

    #[test]
    fn proportion_update_stays_in_unit_interval(
        rho_old in 0.0f64..2.0,
        q_in in 0.0f64..0.34,
        q_out in 0.0f64..0.34,
        xi_old in 0.0f64..=1.0,
        xi_up in 0.0f64..=1.0,
        r in 0.1f64..0.9,
    ) {
        // Physical fluxes never take out more than the cell holds.
        let q_out = q_out.min(rho_old / r);
        let rho_new = rho_old + r * (q_in - q_out);
        let xi = proportion_update(rho_old, rho_new, xi_old, xi_up, q_in, q_out, r);
        prop_assert!((0.0..=1.0).contains(&xi));
        let same = proportion_update(rho_old, rho_new, xi_old, xi_old, q_in, q_out, r);
        prop_assert_eq!(same, xi_old);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulation_keeps_bounds_and_conserves(
        kind in 0usize..5,
        xi1 in 0.05f64..0.95,
        cells in 5usize..30,
        seed_rho in prop::collection::vec(0.0f64..=1.0, 90),
    ) {
        let fds = diagrams();
        let m = model(kind, xi1, 0.5, [0.5, 0.5]);
        let mut cfg = SimConfig::uniform(m, fds, [0.0; 3], [xi1, 1.0 - xi1], cells, 2.0, 8.0);
        cfg.initial_densities = [0, 1, 2].map(|l| {
            InitialDensity::Cells((0..cells).map(|k| seed_rho[30 * l + k] * fds[l].jam_density()).collect())
        });
        let traj = ctm::run(&cfg).unwrap();
        prop_assert!(traj.conservation.relative_drift() < 1e-8);
        for l in 0..3 {
            prop_assert!(traj.final_state.densities[l].iter().all(|r| (0.0..=fds[l].jam_density()).contains(r)));
        }
        prop_assert!(traj.final_state.proportions.iter().all(|x| (0.0..=1.0).contains(&x[0]) && (0.0..=1.0).contains(&x[1])));
    }
}

#[test]
fn zero_demand_run_stays_empty() {
    let m = DivergeModel::lebacque([0.7, 0.3]).unwrap();
    let traj = ctm::run(&SimConfig::uniform(m, diagrams(), [0.0; 3], [0.7, 0.3], 20, 10.0, 30.0)).unwrap();
    for l in 0..3 {
        assert!(traj.final_state.densities[l].iter().all(|r| *r == 0.0));
    }
    assert!(traj.junction.iter().all(|r| r.fluxes.q0 == 0.0));
}

#[test]
fn property_suite_is_independent_of_execution() {
    let mut s = PropertySettings::new(11, diagrams());
    s.samples = 400;
    s.oracle_grid = 3;
    s.oracle_models = vec![DivergeModel::supply_proportional()];
    s.simulations = 4;
    s.execution = Execution::Sequential;
    let a = run_suite(&s, solve_fluxes).unwrap();
    s.execution = Execution::Parallel;
    let b = run_suite(&s, solve_fluxes).unwrap();
    assert_eq!(a, b);
}
