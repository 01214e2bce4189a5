use super::local::route_cap;
use super::{DivergeModel, Fluxes, RiemannInput, RiemannSolution};
use crate::supply_demand::TrafficState;
use crate::{tol, Result};

/// Global (continuous) boundary fluxes of the Riemann problem.
pub fn solve_fluxes(model: &DivergeModel, input: &RiemannInput) -> Result<Fluxes> {
    let d0 = input.d0();
    let [s1, s2] = input.supplies();
    let [_, c1, c2] = input.capacities();
    let fluxes = match *model {
        DivergeModel::DaganzoFifo { xi } | DivergeModel::Lebacque { xi } => {
            let q0 = d0.min(s1 / xi[0]).min(s2 / xi[1]);
            Fluxes::from_split(xi[0] * q0, xi[1] * q0)
        }
        DivergeModel::SupplyProportional => {
            // q_i = min{S_i, max{D_0 - S_j, D_0 C_i / (C_1 + C_2)}}
            let share = d0 / (c1 + c2);
            Fluxes::from_split(
                s1.min((d0 - s2).max(share * c1)),
                s2.min((d0 - s1).max(share * c2)),
            )
        }
        DivergeModel::PriorityBased { alpha } => Fluxes::from_split(
            s1.min((d0 - s2).max(alpha[0] * d0)),
            s2.min((d0 - s1).max(alpha[1] * d0)),
        ),
        DivergeModel::PartialEvacuation { xi, alpha } => Fluxes::from_split(
            s1.min(route_cap(s2, xi[1])).min((d0 - s2).max(alpha[0] * d0)),
            s2.min(route_cap(s1, xi[0])).min((d0 - s1).max(alpha[1] * d0)),
        ),
    };
    Ok(fluxes)
}

/// Stationary states from the boundary fluxes. Ties within `1e-12` resolve
/// to the equality branch (`q_0 = D_0`, `q_i = S_i`).
fn stationary_states(input: &RiemannInput, q: &Fluxes) -> (TrafficState, [TrafficState; 2]) {
    let [c0, c1, c2] = input.capacities();
    let d0 = input.d0();
    let s = input.supplies();
    let up = if q.q0 < d0 - tol::FLUX {
        TrafficState::over_critical(c0, q.q0)
    } else {
        TrafficState::under_critical(d0, c0)
    };
    let caps = [c1, c2];
    let down = [0, 1].map(|i| {
        let qi = q.downstream(i);
        if qi < s[i] - tol::FLUX {
            TrafficState::under_critical(qi, caps[i])
        } else {
            TrafficState::over_critical(caps[i], s[i])
        }
    });
    (up, down)
}

fn realized_split(q: &Fluxes) -> Option<[f64; 2]> {
    (q.q0 > 0.0).then(|| [q.q1 / q.q0, q.q1.mul_add(-1.0, q.q0) / q.q0])
}

/// Complete Riemann solution: fluxes, stationary states, canonical interior
/// states and interior commodity proportions.
///
/// Where the interior state of a link is not unique the canonical
/// representative is the stationary state and the link's `interior_unique`
/// flag is cleared.
pub fn solve(model: &DivergeModel, input: &RiemannInput) -> Result<RiemannSolution> {
    let fluxes = solve_fluxes(model, input)?;
    let (up, down) = stationary_states(input, &fluxes);
    let mut sol = RiemannSolution {
        fluxes,
        stationary_upstream: up,
        stationary_downstream: down,
        interior_upstream: up,
        interior_downstream: down,
        interior_proportions: None,
        interior_unique: [true; 3],
    };
    let d0 = input.d0();
    let [s1, s2] = input.supplies();
    let [c0, c1, c2] = input.capacities();

    match *model {
        DivergeModel::DaganzoFifo { xi } | DivergeModel::Lebacque { xi } => {
            let terms = [d0, s1 / xi[0], s2 / xi[1]];
            let q0 = terms[0].min(terms[1]).min(terms[2]);
            let binds = terms.map(|t| t - q0 <= tol::FLUX);
            let ties = binds.iter().filter(|b| **b).count() > 1;
            sol.interior_unique = binds.map(|b| !(b && ties));
            sol.interior_proportions = Some(xi);
            if model.is_fifo_family() && matches!(model, DivergeModel::Lebacque { .. }) && !binds[0] {
                // Upstream is strictly over-critical with interior (C_0, q_0);
                // the split in the last upstream cell adjusts so that the
                // non-binding link receives exactly xi_i q_0.
                if binds[2] {
                    let x1 = xi[0] * s2 / (xi[1] * c0);
                    sol.interior_proportions = Some([x1, 1.0 - x1]);
                } else {
                    let x2 = xi[1] * s1 / (xi[0] * c0);
                    sol.interior_proportions = Some([1.0 - x2, x2]);
                }
            }
        }
        DivergeModel::SupplyProportional => {
            let total = s1 + s2;
            sol.interior_proportions = realized_split(&fluxes);
            if (total - d0).abs() <= tol::FLUX {
                // Any upstream interior state with S >= D_0 works when D_0 < C_0.
                sol.interior_unique[0] = d0 >= c0 - tol::FLUX;
            } else if total > d0 {
                let caps = [c1, c2];
                let s = [s1, s2];
                let fair = caps.map(|c| c * d0 / (c1 + c2));
                let slack = [s[0] - fair[0], s[1] - fair[1]];
                if slack[0] <= tol::FLUX || slack[1] <= tol::FLUX {
                    // One link saturates at its supply; its interior state
                    // carries the supply that makes the local rule return S_i.
                    let i = if slack[0] <= slack[1] { 0 } else { 1 };
                    let j = 1 - i;
                    if d0 - s[i] > tol::FLUX {
                        let interior_supply = (caps[j] * s[i] / (d0 - s[i])).min(caps[i]);
                        sol.interior_downstream[i] =
                            TrafficState::over_critical(caps[i], interior_supply);
                    }
                }
            }
        }
        DivergeModel::PriorityBased { .. } | DivergeModel::PartialEvacuation { .. } => {
            sol.interior_proportions = realized_split(&fluxes);
            // Only interior states forced by admissibility are known to be unique.
            sol.interior_unique = [
                fluxes.q0 < d0 - tol::FLUX,
                fluxes.q1 < s1 - tol::FLUX,
                fluxes.q2 < s2 - tol::FLUX,
            ];
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::super::{local_discrete_flux, RiemannInput};
    use super::*;
    use crate::fundamental_diagram::FundamentalDiagram;

    fn diagrams() -> [FundamentalDiagram; 3] {
        [
            FundamentalDiagram::mainline(),
            FundamentalDiagram::mainline(),
            FundamentalDiagram::ramp(),
        ]
    }

    fn reference_input() -> RiemannInput {
        RiemannInput::from_densities(diagrams(), [1.0, 1.0, 0.1]).unwrap()
    }

    #[test]
    fn fifo_fluxes_on_reference_input() {
        for m in [
            DivergeModel::daganzo([0.7, 0.3]).unwrap(),
            DivergeModel::lebacque([0.7, 0.3]).unwrap(),
        ] {
            let q = solve_fluxes(&m, &reference_input()).unwrap();
            assert!((q.q0 - 0.2804).abs() < 5e-5, "{m}: {q}");
            assert!((q.q1 - 0.1963).abs() < 5e-5, "{m}: {q}");
            assert!((q.q2 - 0.0841).abs() < 5e-5, "{m}: {q}");
            let c2 = diagrams()[2].capacity();
            assert!((q.q0 - c2 / 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn lebacque_solution_states() {
        let m = DivergeModel::lebacque([0.7, 0.3]).unwrap();
        let sol = solve(&m, &reference_input()).unwrap();
        let expect = |u: TrafficState, d: f64, s: f64| {
            assert!(u.approx_eq(&TrafficState::new(d, s), 5e-5), "{u} vs ({d}, {s})")
        };
        expect(sol.stationary_upstream, 0.3365, 0.2804);
        expect(sol.stationary_downstream[0], 0.1963, 0.3365);
        expect(sol.stationary_downstream[1], 0.0841, 0.0841);
        let xi = sol.interior_proportions.unwrap();
        assert!((xi[0] - 0.5833).abs() < 5e-5);
        assert!((xi[0] - 0.7 / 0.3 * 0.25).abs() < 1e-12);
        assert_eq!(sol.interior_unique, [true; 3]);

        let d = solve(&DivergeModel::daganzo([0.7, 0.3]).unwrap(), &reference_input()).unwrap();
        assert_eq!(d.stationary_states(), sol.stationary_states());
        assert_eq!(d.interior_proportions, Some([0.7, 0.3]));
    }

    #[test]
    fn lebacque_local_flux_differs_from_global_at_initial_states() {
        let m = DivergeModel::lebacque([0.7, 0.3]).unwrap();
        let input = reference_input();
        let local = local_discrete_flux(&m, input.upstream, input.downstream, [0.7, 0.3]).unwrap();
        let global = solve_fluxes(&m, &input).unwrap();
        assert!((local.q1 - 0.2355).abs() < 5e-5);
        assert!((global.q1 - 0.1963).abs() < 5e-5);
        let sol = solve(&m, &input).unwrap();
        let at_interior = local_discrete_flux(
            &m,
            sol.interior_upstream,
            sol.interior_downstream,
            sol.interior_proportions.unwrap(),
        )
        .unwrap();
        assert!(at_interior.max_abs_diff(&global) < 1e-12);
    }

    #[test]
    fn zero_demand() {
        let input = RiemannInput::from_demand_supply(diagrams(), 0.0, 0.2, 0.05).unwrap();
        for m in [
            DivergeModel::daganzo([0.7, 0.3]).unwrap(),
            DivergeModel::lebacque([0.7, 0.3]).unwrap(),
            DivergeModel::supply_proportional(),
            DivergeModel::priority([0.5, 0.5]).unwrap(),
            DivergeModel::partial([0.2, 0.1], [0.5, 0.5]).unwrap(),
        ] {
            assert_eq!(solve_fluxes(&m, &input).unwrap(), Fluxes::ZERO, "{m}");
        }
    }

    #[test]
    fn supply_proportional_symmetric_split() {
        let fd = FundamentalDiagram::mainline();
        let c = fd.capacity();
        let input = RiemannInput::from_demand_supply([fd; 3], c, c, c).unwrap();
        let q = solve_fluxes(&DivergeModel::supply_proportional(), &input).unwrap();
        assert_eq!(q.q1, c / 2.0);
        assert_eq!(q.q2, c / 2.0);
    }

    #[test]
    fn absolute_priority() {
        let input = RiemannInput::from_demand_supply(diagrams(), 0.2, 0.3, 0.05).unwrap();
        let q = solve_fluxes(&DivergeModel::priority([1.0, 0.0]).unwrap(), &input).unwrap();
        assert_eq!(q.q1, 0.2);
        assert_eq!(q.q2, 0.0);
    }

    #[test]
    fn stationary_initial_states_have_no_waves() {
        // Upstream under-critical, both downstream links able to take xi_i D_0.
        let fds = diagrams();
        let m = DivergeModel::daganzo([0.7, 0.3]).unwrap();
        let d0 = 0.2;
        let u0 = TrafficState::under_critical(d0, fds[0].capacity());
        let u1 = TrafficState::under_critical(0.7 * d0, fds[1].capacity());
        let u2 = TrafficState::under_critical(0.3 * d0, fds[2].capacity());
        let input = RiemannInput::new(u0, [u1, u2], fds).unwrap();
        let sol = solve(&m, &input).unwrap();
        assert!(sol.stationary_upstream.approx_eq(&u0, 1e-15));
        // Downstream free-flow states are replaced by (q_i, C_i) which is u_i itself.
        assert!(sol.stationary_downstream[0].approx_eq(&u1, 1e-15));
        assert!(sol.stationary_downstream[1].approx_eq(&u2, 1e-15));
    }

    #[test]
    fn supply_proportional_case_four_interior_state() {
        // S_1 small: link 1 saturates, link 2 takes the rest.
        let fds = diagrams();
        let [c0, c1, c2] = fds.map(|f| f.capacity());
        let d0 = 0.8 * c0;
        let s1 = 0.1 * c1;
        let s2 = c2;
        let input = RiemannInput::from_demand_supply(fds, d0, s1, s2).unwrap();
        let m = DivergeModel::supply_proportional();
        let sol = solve(&m, &input).unwrap();
        let q = sol.fluxes;
        assert_eq!(q.q1, s1);
        // q_2 = min(S_2, D_0 - S_1)
        assert_eq!(q.q2, s2.min(d0 - s1));
        if q.q2 < s2 {
            let expect = TrafficState::over_critical(c1, c2 * s1 / (d0 - s1));
            assert!(sol.interior_downstream[0].approx_eq(&expect, 1e-15));
            let local = local_discrete_flux(&m, sol.interior_upstream, sol.interior_downstream, [0.5, 0.5])
                .unwrap();
            assert!(local.max_abs_diff(&q) < 1e-12);
        }
    }
}
