use super::{DivergeModel, Fluxes};
use crate::supply_demand::TrafficState;
use crate::{Error, Result};

/// `S_j / xi_j - S_j`: the flux to link `i` that keeps routed link-`j`
/// vehicles from exceeding `S_j`. Unbounded when nobody is routed to `j`.
pub(crate) fn route_cap(s_j: f64, xi_j: f64) -> f64 {
    if xi_j == 0.0 {
        f64::INFINITY
    } else {
        s_j / xi_j - s_j
    }
}

/// `min(S_i, max(D - S_j, alpha_i D))` for both links.
pub(crate) fn priority_split(d0: f64, s: [f64; 2], alpha: [f64; 2]) -> [f64; 2] {
    [
        s[0].min((d0 - s[1]).max(alpha[0] * d0)),
        s[1].min((d0 - s[0]).max(alpha[1] * d0)),
    ]
}

pub(crate) fn partial_split(d0: f64, s: [f64; 2], xi: [f64; 2], alpha: [f64; 2]) -> [f64; 2] {
    let p = priority_split(d0, s, alpha);
    [
        p[0].min(route_cap(s[1], xi[1])),
        p[1].min(route_cap(s[0], xi[0])),
    ]
}

/// Junction fluxes from the states adjacent to the junction.
///
/// Only `D` of the upstream interior state and `S` of the downstream ones
/// enter. `interior_xi` is the commodity split in the last upstream cell;
/// it is used by the two FIFO-family models, while the evacuation models
/// rely on their own parameters. This is the function the simulator calls
/// at every step.
pub fn local_discrete_flux(
    model: &DivergeModel,
    interior_up: TrafficState,
    interior_down: [TrafficState; 2],
    interior_xi: [f64; 2],
) -> Result<Fluxes> {
    let d0 = interior_up.demand;
    let s = [interior_down[0].supply, interior_down[1].supply];
    if d0 <= 0.0 {
        return Ok(Fluxes::ZERO);
    }
    let fluxes = match *model {
        DivergeModel::DaganzoFifo { .. } => {
            let [x1, x2] = interior_xi;
            if x1 <= 0.0 || x2 <= 0.0 {
                return Err(Error::Parameter(format!(
                    "FIFO diverge needs positive interior proportions, got {interior_xi:?}"
                )));
            }
            let q0 = d0.min(s[0] / x1).min(s[1] / x2);
            Fluxes::from_split(x1 * q0, x2 * q0)
        }
        DivergeModel::Lebacque { .. } => {
            let [x1, x2] = interior_xi;
            Fluxes::from_split((x1 * d0).min(s[0]), (x2 * d0).min(s[1]))
        }
        DivergeModel::SupplyProportional => {
            let total = s[0] + s[1];
            if total <= 0.0 {
                return Ok(Fluxes::ZERO);
            }
            let share = (d0 / total).min(1.0);
            Fluxes::from_split(share * s[0], share * s[1])
        }
        DivergeModel::PriorityBased { alpha } => {
            let [q1, q2] = priority_split(d0, s, alpha);
            Fluxes::from_split(q1, q2)
        }
        DivergeModel::PartialEvacuation { xi, alpha } => {
            let [q1, q2] = partial_split(d0, s, xi, alpha);
            Fluxes::from_split(q1, q2)
        }
    };
    Ok(fluxes)
}
