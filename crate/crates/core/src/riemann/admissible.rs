//! Admissibility of stationary and interior states.
//!
//! Wave speeds must be nonpositive on the upstream link and nonnegative on
//! downstream links. In supply-demand terms:
//!
//! * upstream stationary `U_0^-` is `(D_0, C_0)` or `(C_0, S)` with `S < D_0`;
//! * downstream stationary `U_i^+` is `(C_i, S_i)` or `(D, C_i)` with `D < S_i`;
//! * an interior state equals a strictly over-critical upstream (strictly
//!   under-critical downstream) stationary state, otherwise it is any state
//!   with `S >= D_0^-` upstream (`D >= S_i^+` downstream).

use crate::supply_demand::{Criticality, TrafficState};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upstream,
    Downstream,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= tol::FLUX
}

/// Is `stationary` admissible given the initial state on the same link?
pub fn check_stationary_admissible(
    stationary: TrafficState,
    initial: TrafficState,
    side: Side,
    capacity: f64,
) -> bool {
    if !stationary.is_valid_for(capacity) {
        return false;
    }
    match side {
        Side::Upstream => {
            let keeps_demand =
                close(stationary.demand, initial.demand) && close(stationary.supply, capacity);
            let congested = close(stationary.demand, capacity) && stationary.supply < initial.demand;
            keeps_demand || congested
        }
        Side::Downstream => {
            let keeps_supply =
                close(stationary.demand, capacity) && close(stationary.supply, initial.supply);
            let free = close(stationary.supply, capacity) && stationary.demand < initial.supply;
            keeps_supply || free
        }
    }
}

/// Is `interior` admissible next to the (admissible) `stationary` state?
pub fn check_interior_admissible(
    interior: TrafficState,
    stationary: TrafficState,
    side: Side,
    capacity: f64,
) -> bool {
    if !interior.is_valid_for(capacity) {
        return false;
    }
    let Ok(class) = stationary.classify(capacity) else {
        return false;
    };
    match side {
        Side::Upstream => {
            if class == Criticality::StrictlyOverCritical {
                interior.approx_eq(&stationary, tol::FLUX)
            } else {
                interior.supply >= stationary.demand - tol::FLUX
            }
        }
        Side::Downstream => {
            if class == Criticality::StrictlyUnderCritical {
                interior.approx_eq(&stationary, tol::FLUX)
            } else {
                interior.demand >= stationary.supply - tol::FLUX
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: f64 = 0.3365;

    #[test]
    fn stationary_upstream() {
        let init = TrafficState::new(0.3, C);
        assert!(check_stationary_admissible(
            TrafficState::new(C, 0.2),
            init,
            Side::Upstream,
            C
        ));
        assert!(!check_stationary_admissible(
            TrafficState::new(C, 0.31),
            init,
            Side::Upstream,
            C
        ));
        assert!(check_stationary_admissible(init, init, Side::Upstream, C));
        assert!(!check_stationary_admissible(
            TrafficState::new(0.2, C),
            init,
            Side::Upstream,
            C
        ));
    }

    #[test]
    fn stationary_downstream() {
        let init = TrafficState::new(C, 0.25);
        assert!(check_stationary_admissible(init, init, Side::Downstream, C));
        assert!(check_stationary_admissible(
            TrafficState::new(0.1, C),
            init,
            Side::Downstream,
            C
        ));
        assert!(!check_stationary_admissible(
            TrafficState::new(0.3, C),
            init,
            Side::Downstream,
            C
        ));
    }

    #[test]
    fn interior_states() {
        let soc = TrafficState::new(C, 0.2);
        assert!(check_interior_admissible(soc, soc, Side::Upstream, C));
        assert!(!check_interior_admissible(
            TrafficState::new(0.25, C),
            soc,
            Side::Upstream,
            C
        ));
        let uc = TrafficState::new(0.2, C);
        assert!(check_interior_admissible(
            TrafficState::new(C, 0.25),
            uc,
            Side::Upstream,
            C
        ));
        assert!(!check_interior_admissible(
            TrafficState::new(C, 0.15),
            uc,
            Side::Upstream,
            C
        ));

        let oc = TrafficState::new(C, 0.2);
        assert!(check_interior_admissible(
            TrafficState::new(C, 0.3),
            oc,
            Side::Downstream,
            C
        ));
        assert!(check_interior_admissible(
            TrafficState::new(0.25, C),
            oc,
            Side::Downstream,
            C
        ));
        assert!(!check_interior_admissible(
            TrafficState::new(0.1, C),
            oc,
            Side::Downstream,
            C
        ));
        let suc = TrafficState::new(0.1, C);
        assert!(check_interior_admissible(suc, suc, Side::Downstream, C));
        assert!(!check_interior_admissible(
            TrafficState::new(C, 0.3),
            suc,
            Side::Downstream,
            C
        ));
    }
}
