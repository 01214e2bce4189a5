//! Riemann problem at a diverge with one upstream link (0) and two
//! downstream links (1, 2).
//!
//! A diverge model is an entropy condition: a *local* flux rule evaluated on
//! the interior states next to the junction ([`local_discrete_flux`]). The
//! *global* fluxes ([`solve_fluxes`]) are the closed-form boundary fluxes
//! that the Riemann solution settles to; [`solve`] adds stationary and
//! interior states. Only upstream demand `D_0` and downstream supplies
//! `S_1, S_2` (plus capacities) influence the fluxes.

mod admissible;
mod global;
mod local;
mod model;

pub use admissible::{check_interior_admissible, check_stationary_admissible, Side};
pub use global::{solve, solve_fluxes};
pub use local::local_discrete_flux;
pub use model::{DivergeModel, ModelTag};

use crate::fundamental_diagram::FundamentalDiagram;
use crate::supply_demand::TrafficState;
use crate::{Error, Result};

/// Boundary fluxes `q_0 = q_1 + q_2`, with `q_i` the flux from link 0 to link `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fluxes {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
}

impl Fluxes {
    pub const ZERO: Fluxes = Fluxes {
        q0: 0.0,
        q1: 0.0,
        q2: 0.0,
    };

    /// Build from the two downstream fluxes; `q0` is their sum so that
    /// conservation holds bitwise.
    pub fn from_split(q1: f64, q2: f64) -> Self {
        Fluxes { q0: q1 + q2, q1, q2 }
    }

    pub fn downstream(&self, i: usize) -> f64 {
        match i {
            0 => self.q1,
            1 => self.q2,
            _ => panic!("downstream index {i} out of range"),
        }
    }

    pub fn max_abs_diff(&self, other: &Fluxes) -> f64 {
        (self.q0 - other.q0)
            .abs()
            .max((self.q1 - other.q1).abs())
            .max((self.q2 - other.q2).abs())
    }
}

impl std::fmt::Display for Fluxes {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(q0={:.6}, q1={:.6}, q2={:.6})", self.q0, self.q1, self.q2)
    }
}

/// Initial states on the three links and their diagrams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannInput {
    pub upstream: TrafficState,
    pub downstream: [TrafficState; 2],
    pub diagrams: [FundamentalDiagram; 3],
}

impl RiemannInput {
    pub fn new(
        upstream: TrafficState,
        downstream: [TrafficState; 2],
        diagrams: [FundamentalDiagram; 3],
    ) -> Result<Self> {
        let input = RiemannInput {
            upstream,
            downstream,
            diagrams,
        };
        for (link, u) in input.states().iter().enumerate() {
            let c = diagrams[link].capacity();
            if !u.is_valid_for(c) {
                return Err(Error::InvalidState {
                    demand: u.demand,
                    supply: u.supply,
                    capacity: c,
                });
            }
        }
        Ok(input)
    }

    /// Initial densities on links 0, 1, 2.
    pub fn from_densities(diagrams: [FundamentalDiagram; 3], rho: [f64; 3]) -> Result<Self> {
        Self::new(
            diagrams[0].state_of(rho[0])?,
            [diagrams[1].state_of(rho[1])?, diagrams[2].state_of(rho[2])?],
            diagrams,
        )
    }

    /// Input determined only by the flux-relevant quantities: the upstream
    /// state is taken under-critical `(D_0, C_0)` and the downstream ones
    /// over-critical `(C_i, S_i)`.
    pub fn from_demand_supply(
        diagrams: [FundamentalDiagram; 3],
        d0: f64,
        s1: f64,
        s2: f64,
    ) -> Result<Self> {
        Self::new(
            TrafficState::under_critical(d0, diagrams[0].capacity()),
            [
                TrafficState::over_critical(diagrams[1].capacity(), s1),
                TrafficState::over_critical(diagrams[2].capacity(), s2),
            ],
            diagrams,
        )
    }

    pub fn states(&self) -> [TrafficState; 3] {
        [self.upstream, self.downstream[0], self.downstream[1]]
    }

    pub fn capacities(&self) -> [f64; 3] {
        [
            self.diagrams[0].capacity(),
            self.diagrams[1].capacity(),
            self.diagrams[2].capacity(),
        ]
    }

    pub fn d0(&self) -> f64 {
        self.upstream.demand
    }

    pub fn supplies(&self) -> [f64; 2] {
        [self.downstream[0].supply, self.downstream[1].supply]
    }
}

/// Full Riemann solution at the junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannSolution {
    pub fluxes: Fluxes,
    /// `U_0^-`.
    pub stationary_upstream: TrafficState,
    /// `U_1^+, U_2^+`.
    pub stationary_downstream: [TrafficState; 2],
    /// Canonical `U_0(0^-, t)`.
    pub interior_upstream: TrafficState,
    /// Canonical `U_i(0^+, t)`.
    pub interior_downstream: [TrafficState; 2],
    /// `xi_i(0^-, t)`; `None` when the realized split is undefined (`q_0 = 0`
    /// under an evacuation model).
    pub interior_proportions: Option<[f64; 2]>,
    /// Whether each interior state (links 0, 1, 2) is uniquely determined.
    pub interior_unique: [bool; 3],
}

impl RiemannSolution {
    pub fn stationary_states(&self) -> [TrafficState; 3] {
        [
            self.stationary_upstream,
            self.stationary_downstream[0],
            self.stationary_downstream[1],
        ]
    }

    pub fn interior_states(&self) -> [TrafficState; 3] {
        [
            self.interior_upstream,
            self.interior_downstream[0],
            self.interior_downstream[1],
        ]
    }
}
