//! Traffic states in supply-demand space.

use serde::{Deserialize, Serialize};

use crate::fundamental_diagram::FundamentalDiagram;
use crate::{tol, Error, Result};

/// A state `U = (D, S)`. Bound to a diagram with capacity `C`, exactly one
/// of the components equals `C` unless the state is critical.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficState {
    pub demand: f64,
    pub supply: f64,
}

/// Criticality of a state. The non-strict classes are unions:
/// under-critical = `StrictlyUnderCritical | Critical`,
/// over-critical = `StrictlyOverCritical | Critical`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criticality {
    StrictlyUnderCritical,
    Critical,
    StrictlyOverCritical,
}

impl Criticality {
    /// `S = C`.
    pub fn is_under_critical(self) -> bool {
        matches!(self, Criticality::StrictlyUnderCritical | Criticality::Critical)
    }

    /// `D = C`.
    pub fn is_over_critical(self) -> bool {
        matches!(self, Criticality::StrictlyOverCritical | Criticality::Critical)
    }
}

impl TrafficState {
    pub const fn new(demand: f64, supply: f64) -> Self {
        TrafficState { demand, supply }
    }

    /// Under-critical state `(D, C)`.
    pub const fn under_critical(demand: f64, capacity: f64) -> Self {
        TrafficState::new(demand, capacity)
    }

    /// Over-critical state `(C, S)`.
    pub const fn over_critical(capacity: f64, supply: f64) -> Self {
        TrafficState::new(capacity, supply)
    }

    /// Flow-rate `q(U) = min(D, S)`.
    pub fn flux(&self) -> f64 {
        self.demand.min(self.supply)
    }

    pub fn classify(&self, capacity: f64) -> Result<Criticality> {
        classify(*self, capacity)
    }

    /// Validity against a capacity: nonnegative, bounded, `max(D, S) = C`.
    pub fn is_valid_for(&self, capacity: f64) -> bool {
        self.demand >= 0.0
            && self.supply >= 0.0
            && self.demand <= capacity + tol::FLUX
            && self.supply <= capacity + tol::FLUX
            && (self.demand.max(self.supply) - capacity).abs() <= tol::FLUX
    }

    pub fn approx_eq(&self, other: &TrafficState, eps: f64) -> bool {
        (self.demand - other.demand).abs() <= eps && (self.supply - other.supply).abs() <= eps
    }
}

impl std::fmt::Display for TrafficState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:.6}, {:.6})", self.demand, self.supply)
    }
}

pub fn state_of(fd: &FundamentalDiagram, rho: f64) -> Result<TrafficState> {
    fd.state_of(rho)
}

pub fn local_flux(u: TrafficState) -> f64 {
    u.flux()
}

/// Knife-edge states with `|D - S| < 1e-12` resolve to `Critical`.
pub fn classify(u: TrafficState, capacity: f64) -> Result<Criticality> {
    if !u.is_valid_for(capacity) {
        return Err(Error::InvalidState {
            demand: u.demand,
            supply: u.supply,
            capacity,
        });
    }
    if (u.demand - u.supply).abs() < tol::FLUX {
        Ok(Criticality::Critical)
    } else if u.demand < u.supply {
        Ok(Criticality::StrictlyUnderCritical)
    } else {
        Ok(Criticality::StrictlyOverCritical)
    }
}
