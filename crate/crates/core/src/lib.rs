//! Kinematic-wave analysis of a one-upstream, two-downstream diverging junction.
//!
//! Traffic states are handled in supply-demand space: a state is the pair
//! `(D, S)` of its demand and supply, with `max(D, S)` equal to the link
//! capacity. On top of that representation the crate provides
//!
//! * closed-form Riemann solvers for five diverge models ([`riemann`]),
//! * kinematic-wave classification on each link ([`wave`]),
//! * a Godunov / cell-transmission simulator with commodity tracking ([`ctm`]),
//! * a brute-force admissibility oracle used to cross-check the closed forms
//!   ([`oracle`]), a randomized property suite ([`properties`]) and the
//!   experiment drivers behind the `diverge` CLI ([`experiments`]).

#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod ctm;
pub mod error;
pub mod experiments;
pub mod fundamental_diagram;
pub mod oracle;
pub mod par;
pub mod properties;
pub mod riemann;
pub mod supply_demand;
pub mod wave;

pub use error::{Error, Result};
pub use fundamental_diagram::{DiagramKind, FundamentalDiagram};
pub use par::Execution;
pub use riemann::{DivergeModel, Fluxes, RiemannInput, RiemannSolution};
pub use supply_demand::{Criticality, TrafficState};

/// Numerical tolerances shared by every module.
pub mod tol {
    /// Absolute tolerance for flux comparisons and regime ties.
    pub const FLUX: f64 = 1e-12;
    /// Target accuracy of density root finding.
    pub const DENSITY: f64 = 1e-10;
    /// Densities closer than this carry no wave.
    pub const WAVE_DENSITY: f64 = 1e-8;
    /// Allowed sign violation of a wave speed.
    pub const WAVE_SPEED: f64 = 1e-4;
    /// Step of the central finite difference used for `Q'`.
    pub const DERIVATIVE_STEP: f64 = 1e-6;
    /// Density excursion outside `[0, jam]` that the simulator reports as unstable.
    pub const STABILITY: f64 = 1e-9;
}
