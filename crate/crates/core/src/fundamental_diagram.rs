//! Flow-density relations and the demand/supply transforms.
//!
//! All quantities are normalized and dimensionless. `Q` must be unimodal on
//! `[0, jam_density]` with `Q(0) = Q(jam) = 0`; the critical density and
//! capacity are computed once at construction.

use serde::{Deserialize, Serialize};

use crate::supply_demand::TrafficState;
use crate::{tol, Error, Result};

/// Shape of `Q(rho)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DiagramKind {
    /// Maximum-sensitivity exponential form, two-lane mainline defaults
    /// (`v_f = 1`, `rho_jam = 2`).
    DelCastilloMainline,
    /// Same exponential form with one-lane ramp defaults
    /// (`v_f = 1/2`, `rho_jam = 1`).
    DelCastilloRamp,
    /// `Q = min(v_f rho, w (rho_jam - rho))`.
    Triangular { congested_wave_speed: f64 },
    /// `Q = v_f rho (1 - rho / rho_jam)`.
    Greenshields,
}

impl DiagramKind {
    fn default_parameters(self) -> (f64, f64) {
        match self {
            DiagramKind::DelCastilloMainline => (1.0, 2.0),
            DiagramKind::DelCastilloRamp => (0.5, 1.0),
            DiagramKind::Triangular { .. } | DiagramKind::Greenshields => (1.0, 1.0),
        }
    }
}

/// Sensitivity constant of the exponential diagrams.
const DEL_CASTILLO_SENSITIVITY: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalDiagram {
    kind: DiagramKind,
    free_flow_speed: f64,
    jam_density: f64,
    capacity: f64,
    critical_density: f64,
}

impl FundamentalDiagram {
    pub fn new(kind: DiagramKind, free_flow_speed: f64, jam_density: f64) -> Result<Self> {
        if !(free_flow_speed.is_finite() && free_flow_speed > 0.0) {
            return Err(Error::Parameter(format!(
                "free-flow speed must be positive, got {free_flow_speed}"
            )));
        }
        if !(jam_density.is_finite() && jam_density > 0.0) {
            return Err(Error::Parameter(format!(
                "jam density must be positive, got {jam_density}"
            )));
        }
        if let DiagramKind::Triangular {
            congested_wave_speed: w,
        } = kind
        {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Parameter(format!(
                    "congested wave speed must be positive, got {w}"
                )));
            }
        }
        let mut fd = FundamentalDiagram {
            kind,
            free_flow_speed,
            jam_density,
            capacity: 0.0,
            critical_density: 0.0,
        };
        fd.critical_density = fd.locate_critical_density();
        fd.capacity = fd.raw_flow(fd.critical_density);
        Ok(fd)
    }

    /// Diagram with the kind's default speed and jam density.
    pub fn with_defaults(kind: DiagramKind) -> Result<Self> {
        let (v, jam) = kind.default_parameters();
        Self::new(kind, v, jam)
    }

    /// Two-lane mainline freeway: `Q = rho {1 - exp[1 - exp((2/rho - 1)/4)]}` on `[0, 2]`.
    pub fn mainline() -> Self {
        Self::with_defaults(DiagramKind::DelCastilloMainline).expect("valid defaults")
    }

    /// One-lane off-ramp: `Q = rho/2 {1 - exp[1 - exp((1/rho - 1)/4)]}` on `[0, 1]`.
    pub fn ramp() -> Self {
        Self::with_defaults(DiagramKind::DelCastilloRamp).expect("valid defaults")
    }

    pub fn triangular(free_flow_speed: f64, congested_wave_speed: f64, jam_density: f64) -> Result<Self> {
        Self::new(
            DiagramKind::Triangular {
                congested_wave_speed,
            },
            free_flow_speed,
            jam_density,
        )
    }

    pub fn greenshields(free_flow_speed: f64, jam_density: f64) -> Result<Self> {
        Self::new(DiagramKind::Greenshields, free_flow_speed, jam_density)
    }

    pub fn kind(&self) -> DiagramKind {
        self.kind
    }

    pub fn free_flow_speed(&self) -> f64 {
        self.free_flow_speed
    }

    pub fn jam_density(&self) -> f64 {
        self.jam_density
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn critical_density(&self) -> f64 {
        self.critical_density
    }

    /// Largest characteristic speed `max |Q'|`, used by the CFL check.
    pub fn max_wave_speed(&self) -> f64 {
        match self.kind {
            DiagramKind::Triangular {
                congested_wave_speed,
            } => self.free_flow_speed.max(congested_wave_speed),
            // |Q'| peaks at rho = 0 for both smooth families.
            DiagramKind::DelCastilloMainline
            | DiagramKind::DelCastilloRamp
            | DiagramKind::Greenshields => self.free_flow_speed,
        }
    }

    fn check_domain(&self, rho: f64) -> Result<()> {
        if rho.is_nan() || rho < 0.0 || rho > self.jam_density {
            Err(Error::Domain {
                rho,
                jam: self.jam_density,
            })
        } else {
            Ok(())
        }
    }

    fn raw_flow(&self, rho: f64) -> f64 {
        if rho <= 0.0 || rho >= self.jam_density {
            return 0.0;
        }
        let v = self.free_flow_speed;
        let jam = self.jam_density;
        match self.kind {
            DiagramKind::DelCastilloMainline | DiagramKind::DelCastilloRamp => {
                // exp overflows to +inf for tiny rho; the expression then
                // degrades gracefully to v * rho.
                let u = DEL_CASTILLO_SENSITIVITY * (jam / rho - 1.0);
                v * rho * (1.0 - (1.0 - u.exp()).exp())
            }
            DiagramKind::Triangular {
                congested_wave_speed,
            } => (v * rho).min(congested_wave_speed * (jam - rho)),
            DiagramKind::Greenshields => v * rho * (1.0 - rho / jam),
        }
    }

    fn locate_critical_density(&self) -> f64 {
        let jam = self.jam_density;
        match self.kind {
            DiagramKind::Triangular {
                congested_wave_speed: w,
            } => w * jam / (self.free_flow_speed + w),
            DiagramKind::Greenshields => 0.5 * jam,
            DiagramKind::DelCastilloMainline | DiagramKind::DelCastilloRamp => {
                // Bisection on the sign of the finite-difference slope.
                let (mut lo, mut hi) = (tol::DERIVATIVE_STEP, jam - tol::DERIVATIVE_STEP);
                while hi - lo > 0.1 * tol::DENSITY {
                    let mid = 0.5 * (lo + hi);
                    if self.raw_derivative(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    fn raw_derivative(&self, rho: f64) -> f64 {
        let h = tol::DERIVATIVE_STEP;
        let lo = (rho - h).max(0.0);
        let hi = (rho + h).min(self.jam_density);
        (self.raw_flow(hi) - self.raw_flow(lo)) / (hi - lo)
    }

    /// `Q(rho)`; `Q(0) = 0` by definition.
    pub fn flow(&self, rho: f64) -> Result<f64> {
        self.check_domain(rho)?;
        Ok(self.raw_flow(rho))
    }

    /// Central finite-difference `Q'(rho)` with step `1e-6`, one-sided at the ends.
    pub fn derivative(&self, rho: f64) -> Result<f64> {
        self.check_domain(rho)?;
        Ok(self.raw_derivative(rho))
    }

    /// Demand `D(rho) = Q(min(rho, rho_c))`.
    pub fn demand(&self, rho: f64) -> Result<f64> {
        self.check_domain(rho)?;
        Ok(self.demand_clamped(rho))
    }

    /// Supply `S(rho) = Q(max(rho, rho_c))`.
    pub fn supply(&self, rho: f64) -> Result<f64> {
        self.check_domain(rho)?;
        Ok(self.supply_clamped(rho))
    }

    /// Demand with `rho` clamped into the domain; used in the simulator's inner loop.
    pub fn demand_clamped(&self, rho: f64) -> f64 {
        if rho >= self.critical_density {
            self.capacity
        } else {
            self.raw_flow(rho.max(0.0))
        }
    }

    /// Supply with `rho` clamped into the domain.
    pub fn supply_clamped(&self, rho: f64) -> f64 {
        if rho <= self.critical_density {
            self.capacity
        } else {
            self.raw_flow(rho.min(self.jam_density))
        }
    }

    /// Map a density to its supply-demand state `(D, S)`.
    pub fn state_of(&self, rho: f64) -> Result<TrafficState> {
        self.check_domain(rho)?;
        Ok(TrafficState::new(
            self.demand_clamped(rho),
            self.supply_clamped(rho),
        ))
    }

    /// Inverse of [`state_of`](Self::state_of): the unique density whose state is `u`.
    pub fn density_from_state(&self, u: TrafficState) -> Result<f64> {
        let c = self.capacity;
        let invalid = || Error::InvalidState {
            demand: u.demand,
            supply: u.supply,
            capacity: c,
        };
        if !(u.demand >= 0.0 && u.supply >= 0.0) || u.demand.max(u.supply) > c + tol::FLUX {
            return Err(invalid());
        }
        let uc = (u.supply - c).abs() <= tol::FLUX;
        let oc = (u.demand - c).abs() <= tol::FLUX;
        if uc && oc {
            return Ok(self.critical_density);
        }
        if uc {
            // Q increasing on [0, rho_c].
            Ok(self.invert_on(0.0, self.critical_density, u.demand, true))
        } else if oc {
            // Q decreasing on [rho_c, jam].
            Ok(self.invert_on(self.critical_density, self.jam_density, u.supply, false))
        } else {
            Err(invalid())
        }
    }

    fn invert_on(&self, mut lo: f64, mut hi: f64, target: f64, increasing: bool) -> f64 {
        while hi - lo > 0.1 * tol::DENSITY {
            let mid = 0.5 * (lo + hi);
            let below = self.raw_flow(mid) < target;
            if below == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}
