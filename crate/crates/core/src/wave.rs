//! Kinematic waves on each link of the Riemann solution.

use crate::fundamental_diagram::FundamentalDiagram;
use crate::riemann::{RiemannInput, RiemannSolution};
use crate::{tol, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveKind {
    None,
    Shock,
    Rarefaction,
}

impl std::fmt::Display for WaveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WaveKind::None => "none",
            WaveKind::Shock => "shock",
            WaveKind::Rarefaction => "rarefaction",
        })
    }
}

/// Wave connecting `rho_left` to `rho_right`.
///
/// `speed_range` holds the Rankine-Hugoniot speed twice for a shock and the
/// fan edge speeds `[Q'(rho_left), Q'(rho_right)]` for a rarefaction. A
/// missing wave reports zero speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveDescription {
    pub kind: WaveKind,
    pub speed_range: [f64; 2],
    pub rho_left: f64,
    pub rho_right: f64,
}

impl WaveDescription {
    pub fn min_speed(&self) -> f64 {
        self.speed_range[0].min(self.speed_range[1])
    }

    pub fn max_speed(&self) -> f64 {
        self.speed_range[0].max(self.speed_range[1])
    }
}

pub fn classify_wave(fd: &FundamentalDiagram, rho_left: f64, rho_right: f64) -> Result<WaveDescription> {
    let q_left = fd.flow(rho_left)?;
    let q_right = fd.flow(rho_right)?;
    let (kind, speed_range) = if (rho_left - rho_right).abs() < tol::WAVE_DENSITY {
        (WaveKind::None, [0.0, 0.0])
    } else if rho_left < rho_right {
        let s = (q_left - q_right) / (rho_left - rho_right);
        (WaveKind::Shock, [s, s])
    } else {
        (
            WaveKind::Rarefaction,
            [fd.derivative(rho_left)?, fd.derivative(rho_right)?],
        )
    };
    Ok(WaveDescription {
        kind,
        speed_range,
        rho_left,
        rho_right,
    })
}

/// Waves on links 0, 1, 2 of a Riemann solution, checked for sign
/// admissibility (upstream speeds nonpositive, downstream nonnegative).
pub fn link_waves(solution: &RiemannSolution, input: &RiemannInput) -> Result<[WaveDescription; 3]> {
    let fds = input.diagrams;
    let initial = input.states();
    let stationary = solution.stationary_states();
    let mut waves = [None; 3];
    for link in 0..3 {
        let fd = &fds[link];
        let rho_init = fd.density_from_state(initial[link])?;
        let rho_stat = fd.density_from_state(stationary[link])?;
        let w = if link == 0 {
            classify_wave(fd, rho_init, rho_stat)?
        } else {
            classify_wave(fd, rho_stat, rho_init)?
        };
        let bad = if link == 0 {
            w.max_speed() > tol::WAVE_SPEED
        } else {
            w.min_speed() < -tol::WAVE_SPEED
        };
        if bad {
            return Err(Error::InternalConsistency(format!(
                "{} on link {link} has speeds {:?} (densities {} -> {})",
                w.kind, w.speed_range, w.rho_left, w.rho_right
            )));
        }
        waves[link] = Some(w);
    }
    Ok(waves.map(|w| w.expect("every link classified")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::{solve, DivergeModel};

    #[test]
    fn back_traveling_rarefaction() {
        let fd = FundamentalDiagram::mainline();
        let w = classify_wave(&fd, 1.0, 0.8555).unwrap();
        assert_eq!(w.kind, WaveKind::Rarefaction);
        assert!(w.max_speed() < 0.0);
    }

    #[test]
    fn forward_shock() {
        let fd = FundamentalDiagram::mainline();
        let w = classify_wave(&fd, 0.1963, 1.0).unwrap();
        assert_eq!(w.kind, WaveKind::Shock);
        let s = (fd.flow(0.1963).unwrap() - fd.flow(1.0).unwrap()) / (0.1963 - 1.0);
        assert_eq!(w.speed_range, [s, s]);
        assert!(s > 0.0);
    }

    #[test]
    fn equal_densities() {
        let fd = FundamentalDiagram::ramp();
        assert_eq!(classify_wave(&fd, 0.3, 0.3).unwrap().kind, WaveKind::None);
        assert!(classify_wave(&fd, 0.3, 1.5).is_err());
    }

    #[test]
    fn reference_solution_waves() {
        let fds = [
            FundamentalDiagram::mainline(),
            FundamentalDiagram::mainline(),
            FundamentalDiagram::ramp(),
        ];
        let input = RiemannInput::from_densities(fds, [1.0, 1.0, 0.1]).unwrap();
        let sol = solve(&DivergeModel::lebacque([0.7, 0.3]).unwrap(), &input).unwrap();
        let w = link_waves(&sol, &input).unwrap();
        assert_eq!(w[0].kind, WaveKind::Rarefaction);
        assert!((w[0].rho_right - 0.8555).abs() < 5e-4);
        assert_eq!(w[1].kind, WaveKind::Shock);
        assert!(w[1].min_speed() > 0.0);
        assert!((w[1].rho_left - 0.1963).abs() < 5e-4);
        assert_eq!(w[2].kind, WaveKind::Rarefaction);
        assert!(w[2].max_speed() > 0.0);
    }

    #[test]
    fn stationary_input_has_no_waves() {
        let fds = [FundamentalDiagram::mainline(); 3];
        let c = fds[0].capacity();
        let input = RiemannInput::from_demand_supply(fds, 0.2, c, c).unwrap();
        let input = RiemannInput::new(
            input.upstream,
            [
                crate::TrafficState::under_critical(0.1, c),
                crate::TrafficState::under_critical(0.1, c),
            ],
            fds,
        )
        .unwrap();
        let sol = solve(&DivergeModel::daganzo([0.5, 0.5]).unwrap(), &input).unwrap();
        for w in link_waves(&sol, &input).unwrap() {
            assert_eq!(w.kind, WaveKind::None);
        }
    }
}
