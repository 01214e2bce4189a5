//! Cell-transmission (Godunov) simulation of the diverge network.
//!
//! Link 0 feeds the junction from the left, links 1 and 2 leave it to the
//! right. Every link has `M` cells; cell `m` of link `i` is `rho[i][m]`
//! with `m = 0` the most upstream cell. Two commodity proportions are
//! tracked on link 0.

use serde::{Deserialize, Serialize};

use crate::fundamental_diagram::FundamentalDiagram;
use crate::par::Execution;
use crate::riemann::{local_discrete_flux, DivergeModel, Fluxes};
use crate::supply_demand::TrafficState;
use crate::{tol, Error, Result};

/// Links with at least this many cells compute interface fluxes through
/// [`Execution::fill`]; below it the thread pool costs more than it saves.
const PARALLEL_MIN_CELLS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum BoundaryCondition {
    /// Ghost demand (supply) copies the first (last) cell.
    Neumann,
    Constant { flux: f64 },
    /// `a + b sin(n pi dt / c)` at step `n`, clamped to `[0, capacity]`.
    Sinusoid { a: f64, b: f64, c: f64 },
}

impl BoundaryCondition {
    fn ghost_value(&self, neumann: f64, step: usize, dt: f64, capacity: f64) -> f64 {
        match *self {
            BoundaryCondition::Neumann => neumann,
            BoundaryCondition::Constant { flux } => flux,
            BoundaryCondition::Sinusoid { a, b, c } => {
                let v = a + b * (step as f64 * std::f64::consts::PI * dt / c).sin();
                v.clamp(0.0, capacity)
            }
        }
    }

    fn validate(&self, capacity: f64, what: &str) -> Result<()> {
        match *self {
            BoundaryCondition::Neumann => Ok(()),
            BoundaryCondition::Constant { flux } => {
                if (0.0..=capacity).contains(&flux) {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!(
                        "{what} boundary flux {flux} outside [0, {capacity}]"
                    )))
                }
            }
            BoundaryCondition::Sinusoid { a, b, c } => {
                if a.is_finite() && b.is_finite() && c.is_finite() && c != 0.0 {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!(
                        "{what} sinusoid needs finite a, b and nonzero c"
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundarySpec {
    pub upstream_demand: BoundaryCondition,
    pub downstream_supplies: [BoundaryCondition; 2],
}

impl Default for BoundarySpec {
    fn default() -> Self {
        BoundarySpec {
            upstream_demand: BoundaryCondition::Neumann,
            downstream_supplies: [BoundaryCondition::Neumann; 2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialDensity {
    Uniform(f64),
    Cells(Vec<f64>),
}

impl InitialDensity {
    fn expand(&self, cells: usize) -> Result<Vec<f64>> {
        match self {
            InitialDensity::Uniform(rho) => Ok(vec![*rho; cells]),
            InitialDensity::Cells(v) if v.len() == cells => Ok(v.clone()),
            InitialDensity::Cells(v) => Err(Error::Parameter(format!(
                "initial density has {} cells, expected {cells}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialProportions {
    Uniform([f64; 2]),
    Cells(Vec<[f64; 2]>),
}

impl InitialProportions {
    fn expand(&self, cells: usize) -> Result<Vec<[f64; 2]>> {
        match self {
            InitialProportions::Uniform(xi) => Ok(vec![*xi; cells]),
            InitialProportions::Cells(v) if v.len() == cells => Ok(v.clone()),
            InitialProportions::Cells(v) => Err(Error::Parameter(format!(
                "initial proportions have {} cells, expected {cells}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub cells_per_link: usize,
    pub time_steps: usize,
    pub link_length: f64,
    pub horizon: f64,
    pub model: DivergeModel,
    pub diagrams: [FundamentalDiagram; 3],
    pub initial_densities: [InitialDensity; 3],
    pub initial_proportions: InitialProportions,
    /// Proportions of the vehicles entering link 0 through the upstream boundary.
    pub inflow_proportions: [f64; 2],
    pub boundaries: BoundarySpec,
    /// Full density fields are recorded every this many steps (and at the end).
    pub snapshot_every: usize,
    pub execution: Execution,
}

impl SimConfig {
    /// Uniform initial densities, Neumann boundaries and `dt = 0.9 dx`
    /// rounded to a whole number of steps.
    pub fn uniform(
        model: DivergeModel,
        diagrams: [FundamentalDiagram; 3],
        rho: [f64; 3],
        xi: [f64; 2],
        cells_per_link: usize,
        link_length: f64,
        horizon: f64,
    ) -> Self {
        let dx = link_length / cells_per_link as f64;
        let time_steps = (horizon / (0.9 * dx)).round() as usize;
        SimConfig {
            cells_per_link,
            time_steps,
            link_length,
            horizon,
            model,
            diagrams,
            initial_densities: rho.map(InitialDensity::Uniform),
            initial_proportions: InitialProportions::Uniform(xi),
            inflow_proportions: xi,
            boundaries: BoundarySpec::default(),
            snapshot_every: 50,
            execution: Execution::default(),
        }
    }

    pub fn dx(&self) -> f64 {
        self.link_length / self.cells_per_link as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.time_steps as f64
    }

    /// Largest `|Q'| dt / dx` over the three diagrams.
    pub fn courant(&self) -> f64 {
        let v = self
            .diagrams
            .iter()
            .map(|fd| fd.max_wave_speed())
            .fold(0.0, f64::max);
        v * self.dt() / self.dx()
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells_per_link == 0 || self.time_steps == 0 {
            return Err(Error::Parameter("cells_per_link and time_steps must be positive".into()));
        }
        if !(self.link_length > 0.0 && self.horizon > 0.0) {
            return Err(Error::Parameter("link_length and horizon must be positive".into()));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Parameter("snapshot_every must be positive".into()));
        }
        let courant = self.courant();
        if courant > 1.0 + tol::FLUX {
            return Err(Error::Cfl { courant });
        }
        check_proportions(self.inflow_proportions, "inflow")?;
        let b = &self.boundaries;
        b.upstream_demand.validate(self.diagrams[0].capacity(), "upstream")?;
        for i in 0..2 {
            b.downstream_supplies[i].validate(self.diagrams[i + 1].capacity(), "downstream")?;
        }
        Ok(())
    }
}

fn check_proportions(xi: [f64; 2], what: &str) -> Result<()> {
    let ok = xi.iter().all(|x| (0.0..=1.0).contains(x)) && xi[0] + xi[1] <= 1.0 + tol::FLUX;
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{what} proportions {xi:?} outside the simplex")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub densities: [Vec<f64>; 3],
    /// Commodity proportions per cell of link 0.
    pub proportions: Vec<[f64; 2]>,
    pub step_index: usize,
}

impl SimState {
    pub fn initial(config: &SimConfig) -> Result<Self> {
        let m = config.cells_per_link;
        let mut densities: [Vec<f64>; 3] = Default::default();
        for link in 0..3 {
            let rho = config.initial_densities[link].expand(m)?;
            let fd = &config.diagrams[link];
            if let Some(&bad) = rho.iter().find(|r| !(0.0..=fd.jam_density()).contains(*r)) {
                return Err(Error::Domain {
                    rho: bad,
                    jam: fd.jam_density(),
                });
            }
            densities[link] = rho;
        }
        let proportions = config.initial_proportions.expand(m)?;
        for xi in &proportions {
            check_proportions(*xi, "initial")?;
        }
        Ok(SimState {
            densities,
            proportions,
            step_index: 0,
        })
    }

    /// Vehicles on each link, `sum rho dx`.
    pub fn vehicles(&self, dx: f64) -> [f64; 3] {
        [0, 1, 2].map(|l| self.densities[l].iter().sum::<f64>() * dx)
    }
}

/// Junction quantities of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JunctionRecord {
    pub step: usize,
    pub fluxes: Fluxes,
    /// Last cell of link 0 and first cells of links 1, 2.
    pub states: [TrafficState; 3],
    pub densities: [f64; 3],
    /// Proportions in the last cell of link 0.
    pub proportions: [f64; 2],
}

/// Boundary fluxes of one step, per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepFluxes {
    pub junction: Fluxes,
    pub inflow: f64,
    pub outflow: [f64; 2],
}

/// `xi_new` from the conservative commodity update
/// `rho_new xi_new = rho_old xi_old + (dt/dx) (q_in xi_up - q_out xi_old)`.
///
/// With `rho_new = rho_old + (dt/dx)(q_in - q_out)` this is evaluated as
/// `xi_old + (dt/dx) q_in (xi_up - xi_old) / rho_new`, so uniform
/// proportions stay bitwise unchanged. Empty cells keep `xi_old`.
pub fn proportion_update(
    rho_old: f64,
    rho_new: f64,
    xi_old: f64,
    xi_upstream: f64,
    q_in: f64,
    q_out: f64,
    dt_over_dx: f64,
) -> f64 {
    let _ = (rho_old, q_out);
    debug_assert!(
        (rho_new - (rho_old + dt_over_dx * (q_in - q_out))).abs()
            <= 1e-9 * (1.0 + rho_old.abs()),
        "rho_new inconsistent with the fluxes"
    );
    if rho_new < 1e-12 {
        return xi_old;
    }
    (xi_old + dt_over_dx * q_in * (xi_upstream - xi_old) / rho_new).clamp(0.0, 1.0)
}

/// Commodity update for the junction cell, where commodity `i` leaves at
/// `q_commodity_out` instead of `q_out xi_old`.
fn junction_proportion_update(
    rho_new: f64,
    xi_old: f64,
    xi_upstream: f64,
    q_in: f64,
    q_out: f64,
    q_commodity_out: f64,
    dt_over_dx: f64,
) -> f64 {
    if rho_new < 1e-12 {
        return xi_old;
    }
    let excess_out = q_commodity_out - q_out * xi_old;
    (xi_old + dt_over_dx * (q_in * (xi_upstream - xi_old) - excess_out) / rho_new).clamp(0.0, 1.0)
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub step: usize,
    pub densities: [Vec<f64>; 3],
    pub proportions: Vec<[f64; 2]>,
}

/// Vehicle accounting over a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conservation {
    pub initial_vehicles: f64,
    pub final_vehicles: f64,
    pub inflow: f64,
    pub outflow: f64,
}

impl Conservation {
    /// `|N_T - N_0 - (in - out)|`, relative to the larger of `N_0` and the
    /// total boundary traffic (absolute when both vanish).
    pub fn relative_drift(&self) -> f64 {
        let drift = (self.final_vehicles - self.initial_vehicles - (self.inflow - self.outflow)).abs();
        let scale = self.initial_vehicles.max(self.inflow + self.outflow);
        if scale > 0.0 {
            drift / scale
        } else {
            drift
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub cells_per_link: usize,
    pub time_steps: usize,
    pub dx: f64,
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    /// One record per step `n = 0..N-1`, evaluated on the state at step `n`.
    pub junction: Vec<JunctionRecord>,
    pub conservation: Conservation,
    pub final_state: SimState,
}

pub struct Simulator {
    config: SimConfig,
    dx: f64,
    dt: f64,
    flux_buf: [Vec<f64>; 3],
}

impl Simulator {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let m = config.cells_per_link;
        Ok(Simulator {
            dx: config.dx(),
            dt: config.dt(),
            flux_buf: [vec![0.0; m + 1], vec![0.0; m + 1], vec![0.0; m + 1]],
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    fn junction_record(&self, state: &SimState, fluxes: Fluxes) -> JunctionRecord {
        let m = self.config.cells_per_link;
        let fds = &self.config.diagrams;
        let densities = [
            state.densities[0][m - 1],
            state.densities[1][0],
            state.densities[2][0],
        ];
        let states = [0, 1, 2].map(|l| {
            TrafficState::new(fds[l].demand_clamped(densities[l]), fds[l].supply_clamped(densities[l]))
        });
        JunctionRecord {
            step: state.step_index,
            fluxes,
            states,
            densities,
            proportions: state.proportions[m - 1],
        }
    }

    /// Advance `state` by one time step in place.
    pub fn step(&mut self, state: &mut SimState) -> Result<StepFluxes> {
        let cfg = &self.config;
        let m = cfg.cells_per_link;
        let r = self.dt / self.dx;
        let n = state.step_index;
        let fds = cfg.diagrams;

        // Interior Godunov fluxes; flux[l][k] is the interface left of cell k.
        for link in 0..3 {
            let rho = &state.densities[link];
            let fd = fds[link];
            let godunov = |k: usize| fd.demand_clamped(rho[k - 1]).min(fd.supply_clamped(rho[k]));
            let interior = &mut self.flux_buf[link][1..m];
            if m >= PARALLEL_MIN_CELLS {
                cfg.execution.fill(interior, |j| godunov(j + 1));
            } else {
                for (j, slot) in interior.iter_mut().enumerate() {
                    *slot = godunov(j + 1);
                }
            }
        }

        // Junction.
        let rho0 = &state.densities[0];
        let d0 = fds[0].demand_clamped(rho0[m - 1]);
        let s = [1, 2].map(|l| fds[l].supply_clamped(state.densities[l][0]));
        let up = TrafficState::new(d0, fds[0].supply_clamped(rho0[m - 1]));
        let down = [1, 2].map(|l| {
            let rho = state.densities[l][0];
            TrafficState::new(fds[l].demand_clamped(rho), s[l - 1])
        });
        let junction = local_discrete_flux(&cfg.model, up, down, state.proportions[m - 1])?;
        self.flux_buf[0][m] = junction.q0;
        self.flux_buf[1][0] = junction.q1;
        self.flux_buf[2][0] = junction.q2;

        // Boundaries.
        let ghost_d = cfg.boundaries.upstream_demand.ghost_value(
            fds[0].demand_clamped(rho0[0]),
            n,
            self.dt,
            fds[0].capacity(),
        );
        let inflow = ghost_d.min(fds[0].supply_clamped(rho0[0]));
        self.flux_buf[0][0] = inflow;
        let mut outflow = [0.0; 2];
        for i in 0..2 {
            let link = i + 1;
            let rho_last = state.densities[link][m - 1];
            let ghost_s = cfg.boundaries.downstream_supplies[i].ghost_value(
                fds[link].supply_clamped(rho_last),
                n,
                self.dt,
                fds[link].capacity(),
            );
            outflow[i] = fds[link].demand_clamped(rho_last).min(ghost_s);
            self.flux_buf[link][m] = outflow[i];
        }

        // Commodity proportions on link 0 use the old densities.
        let commodity_out = if cfg.model.is_fifo_family() {
            Some([junction.q1, junction.q2])
        } else {
            None
        };
        let f0 = &self.flux_buf[0];
        let mut new_xi = Vec::with_capacity(m);
        for k in 0..m {
            let rho_old = rho0[k];
            let rho_new = rho_old + r * (f0[k] - f0[k + 1]);
            let xi_up = if k == 0 {
                cfg.inflow_proportions
            } else {
                state.proportions[k - 1]
            };
            let xi_old = state.proportions[k];
            let xi = match commodity_out {
                Some(out) if k == m - 1 => [0, 1].map(|c| {
                    junction_proportion_update(rho_new, xi_old[c], xi_up[c], f0[k], f0[k + 1], out[c], r)
                }),
                _ => [0, 1].map(|c| {
                    proportion_update(rho_old, rho_new, xi_old[c], xi_up[c], f0[k], f0[k + 1], r)
                }),
            };
            new_xi.push(xi);
        }
        state.proportions = new_xi;

        // Conservative density update.
        for link in 0..3 {
            let jam = fds[link].jam_density();
            let f = &self.flux_buf[link];
            for (k, rho) in state.densities[link].iter_mut().enumerate() {
                let next = *rho + r * (f[k] - f[k + 1]);
                if !(next >= -tol::STABILITY && next <= jam + tol::STABILITY) {
                    return Err(Error::NumericalStability {
                        step: n,
                        link,
                        cell: k,
                        rho: next,
                    });
                }
                *rho = next.clamp(0.0, jam);
            }
        }
        state.step_index += 1;
        Ok(StepFluxes {
            junction,
            inflow,
            outflow,
        })
    }

    pub fn run(&mut self) -> Result<Trajectory> {
        let mut state = SimState::initial(&self.config)?;
        let dx = self.dx;
        let dt = self.dt;
        let n_steps = self.config.time_steps;
        let every = self.config.snapshot_every;
        let snapshot = |s: &SimState| Snapshot {
            step: s.step_index,
            densities: s.densities.clone(),
            proportions: s.proportions.clone(),
        };
        let mut snapshots = vec![snapshot(&state)];
        let mut junction = Vec::with_capacity(n_steps);
        let initial_vehicles: f64 = state.vehicles(dx).iter().sum();
        let (mut inflow, mut outflow) = (0.0, 0.0);
        for _ in 0..n_steps {
            let before = state.clone();
            let fl = self.step(&mut state)?;
            junction.push(self.junction_record(&before, fl.junction));
            inflow += fl.inflow * dt;
            outflow += (fl.outflow[0] + fl.outflow[1]) * dt;
            if state.step_index % every == 0 || state.step_index == n_steps {
                snapshots.push(snapshot(&state));
            }
        }
        Ok(Trajectory {
            cells_per_link: self.config.cells_per_link,
            time_steps: n_steps,
            dx,
            dt,
            snapshots,
            junction,
            conservation: Conservation {
                initial_vehicles,
                final_vehicles: state.vehicles(dx).iter().sum(),
                inflow,
                outflow,
            },
            final_state: state,
        })
    }
}

pub fn run(config: &SimConfig) -> Result<Trajectory> {
    Simulator::new(config.clone())?.run()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonPoint {
    pub step: usize,
    pub epsilon: f64,
}

/// `eps(n dt) = sum_i sum_m |rho - rho_bar| dx` at every recorded step.
pub fn solution_difference(a: &Trajectory, b: &Trajectory) -> Result<Vec<EpsilonPoint>> {
    if a.cells_per_link != b.cells_per_link
        || a.time_steps != b.time_steps
        || a.dx != b.dx
        || a.dt != b.dt
        || a.snapshots.len() != b.snapshots.len()
    {
        return Err(Error::GridMismatch(format!(
            "M={} N={} vs M={} N={}",
            a.cells_per_link, a.time_steps, b.cells_per_link, b.time_steps
        )));
    }
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(sa, sb)| {
            if sa.step != sb.step {
                return Err(Error::GridMismatch(format!(
                    "snapshot steps {} and {} differ",
                    sa.step, sb.step
                )));
            }
            let mut sum = 0.0;
            for link in 0..3 {
                for (x, y) in sa.densities[link].iter().zip(&sb.densities[link]) {
                    sum += (x - y).abs();
                }
            }
            Ok(EpsilonPoint {
                step: sa.step,
                epsilon: sum * a.dx,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diagrams() -> [FundamentalDiagram; 3] {
        [
            FundamentalDiagram::mainline(),
            FundamentalDiagram::mainline(),
            FundamentalDiagram::ramp(),
        ]
    }

    fn lebacque() -> DivergeModel {
        DivergeModel::lebacque([0.7, 0.3]).unwrap()
    }

    fn small(rho: [f64; 3]) -> SimConfig {
        SimConfig::uniform(lebacque(), diagrams(), rho, [0.7, 0.3], 20, 10.0, 20.0)
    }

    #[test]
    fn step_sizes_and_cfl() {
        let c = SimConfig {
            time_steps: 6400,
            ..SimConfig::uniform(lebacque(), diagrams(), [1.0, 1.0, 0.1], [0.7, 0.3], 160, 10.0, 360.0)
        };
        assert_eq!(c.time_steps, 6400);
        assert!((c.dt() - 0.9 * c.dx()).abs() < 1e-15);
        let bad = SimConfig {
            time_steps: 100,
            ..c.clone()
        };
        assert!(matches!(Simulator::new(bad), Err(Error::Cfl { .. })));
    }

    #[test]
    fn empty_network_stays_empty() {
        let traj = run(&small([0.0; 3])).unwrap();
        for l in 0..3 {
            assert!(traj.final_state.densities[l].iter().all(|r| *r == 0.0));
        }
        assert!(traj.junction.iter().all(|j| j.fluxes == Fluxes::ZERO));
    }

    #[test]
    fn first_junction_flux() {
        let mut sim = Simulator::new(small([1.0, 1.0, 0.1])).unwrap();
        let mut state = SimState::initial(sim.config()).unwrap();
        let f = sim.step(&mut state).unwrap();
        assert!((f.junction.q1 - 0.7 * diagrams()[0].capacity()).abs() < 1e-15);
        assert!((f.junction.q1 - 0.2355).abs() < 1e-4);
    }

    #[test]
    fn uniform_critical_state_is_stationary() {
        // Every link at capacity flow, junction split matching capacities.
        let fd = FundamentalDiagram::greenshields(1.0, 1.0).unwrap();
        let half = FundamentalDiagram::greenshields(0.5, 1.0).unwrap();
        let rc = 0.5;
        let model = DivergeModel::daganzo([0.5, 0.5]).unwrap();
        let cfg = SimConfig::uniform(model, [fd, half, half], [rc; 3], [0.5, 0.5], 10, 10.0, 10.0);
        let traj = run(&cfg).unwrap();
        for l in 0..3 {
            for r in &traj.final_state.densities[l] {
                assert!((r - rc).abs() < 1e-14, "link {l}: {r}");
            }
        }
    }

    #[test]
    fn proportion_update_examples() {
        assert_eq!(proportion_update(0.5, 0.6, 0.7, 0.7, 0.3, 0.2, 1.0), 0.7);
        assert_eq!(proportion_update(0.1, 0.0, 0.4, 0.9, 0.0, 0.1, 1.0), 0.4);
        // Direct form of the same update.
        let (ro, q_in, q_out, r) = (0.5, 0.3, 0.25, 0.9);
        let rn = ro + r * (q_in - q_out);
        let direct = (ro * 0.6 + r * (q_in * 0.8 - q_out * 0.6)) / rn;
        assert!((proportion_update(ro, rn, 0.6, 0.8, q_in, q_out, r) - direct).abs() < 1e-15);
    }

    #[test]
    fn conservation_and_untouched_proportions() {
        let traj = run(&small([1.0, 1.0, 0.1])).unwrap();
        assert!(traj.conservation.relative_drift() < 1e-12);
        let xi = &traj.final_state.proportions;
        assert!(xi[..19].iter().all(|x| x[0] == 0.7 && x[1] == 0.3));
        assert!(xi[19][0] < 0.7);
    }

    #[test]
    fn epsilon_of_identical_and_shifted_runs() {
        let cfg = small([1.0, 1.0, 0.1]);
        let a = run(&cfg).unwrap();
        let eps = solution_difference(&a, &a).unwrap();
        assert!(eps.iter().all(|e| e.epsilon == 0.0));

        let mut b = a.clone();
        b.snapshots[0].densities[1][3] += 0.25;
        let eps = solution_difference(&a, &b).unwrap();
        assert!((eps[0].epsilon - 0.25 * a.dx).abs() < 1e-15);

        let other = run(&SimConfig::uniform(
            lebacque(),
            diagrams(),
            [1.0, 1.0, 0.1],
            [0.7, 0.3],
            40,
            10.0,
            20.0,
        ))
        .unwrap();
        assert!(matches!(solution_difference(&a, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn sinusoid_ghost_is_clamped() {
        let bc = BoundaryCondition::Sinusoid { a: 0.05, b: 0.1, c: 60.0 };
        let v = bc.ghost_value(0.0, 600, 1.0, 0.0841);
        assert!((0.0..=0.0841).contains(&v));
        let low = bc.ghost_value(0.0, 90, 1.0, 0.0841);
        assert_eq!(low, 0.0841f64.min(0.05 + 0.1 * (90.0 * std::f64::consts::PI / 60.0).sin()).max(0.0));
    }

    #[test]
    fn parallel_fill_is_bitwise_identical() {
        let mut cfg = SimConfig::uniform(lebacque(), diagrams(), [1.0, 1.0, 0.1], [0.7, 0.3], 4096, 10.0, 0.05);
        cfg.execution = Execution::Sequential;
        let a = run(&cfg).unwrap();
        cfg.execution = Execution::Parallel;
        let b = run(&cfg).unwrap();
        for l in 0..3 {
            for (x, y) in a.final_state.densities[l].iter().zip(&b.final_state.densities[l]) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }
}
