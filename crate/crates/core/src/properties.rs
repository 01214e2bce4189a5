//! Randomized and grid property checks over the Riemann solvers and the
//! simulator.
//!
//! Every check takes the flux solver as an argument so that a deliberately
//! broken solver can be run through the same suite. Failures are report
//! content: each outcome carries its first counterexample verbatim.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ctm::{self, BoundaryCondition, BoundarySpec, InitialDensity, InitialProportions, SimConfig};
use crate::oracle::{self, OracleSettings};
use crate::riemann::{
    check_interior_admissible, check_stationary_admissible, local_discrete_flux, solve, DivergeModel, Side,
};
use crate::wave::link_waves;
use crate::{Execution, Fluxes, FundamentalDiagram, Result, RiemannInput};

/// Flux solver under test.
pub type Solver = fn(&DivergeModel, &RiemannInput) -> Result<Fluxes>;

#[derive(Debug, Clone)]
pub struct PropertySettings {
    pub seed: u64,
    /// Random inputs per property.
    pub samples: usize,
    pub diagrams: [FundamentalDiagram; 3],
    /// Points per axis of the oracle grid; 0 skips the oracle.
    pub oracle_grid: usize,
    pub oracle_models: Vec<DivergeModel>,
    pub oracle: OracleSettings,
    /// Random short simulations checked for conservation and bounds.
    pub simulations: usize,
    pub execution: Execution,
}

impl PropertySettings {
    pub fn new(seed: u64, diagrams: [FundamentalDiagram; 3]) -> Self {
        PropertySettings {
            seed,
            samples: 10_000,
            diagrams,
            oracle_grid: 15,
            oracle_models: Vec::new(),
            oracle: OracleSettings::default(),
            simulations: 50,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest violation measure seen; compared against `tolerance`.
    pub max_error: f64,
    pub tolerance: f64,
    pub counterexample: Option<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl std::fmt::Display for PropertyOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: trials={} failures={} max_error={:.3e} tolerance={:.0e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.trials,
            self.failures,
            self.max_error,
            self.tolerance
        )?;
        if let Some(c) = &self.counterexample {
            write!(f, "\n    counterexample: {c}")?;
        }
        Ok(())
    }
}

/// One random Riemann input plus random model parameters.
#[derive(Debug, Clone, Copy)]
struct Sample {
    d0: f64,
    s: [f64; 2],
    /// FIFO split, strictly inside (0, 1).
    xi1: f64,
    /// Priority weight of link 1.
    alpha1: f64,
    /// Partial-evacuation proportions and a compatible priority weight.
    partial_xi: [f64; 2],
    partial_alpha1: f64,
}

impl Sample {
    fn draw(rng: &mut ChaCha8Rng, caps: [f64; 3]) -> Sample {
        // Endpoints and ties are where case analyses break, so a share of
        // the coordinates is pinned to 0 or capacity.
        let mut coord = |c: f64| match rng.gen_range(0..20) {
            0 => 0.0,
            1 | 2 => c,
            _ => rng.gen_range(0.0..=c),
        };
        let d0 = coord(caps[0]);
        let s = [coord(caps[1]), coord(caps[2])];
        let xi1 = rng.gen_range(0.02..0.98);
        let alpha1 = rng.gen_range(0.0..=1.0);
        let p1: f64 = rng.gen_range(0.0..=1.0);
        let p2 = rng.gen_range(0.0..=1.0 - p1);
        let partial_alpha1 = rng.gen_range(p1..=1.0 - p2);
        Sample {
            d0,
            s,
            xi1,
            alpha1,
            partial_xi: [p1, p2],
            partial_alpha1,
        }
    }

    fn input(&self, diagrams: [FundamentalDiagram; 3]) -> Result<RiemannInput> {
        RiemannInput::from_demand_supply(diagrams, self.d0, self.s[0], self.s[1])
    }

    fn xi(&self) -> [f64; 2] {
        [self.xi1, 1.0 - self.xi1]
    }

    fn daganzo(&self) -> Result<DivergeModel> {
        DivergeModel::daganzo(self.xi())
    }

    fn lebacque(&self) -> Result<DivergeModel> {
        DivergeModel::lebacque(self.xi())
    }

    fn priority(&self) -> Result<DivergeModel> {
        DivergeModel::priority([self.alpha1, 1.0 - self.alpha1])
    }

    fn partial(&self) -> Result<DivergeModel> {
        DivergeModel::partial(self.partial_xi, [self.partial_alpha1, 1.0 - self.partial_alpha1])
    }

    fn all_models(&self) -> Result<[DivergeModel; 5]> {
        Ok([
            self.daganzo()?,
            self.lebacque()?,
            DivergeModel::supply_proportional(),
            self.priority()?,
            self.partial()?,
        ])
    }
}

impl std::fmt::Display for Sample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "D0={} S1={} S2={} xi1={} alpha1={} partial_xi={:?} partial_alpha1={}",
            self.d0, self.s[0], self.s[1], self.xi1, self.alpha1, self.partial_xi, self.partial_alpha1
        )
    }
}

/// Error measure of one trial with a description for the report.
type Trial = Result<(f64, String)>;

fn collect(name: &str, tolerance: f64, trials: Vec<Trial>, context: impl Fn(usize) -> String) -> PropertyOutcome {
    let mut out = PropertyOutcome {
        name: name.to_string(),
        trials: trials.len(),
        failures: 0,
        max_error: 0.0,
        tolerance,
        counterexample: None,
    };
    for (i, t) in trials.into_iter().enumerate() {
        let detail = match t {
            Ok((err, _)) if err <= tolerance => {
                out.max_error = out.max_error.max(err);
                continue;
            }
            Ok((err, what)) => {
                out.max_error = out.max_error.max(if err.is_nan() { f64::INFINITY } else { err });
                what
            }
            Err(e) => {
                out.max_error = f64::INFINITY;
                format!("error: {e}")
            }
        };
        out.failures += 1;
        if out.counterexample.is_none() {
            out.counterexample = Some(format!("{}: {detail}", context(i)));
        }
    }
    out
}

fn diff(name: &str, a: &Fluxes, b: &Fluxes) -> (f64, String) {
    (a.max_abs_diff(b), format!("{name}: {a} vs {b}"))
}

fn worst(items: impl IntoIterator<Item = (f64, String)>) -> (f64, String) {
    items
        .into_iter()
        .fold((0.0, String::new()), |acc, x| if x.0 > acc.0 || x.0.is_nan() { x } else { acc })
}

/// Runs every property and returns the outcomes in a fixed order.
pub fn run_suite(settings: &PropertySettings, solver: Solver) -> Result<Vec<PropertyOutcome>> {
    let fds = settings.diagrams;
    let caps = fds.map(|fd| fd.capacity());
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let samples: Vec<Sample> = (0..settings.samples).map(|_| Sample::draw(&mut rng, caps)).collect();
    let exec = settings.execution;
    let run = |name: &str, tolerance: f64, check: &(dyn Fn(&Sample) -> Trial + Sync)| {
        let trials = exec.map(&samples, |s| check(s));
        collect(name, tolerance, trials, |i| format!("sample {i} ({})", samples[i]))
    };

    let mut out = Vec::new();

    out.push(run("conservation", 0.0, &|s| {
        let input = s.input(fds)?;
        let mut all = Vec::new();
        for m in s.all_models()? {
            let q = solver(&m, &input)?;
            all.push(((q.q0 - (q.q1 + q.q2)).abs(), format!("{m}: {q}")));
        }
        Ok(worst(all))
    }));

    out.push(run("feasibility", 1e-12, &|s| {
        let input = s.input(fds)?;
        let mut all = Vec::new();
        for m in s.all_models()? {
            let q = solver(&m, &input)?;
            let excess = [-q.q1, -q.q2, q.q0 - s.d0, q.q1 - s.s[0], q.q2 - s.s[1]]
                .into_iter()
                .fold(0.0, f64::max);
            all.push((excess, format!("{m}: {q}")));
        }
        Ok(worst(all))
    }));

    out.push(run("fifo", 1e-12, &|s| {
        let input = s.input(fds)?;
        let xi = s.xi();
        let mut all = Vec::new();
        for m in [s.daganzo()?, s.lebacque()?] {
            let q = solver(&m, &input)?;
            let err = (q.q1 - xi[0] * q.q0).abs().max((q.q2 - xi[1] * q.q0).abs());
            all.push((err, format!("{m}: {q}")));
        }
        Ok(worst(all))
    }));

    out.push(run("daganzo-equals-lebacque", 1e-12, &|s| {
        let input = s.input(fds)?;
        Ok(diff("daganzo vs lebacque", &solver(&s.daganzo()?, &input)?, &solver(&s.lebacque()?, &input)?))
    }));

    out.push(run("supply-proportional-equals-priority", 1e-12, &|s| {
        let input = s.input(fds)?;
        let a1 = caps[1] / (caps[1] + caps[2]);
        let prio = DivergeModel::priority([a1, 1.0 - a1])?;
        Ok(diff(
            "supply-proportional vs priority",
            &solver(&DivergeModel::supply_proportional(), &input)?,
            &solver(&prio, &input)?,
        ))
    }));

    out.push(run("partial-reduces-to-daganzo", 1e-12, &|s| {
        let input = s.input(fds)?;
        let xi = s.xi();
        let partial = DivergeModel::partial(xi, xi)?;
        Ok(diff("partial vs daganzo", &solver(&partial, &input)?, &solver(&s.daganzo()?, &input)?))
    }));

    out.push(run("partial-reduces-to-priority", 1e-12, &|s| {
        let input = s.input(fds)?;
        let alpha = [s.alpha1, 1.0 - s.alpha1];
        let partial = DivergeModel::partial([0.0, 0.0], alpha)?;
        Ok(diff("partial vs priority", &solver(&partial, &input)?, &solver(&s.priority()?, &input)?))
    }));

    out.push(run("partial-minimum-share", 1e-12, &|s| {
        let input = s.input(fds)?;
        let m = s.partial()?;
        let q = solver(&m, &input)?;
        let xi = s.partial_xi;
        let short = (xi[0] * q.q0 - q.q1).max(xi[1] * q.q0 - q.q2).max(0.0);
        Ok((short, format!("{m}: {q}")))
    }));

    out.push(run("evacuation-optimality", 1e-12, &|s| {
        let input = s.input(fds)?;
        let best = s.d0.min(s.s[0] + s.s[1]);
        let alpha = [s.alpha1, 1.0 - s.alpha1];
        let mut all = Vec::new();
        for m in [
            DivergeModel::supply_proportional(),
            s.priority()?,
            DivergeModel::partial([0.0, 0.0], alpha)?,
        ] {
            let q = solver(&m, &input)?;
            all.push(((q.q0 - best).abs(), format!("{m}: {q}, min(D0, S1+S2)={best}")));
        }
        Ok(worst(all))
    }));

    let reevaluate = |m: &DivergeModel, input: &RiemannInput| -> Result<(f64, String)> {
        let sol = solve(m, input)?;
        let xi = sol.interior_proportions.or(m.xi()).unwrap_or([0.0, 0.0]);
        let local = local_discrete_flux(m, sol.interior_upstream, sol.interior_downstream, xi)?;
        Ok(diff(&format!("{m} local at interior vs global"), &local, &solver(m, input)?))
    };

    out.push(run("invariance", 1e-12, &|s| {
        let input = s.input(fds)?;
        let mut all = Vec::new();
        for m in [s.daganzo()?, s.priority()?, s.partial()?] {
            all.push(reevaluate(&m, &input)?);
        }
        Ok(worst(all))
    }));

    out.push(run("interior-reproduction", 1e-12, &|s| {
        let input = s.input(fds)?;
        let mut all = Vec::new();
        for m in [s.lebacque()?, DivergeModel::supply_proportional()] {
            all.push(reevaluate(&m, &input)?);
        }
        Ok(worst(all))
    }));

    out.push(run("admissibility", 0.0, &|s| {
        let input = s.input(fds)?;
        let init = input.states();
        let mut all = Vec::new();
        for m in s.all_models()? {
            let sol = solve(&m, &input)?;
            let stat = sol.stationary_states();
            let inter = sol.interior_states();
            let mut bad = Vec::new();
            for link in 0..3 {
                let side = if link == 0 { Side::Upstream } else { Side::Downstream };
                if !check_stationary_admissible(stat[link], init[link], side, caps[link]) {
                    bad.push(format!("stationary {link} {}", stat[link]));
                }
                if !check_interior_admissible(inter[link], stat[link], side, caps[link]) {
                    bad.push(format!("interior {link} {}", inter[link]));
                }
            }
            all.push((bad.len() as f64, format!("{m}: {}", bad.join(", "))));
        }
        Ok(worst(all))
    }));

    out.push(run("wave-signs", crate::tol::WAVE_SPEED, &|s| {
        let input = s.input(fds)?;
        let mut all = Vec::new();
        for m in s.all_models()? {
            let sol = solve(&m, &input)?;
            let w = link_waves(&sol, &input)?;
            let err = w[0].max_speed().max(-w[1].min_speed()).max(-w[2].min_speed()).max(0.0);
            all.push((err, format!("{m}: speeds {:?} {:?} {:?}", w[0].speed_range, w[1].speed_range, w[2].speed_range)));
        }
        Ok(worst(all))
    }));

    if settings.oracle_grid > 0 {
        for m in &settings.oracle_models {
            let report = oracle::check_grid(m, fds, settings.oracle_grid, exec, solver, &settings.oracle)?;
            out.push(PropertyOutcome {
                name: format!("oracle {m}"),
                trials: report.points,
                failures: report.failures.len(),
                max_error: report.max_deviation,
                tolerance: settings.oracle.flux_tolerance,
                counterexample: report.failures.first().map(|v| v.to_string()),
            });
        }
    }

    if settings.simulations > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        rng.set_stream(1);
        let configs: Vec<SimConfig> = (0..settings.simulations)
            .map(|_| random_sim(&mut rng, fds))
            .collect::<Result<_>>()?;
        let trials = exec.map(&configs, |cfg| -> Trial {
            let traj = ctm::run(cfg)?;
            let drift = traj.conservation.relative_drift();
            let bad_xi = traj
                .snapshots
                .iter()
                .flat_map(|s| s.proportions.iter())
                .any(|xi| xi.iter().any(|x| !(0.0..=1.0).contains(x)) || xi[0] + xi[1] > 1.0 + 1e-12);
            if bad_xi {
                return Ok((f64::INFINITY, "proportion left [0, 1]".into()));
            }
            Ok((drift, format!("relative drift {drift:e}")))
        });
        out.push(collect("simulation-conservation", 1e-8, trials, |i| {
            let c = &configs[i];
            format!("simulation {i} ({}, M={}, N={})", c.model, c.cells_per_link, c.time_steps)
        }));
    }

    Ok(out)
}

/// Short CFL-valid simulation with random cells, model and boundaries.
fn random_sim(rng: &mut ChaCha8Rng, fds: [FundamentalDiagram; 3]) -> Result<SimConfig> {
    let sample = Sample::draw(rng, fds.map(|fd| fd.capacity()));
    let model = sample.all_models()?[rng.gen_range(0..5)];
    let cells = rng.gen_range(5..40);
    let mut cfg = SimConfig::uniform(model, fds, [0.0; 3], sample.xi(), cells, 1.0, rng.gen_range(1.0..6.0));
    cfg.initial_densities = [0, 1, 2].map(|l| {
        let jam = fds[l].jam_density();
        InitialDensity::Cells((0..cells).map(|_| rng.gen_range(0.0..=jam)).collect())
    });
    cfg.initial_proportions = InitialProportions::Cells(
        (0..cells)
            .map(|_| {
                let x: f64 = rng.gen_range(0.05..0.95);
                [x, 1.0 - x]
            })
            .collect(),
    );
    let mut boundary = |cap: f64| match rng.gen_range(0..3) {
        0 => BoundaryCondition::Neumann,
        1 => BoundaryCondition::Constant {
            flux: rng.gen_range(0.0..=cap),
        },
        _ => BoundaryCondition::Sinusoid {
            a: rng.gen_range(0.0..=cap),
            b: rng.gen_range(0.0..=cap),
            c: rng.gen_range(0.5..5.0),
        },
    };
    cfg.boundaries = BoundarySpec {
        upstream_demand: boundary(fds[0].capacity()),
        downstream_supplies: [boundary(fds[1].capacity()), boundary(fds[2].capacity())],
    };
    cfg.snapshot_every = 5;
    cfg.execution = Execution::Sequential;
    cfg.validate()?;
    Ok(cfg)
}
