//! TOML experiment configuration.
//!
//! ```toml
//! experiment = "riemann-verify"   # convergence | flux-map | property-suite
//! seed = 1                        # optional; the CLI flag wins
//! tolerance = 5e-3
//! resolutions = [40, 80, 160]
//! execution = "parallel"          # or "sequential"
//!
//! diagrams = [{ kind = "del-castillo-mainline" },
//!             { kind = "del-castillo-mainline" },
//!             { kind = "del-castillo-ramp" }]
//!
//! [model]
//! kind = "lebacque"
//! xi = [0.7, 0.3]
//!
//! [sim]
//! cells_per_link = 160
//! time_steps = 6400               # default: round(horizon / (0.9 dx))
//! link_length = 10.0
//! horizon = 360.0
//! initial_densities = [1.0, 1.0, 0.1]
//!
//! [sim.boundaries]
//! downstream_supplies = [{ type = "neumann" },
//!                        { type = "sinusoid", a = 0.05, b = 0.03, c = 60.0 }]
//! ```
//!
//! The full key list is in the README.

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::ctm::{BoundarySpec, InitialDensity, InitialProportions, SimConfig};
use crate::riemann::ModelTag;
use crate::{DiagramKind, DivergeModel, Error, Execution, FundamentalDiagram, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RiemannVerify,
    Convergence,
    FluxMap,
    PropertySuite,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExperimentKind::RiemannVerify => "riemann-verify",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::FluxMap => "flux-map",
            ExperimentKind::PropertySuite => "property-suite",
        })
    }
}

/// One sweep axis: a fixed value or `points` evenly spaced values on
/// `[min, max]`, which default to `[0, capacity]`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Fixed(f64),
    Range {
        points: usize,
        min: Option<f64>,
        max: Option<f64>,
    },
}

impl Axis {
    pub fn values(&self, capacity: f64) -> Vec<f64> {
        match *self {
            Axis::Fixed(v) => vec![v],
            Axis::Range { points, min, max } => {
                let (lo, hi) = (min.unwrap_or(0.0), max.unwrap_or(capacity));
                match points {
                    0 => Vec::new(),
                    1 => vec![hi],
                    n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
                }
            }
        }
    }
}

/// Grid over `(D_0, S_1, S_2)`. Leaving `d0` out sweeps `(S_1, S_2)` at
/// `D_0 = C_0`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub d0: Option<Axis>,
    pub s1: Axis,
    pub s2: Axis,
}

impl Sweep {
    pub fn axes(&self, diagrams: &[FundamentalDiagram; 3]) -> [Vec<f64>; 3] {
        let caps = diagrams.map(|fd| fd.capacity());
        [
            self.d0.unwrap_or(Axis::Fixed(caps[0])).values(caps[0]),
            self.s1.values(caps[1]),
            self.s2.values(caps[2]),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropertyOptions {
    pub samples: usize,
    pub oracle_grid: usize,
    pub simulations: usize,
}

/// Validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub seed: u64,
    /// SHA-256 of the configuration text.
    pub config_hash: String,
    pub diagrams: [FundamentalDiagram; 3],
    pub sim: Option<SimConfig>,
    pub sweep: Option<Sweep>,
    pub resolutions: Vec<usize>,
    pub tolerance: f64,
    /// Models swept by `flux-map` and checked by the oracle in `property-suite`.
    pub models: Vec<DivergeModel>,
    /// Second model of the convergence pair.
    pub reference: Option<DivergeModel>,
    pub properties: PropertyOptions,
    pub execution: Execution,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<ExperimentKind>,
    seed: Option<u64>,
    tolerance: Option<f64>,
    #[serde(default)]
    resolutions: Vec<usize>,
    execution: Option<Execution>,
    diagrams: Option<[RawDiagram; 3]>,
    model: Option<RawModel>,
    #[serde(default)]
    models: Vec<RawModel>,
    sim: Option<RawSim>,
    sweep: Option<Sweep>,
    convergence: Option<RawConvergence>,
    properties: Option<RawProperties>,
}

#[derive(Debug, Deserialize)]
struct RawDiagram {
    #[serde(flatten)]
    kind: DiagramKind,
    free_flow_speed: Option<f64>,
    jam_density: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: ModelTag,
    xi: Option<[f64; 2]>,
    alpha: Option<[f64; 2]>,
}

impl RawModel {
    fn build(&self) -> Result<DivergeModel> {
        DivergeModel::from_parts(self.kind, self.xi, self.alpha)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    cells_per_link: usize,
    time_steps: Option<usize>,
    link_length: f64,
    horizon: f64,
    initial_densities: [InitialDensity; 3],
    initial_proportions: Option<InitialProportions>,
    inflow_proportions: Option<[f64; 2]>,
    #[serde(default)]
    boundaries: BoundarySpec,
    snapshot_every: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConvergence {
    reference: RawModel,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProperties {
    samples: Option<usize>,
    oracle_grid: Option<usize>,
    simulations: Option<usize>,
}

pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Steps giving `dt = 0.9 dx`, rounded to a whole number.
pub fn default_time_steps(cells_per_link: usize, link_length: f64, horizon: f64) -> usize {
    let dx = link_length / cells_per_link as f64;
    ((horizon / (0.9 * dx)).round() as usize).max(1)
}

impl ExperimentSpec {
    /// Parse and validate. `kind` and `seed`, when given, take precedence
    /// over the file; a file naming a different experiment is rejected.
    pub fn from_toml(text: &str, kind: Option<ExperimentKind>, seed: Option<u64>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let kind = match (kind, raw.experiment) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Config(format!("configuration is for {b}, not {a}")));
            }
            (Some(k), _) | (None, Some(k)) => k,
            (None, None) => return Err(Error::Config("missing `experiment`".into())),
        };
        let execution = raw.execution.unwrap_or_default();
        let diagrams = match &raw.diagrams {
            Some(d) => {
                let mut out = [FundamentalDiagram::mainline(); 3];
                for (slot, rd) in out.iter_mut().zip(d) {
                    let fd = FundamentalDiagram::with_defaults(rd.kind)?;
                    *slot = FundamentalDiagram::new(
                        rd.kind,
                        rd.free_flow_speed.unwrap_or(fd.free_flow_speed()),
                        rd.jam_density.unwrap_or(fd.jam_density()),
                    )?;
                }
                out
            }
            None => [
                FundamentalDiagram::mainline(),
                FundamentalDiagram::mainline(),
                FundamentalDiagram::ramp(),
            ],
        };
        let model = raw.model.map(|m| m.build()).transpose()?;
        let models = raw.models.iter().map(RawModel::build).collect::<Result<Vec<_>>>()?;

        let sim = match raw.sim {
            Some(s) => {
                let model = model.ok_or_else(|| Error::Config("[sim] needs a [model] section".into()))?;
                let xi = model.xi().unwrap_or([0.5, 0.5]);
                let cfg = SimConfig {
                    cells_per_link: s.cells_per_link,
                    time_steps: s
                        .time_steps
                        .unwrap_or_else(|| default_time_steps(s.cells_per_link.max(1), s.link_length, s.horizon)),
                    link_length: s.link_length,
                    horizon: s.horizon,
                    model,
                    diagrams,
                    initial_densities: s.initial_densities,
                    initial_proportions: s.initial_proportions.unwrap_or(InitialProportions::Uniform(xi)),
                    inflow_proportions: s.inflow_proportions.unwrap_or(xi),
                    boundaries: s.boundaries,
                    snapshot_every: s.snapshot_every.unwrap_or(50),
                    execution,
                };
                cfg.validate()?;
                Some(cfg)
            }
            None => None,
        };

        let tolerance = raw.tolerance.unwrap_or(5e-3);
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(Error::Config(format!("tolerance must be positive, got {tolerance}")));
        }
        if raw.resolutions.contains(&0) {
            return Err(Error::Config("resolutions must be positive".into()));
        }
        let props = raw.properties.unwrap_or(RawProperties {
            samples: None,
            oracle_grid: None,
            simulations: None,
        });
        let spec = ExperimentSpec {
            kind,
            seed: seed.or(raw.seed).unwrap_or(0),
            config_hash: config_hash(text),
            diagrams,
            reference: raw.convergence.map(|c| c.reference.build()).transpose()?,
            sim,
            sweep: raw.sweep,
            resolutions: raw.resolutions,
            tolerance,
            models,
            properties: PropertyOptions {
                samples: props.samples.unwrap_or(10_000),
                oracle_grid: props.oracle_grid.unwrap_or(15),
                simulations: props.simulations.unwrap_or(50),
            },
            execution,
        };
        spec.check_kind()?;
        Ok(spec)
    }

    pub fn from_file(path: &std::path::Path, kind: Option<ExperimentKind>, seed: Option<u64>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, kind, seed)
    }

    fn check_kind(&self) -> Result<()> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(format!("{} experiment needs {what}", self.kind)))
            }
        };
        match self.kind {
            ExperimentKind::RiemannVerify => {
                need(self.sim.is_some(), "[model] and [sim]")?;
                need(
                    self.resolutions.windows(2).all(|w| w[0] < w[1]),
                    "ascending resolutions",
                )
            }
            ExperimentKind::Convergence => {
                need(self.sim.is_some(), "[model] and [sim]")?;
                need(self.reference.is_some(), "[convergence] reference")?;
                need(
                    !self.resolutions.is_empty() && self.resolutions.windows(2).all(|w| w[0] < w[1]),
                    "nonempty ascending resolutions",
                )
            }
            ExperimentKind::FluxMap => {
                need(!self.models.is_empty(), "at least one [[models]] entry")?;
                let sweep = self.sweep.as_ref().ok_or_else(|| Error::Config("flux-map needs [sweep]".into()))?;
                need(sweep.axes(&self.diagrams).iter().all(|a| !a.is_empty()), "a nonempty sweep")
            }
            ExperimentKind::PropertySuite => need(self.properties.samples > 0, "samples > 0"),
        }
    }

    /// Copy of the simulation with `cells_per_link = m` and the step count
    /// rescaled to keep `dt / dx`.
    pub fn sim_at(&self, m: usize) -> Result<SimConfig> {
        let base = self
            .sim
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{} experiment has no [sim]", self.kind)))?;
        let mut cfg = base.clone();
        let ratio = base.dt() / base.dx();
        cfg.cells_per_link = m;
        cfg.time_steps = ((base.horizon / (ratio * base.link_length / m as f64)).round() as usize).max(1);
        let resize = |d: &InitialDensity| match d {
            InitialDensity::Uniform(v) => Ok(InitialDensity::Uniform(*v)),
            InitialDensity::Cells(_) if m == base.cells_per_link => Ok(d.clone()),
            InitialDensity::Cells(_) => Err(Error::Config(
                "per-cell initial densities cannot be used with other resolutions".into(),
            )),
        };
        cfg.initial_densities = [
            resize(&base.initial_densities[0])?,
            resize(&base.initial_densities[1])?,
            resize(&base.initial_densities[2])?,
        ];
        if let InitialProportions::Cells(_) = base.initial_proportions {
            if m != base.cells_per_link {
                return Err(Error::Config(
                    "per-cell initial proportions cannot be used with other resolutions".into(),
                ));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
