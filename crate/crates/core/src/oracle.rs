//! Brute-force search for Riemann solutions, independent of the closed forms.
//!
//! For each link the boundary flux either equals the initial capacity bound
//! (`q_0 = D_0`, `q_i = S_i`; the interior state is then free within its
//! admissible set) or stays strictly below it (the interior state is pinned
//! to the strictly over/under-critical stationary state). That gives eight
//! regimes. In each regime the free interior quantities (upstream demand,
//! downstream supplies and, for Lebacque's rule, the interior split) are
//! searched for a point where the local flux rule is consistent with the
//! regime. Every consistent point is a Riemann solution.

use crate::fundamental_diagram::FundamentalDiagram;
use crate::par::Execution;
use crate::riemann::{local_discrete_flux, DivergeModel, Fluxes, RiemannInput};
use crate::supply_demand::TrafficState;
use crate::Result;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    /// Coarse grid points per dimension in four dimensions; lower
    /// dimensions use proportionally finer grids.
    pub coarse_points: usize,
    /// Local minima of the coarse grid refined per regime, best first.
    pub starts: usize,
    pub max_iterations: usize,
    /// A point counts as a solution when its residual is below this.
    pub accept_residual: f64,
    /// Margin by which a strict inequality must hold.
    pub strict_margin: f64,
    /// Solutions closer than this are the same flux triple.
    pub flux_tolerance: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            coarse_points: 9,
            starts: 24,
            max_iterations: 2000,
            accept_residual: 2e-9,
            strict_margin: 1e-9,
            flux_tolerance: 1e-6,
        }
    }
}

/// `true` where the link's flux meets its bound (`q_0 = D_0` or `q_i = S_i`).
pub type Regime = [bool; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub regime: Regime,
    pub fluxes: Fluxes,
    pub residual: f64,
    pub interior_demand: f64,
    pub interior_supplies: [f64; 2],
    pub interior_split: Option<[f64; 2]>,
}

const MAX_DIMS: usize = 4;
/// A start is dropped once its residual exceeds this multiple of the mesh size.
const ABANDON: f64 = 200.0;
const SCAN_POINTS: usize = 512;
const ANCHOR_WEIGHT: f64 = 1e-4;
/// Starts that get coordinate scans when the direct search stalls.
const SCANNED_STARTS: usize = 4;
type Point = [f64; MAX_DIMS];

struct Problem<'a> {
    model: &'a DivergeModel,
    regime: Regime,
    d0: f64,
    s: [f64; 2],
    caps: [f64; 3],
    margin: f64,
    /// Parameter index of the upstream demand, the two supplies and the split.
    slots: [Option<usize>; 4],
    dims: usize,
    lo: Point,
    span: Point,
    /// The initial data in unit coordinates; the search objective leans
    /// toward it so that flat stretches of the residual have a direction.
    anchor: Point,
}

impl Problem<'_> {
    fn new<'a>(model: &'a DivergeModel, input: &RiemannInput, regime: Regime, margin: f64) -> Problem<'a> {
        let caps = input.capacities();
        let mut slots = [None; 4];
        let mut lo = [0.0; MAX_DIMS];
        let mut span = [0.0; MAX_DIMS];
        let mut anchor = [0.0; MAX_DIMS];
        let mut dims = 0;
        let mut add = |slot: usize, low: f64, high: f64, at: f64| {
            slots[slot] = Some(dims);
            lo[dims] = low;
            span[dims] = high - low;
            anchor[dims] = ((at - low) / (high - low)).clamp(0.0, 1.0);
            dims += 1;
        };
        let data = [input.d0(), input.supplies()[0], input.supplies()[1]];
        for link in 0..3 {
            if regime[link] {
                add(link, 0.0, caps[link], data[link]);
            }
        }
        // Lebacque's interior split is unknown. Daganzo's rule moves vehicles
        // in the proportions of the last upstream cell, so that split is the
        // model's own.
        if matches!(model, DivergeModel::Lebacque { .. }) {
            add(3, 0.0, 1.0, model.xi().map_or(0.5, |xi| xi[0]));
        }
        Problem {
            model,
            regime,
            d0: input.d0(),
            s: input.supplies(),
            caps,
            margin,
            slots,
            dims,
            lo,
            span,
            anchor,
        }
    }

    fn interior(&self, u: &Point) -> (f64, [f64; 2], [f64; 2]) {
        let value = |slot: usize, pinned: f64| {
            self.slots[slot].map_or(pinned, |k| self.lo[k] + self.span[k] * u[k])
        };
        let d = value(0, self.caps[0]);
        let s = [value(1, self.caps[1]), value(2, self.caps[2])];
        let split = match self.slots[3] {
            Some(k) => [u[k], 1.0 - u[k]],
            None => self.model.xi().unwrap_or([0.5, 0.5]),
        };
        (d, s, split)
    }

    fn evaluate(&self, u: &Point) -> Option<(Fluxes, f64)> {
        let (d, s, split) = self.interior(u);
        let up = TrafficState::new(d, self.caps[0]);
        let down = [
            TrafficState::new(self.caps[1], s[0]),
            TrafficState::new(self.caps[2], s[1]),
        ];
        let q = local_discrete_flux(self.model, up, down, split).ok()?;
        let bounds = [self.d0, self.s[0], self.s[1]];
        let flows = [q.q0, q.q1, q.q2];
        let mut r = 0.0;
        for link in 0..3 {
            r += if self.regime[link] {
                (flows[link] - bounds[link]).abs()
            } else {
                (flows[link] - (bounds[link] - self.margin)).max(0.0)
            };
        }
        if self.model.is_fifo_family() {
            // Vehicles keep their routes: q_i = xi_i q_0.
            let xi = self.model.xi().unwrap_or([0.5, 0.5]);
            r += (q.q1 - xi[0] * q.q0).abs() + (q.q2 - xi[1] * q.q0).abs();
        }
        Some((q, r))
    }

    fn residual(&self, u: &Point) -> f64 {
        self.evaluate(u).map_or(f64::INFINITY, |(_, r)| r)
    }

    /// Residual plus a small pull toward the anchor. Only steers the search;
    /// acceptance uses the plain residual.
    fn objective(&self, u: &Point) -> f64 {
        let pull: f64 = (0..self.dims).map(|k| (u[k] - self.anchor[k]).abs()).sum();
        self.residual(u) + ANCHOR_WEIGHT * pull
    }

    /// Coarse grid points per dimension: finer in low dimension.
    fn grid_points(&self, settings: &OracleSettings) -> usize {
        match self.dims {
            0 | 1 => 8 * settings.coarse_points,
            2 => 4 * settings.coarse_points,
            3 => 2 * settings.coarse_points,
            _ => settings.coarse_points,
        }
    }

    /// Discrete local minima of the residual on the coarse grid, best first.
    /// Plateaus are common (a saturated min/max makes the local rule flat in
    /// some directions), so every basin gets its own start.
    fn starts(&self, points: usize) -> Vec<(f64, Point)> {
        let d = self.dims;
        let total = points.pow(d as u32);
        let coord = |mut idx: usize| {
            let mut ix = [0usize; MAX_DIMS];
            for v in ix.iter_mut().take(d) {
                *v = idx % points;
                idx /= points;
            }
            ix
        };
        let unit = |ix: &[usize; MAX_DIMS]| {
            let mut u = [0.0; MAX_DIMS];
            for k in 0..d {
                u[k] = ix[k] as f64 / (points - 1) as f64;
            }
            u
        };
        let values: Vec<f64> = (0..total).map(|i| self.objective(&unit(&coord(i)))).collect();
        let mut minima = Vec::new();
        for (i, &r) in values.iter().enumerate() {
            let ix = coord(i);
            let mut stride = 1;
            let mut is_min = true;
            // Ties go to the lower index, so a plateau contributes one start.
            for k in 0..d {
                if ix[k] > 0 && values[i - stride] <= r {
                    is_min = false;
                }
                if ix[k] + 1 < points && values[i + stride] < r {
                    is_min = false;
                }
                stride *= points;
            }
            if is_min {
                minima.push((r, unit(&ix)));
            }
        }
        minima.sort_by(|a, b| a.0.total_cmp(&b.0));
        minima
    }

    /// Fine scan along each coordinate through `u`; the best point if it
    /// beats `r`. Escapes plateaus that hide a narrow basin.
    fn scan(&self, u: &Point, r: f64) -> Option<(Point, f64)> {
        let mut best: Option<(Point, f64)> = None;
        for k in 0..self.dims {
            for i in 0..=SCAN_POINTS {
                let mut y = *u;
                y[k] = i as f64 / SCAN_POINTS as f64;
                let ry = self.objective(&y);
                if ry < best.map_or(r, |(_, b)| b) {
                    best = Some((y, ry));
                }
            }
        }
        best
    }

    /// Mesh-adaptive direct search in unit coordinates: poll the coordinate
    /// directions plus random ones, halve the mesh when nothing improves.
    /// Gives up once the residual is far above what the mesh could still
    /// remove.
    fn refine(&self, mut u: Point, mut best: f64, mut h: f64, settings: &OracleSettings, rng: &mut ChaCha8Rng) -> (Point, f64) {
        let d = self.dims;
        let h_max = h;
        // Reusing the last successful direction lets the search follow long
        // diagonal valleys that random polling only hits occasionally.
        let mut last_dir: Option<Point> = None;
        for _ in 0..settings.max_iterations {
            let plain = self.residual(&u);
            if h < 1e-14 || plain > ABANDON * h || plain <= settings.accept_residual * 1e-3 {
                break;
            }
            let mut next: Option<(Point, f64, Point)> = None;
            let mut poll = |dir: Point| {
                let mut y = u;
                for k in 0..d {
                    y[k] = (u[k] + h * dir[k]).clamp(0.0, 1.0);
                }
                let r = self.objective(&y);
                if r < next.map_or(best, |(_, b, _)| b) {
                    next = Some((y, r, dir));
                }
            };
            if let Some(dir) = last_dir {
                poll(dir);
            }
            for k in 0..d {
                for sign in [1.0, -1.0] {
                    let mut e = [0.0; MAX_DIMS];
                    e[k] = sign;
                    poll(e);
                }
            }
            for _ in 0..d {
                let mut v: Point = [0.0; MAX_DIMS];
                for vk in v.iter_mut().take(d) {
                    *vk = rng.gen_range(-1.0..1.0);
                }
                let norm = v.iter().fold(1e-12f64, |m, x| m.max(x.abs()));
                poll(v.map(|x| x / norm));
                poll(v.map(|x| -x / norm));
            }
            match next {
                Some((y, r, dir)) => {
                    u = y;
                    best = r;
                    last_dir = Some(dir);
                    h = (2.0 * h).min(h_max);
                }
                None => {
                    last_dir = None;
                    h *= 0.5;
                }
            }
        }
        (u, best)
    }

    fn solve(&self, settings: &OracleSettings, seed: u64) -> Option<Candidate> {
        let mut u = [0.0; MAX_DIMS];
        if self.dims > 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let points = self.grid_points(settings);
            let h0 = 1.0 / (points - 1) as f64;
            let mut best_r = f64::INFINITY;
            for (n, (r0, start)) in self.starts(points).into_iter().take(settings.starts).enumerate() {
                let (mut y, mut obj) = self.refine(start, r0, h0, settings, &mut rng);
                if n < SCANNED_STARTS {
                    for _ in 0..4 {
                        if self.residual(&y) <= settings.accept_residual {
                            break;
                        }
                        match self.scan(&y, obj) {
                            Some((z, rz)) => (y, obj) = self.refine(z, rz, h0, settings, &mut rng),
                            None => break,
                        }
                    }
                }
                let r = self.residual(&y);
                if r < best_r {
                    best_r = r;
                    u = y;
                }
                if r <= settings.accept_residual {
                    break;
                }
            }
        }
        let (fluxes, residual) = self.evaluate(&u)?;
        if residual > settings.accept_residual {
            return None;
        }
        let (d, s, split) = self.interior(&u);
        Some(Candidate {
            regime: self.regime,
            fluxes,
            residual,
            interior_demand: d,
            interior_supplies: s,
            interior_split: self.slots[3].map(|_| split),
        })
    }
}

/// All regimes that admit a solution, with one representative each.
pub fn find_solutions(model: &DivergeModel, input: &RiemannInput, settings: &OracleSettings) -> Vec<Candidate> {
    let mut out = Vec::new();
    for code in 0..8u8 {
        let regime = [code & 1 != 0, code & 2 != 0, code & 4 != 0];
        let problem = Problem::new(model, input, regime, settings.strict_margin);
        if let Some(c) = problem.solve(settings, u64::from(code)) {
            out.push(c);
        }
    }
    out
}

/// Distinct flux triples among the candidates.
pub fn distinct_fluxes(candidates: &[Candidate], tolerance: f64) -> Vec<Fluxes> {
    let mut out: Vec<Fluxes> = Vec::new();
    for c in candidates {
        if out.iter().all(|q| q.max_abs_diff(&c.fluxes) > tolerance) {
            out.push(c.fluxes);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleVerdict {
    pub d0: f64,
    pub supplies: [f64; 2],
    pub expected: Fluxes,
    pub found: Vec<Fluxes>,
    pub deviation: f64,
}

impl OracleVerdict {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.found.len() == 1 && self.deviation <= tolerance
    }
}

impl std::fmt::Display for OracleVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "D0={} S1={} S2={}: solver {} vs {} oracle solution(s)",
            self.d0,
            self.supplies[0],
            self.supplies[1],
            self.expected,
            self.found.len()
        )?;
        for q in &self.found {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

/// Compare `solver` with the oracle on one input.
pub fn check_point<F>(
    model: &DivergeModel,
    input: &RiemannInput,
    solver: F,
    settings: &OracleSettings,
) -> Result<OracleVerdict>
where
    F: Fn(&DivergeModel, &RiemannInput) -> Result<Fluxes>,
{
    let expected = solver(model, input)?;
    let found = distinct_fluxes(&find_solutions(model, input, settings), settings.flux_tolerance);
    let deviation = found
        .iter()
        .map(|q| q.max_abs_diff(&expected))
        .fold(if found.is_empty() { f64::INFINITY } else { 0.0 }, f64::max);
    Ok(OracleVerdict {
        d0: input.d0(),
        supplies: input.supplies(),
        expected,
        found,
        deviation,
    })
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub model: DivergeModel,
    pub points: usize,
    pub max_deviation: f64,
    pub failures: Vec<OracleVerdict>,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Oracle check on the `n^3` grid of `(D_0, S_1, S_2)` spanning `[0, C]`.
pub fn check_grid<F>(
    model: &DivergeModel,
    diagrams: [FundamentalDiagram; 3],
    n: usize,
    execution: Execution,
    solver: F,
    settings: &OracleSettings,
) -> Result<GridReport>
where
    F: Fn(&DivergeModel, &RiemannInput) -> Result<Fluxes> + Sync + Send,
{
    let caps = diagrams.map(|fd| fd.capacity());
    let at = |k: usize, i: usize| {
        if n == 1 {
            caps[k]
        } else {
            caps[k] * i as f64 / (n - 1) as f64
        }
    };
    let verdicts = execution.map_range(n * n * n, |idx| {
        let (i, j, k) = (idx / (n * n), (idx / n) % n, idx % n);
        let input = RiemannInput::from_demand_supply(diagrams, at(0, i), at(1, j), at(2, k))?;
        check_point(model, &input, &solver, settings)
    });
    let mut max_deviation: f64 = 0.0;
    let mut failures = Vec::new();
    for v in verdicts {
        let v = v?;
        max_deviation = max_deviation.max(v.deviation);
        if !v.passed(settings.flux_tolerance) {
            failures.push(v);
        }
    }
    Ok(GridReport {
        model: *model,
        points: n * n * n,
        max_deviation,
        failures,
    })
}
