//! Experiment drivers behind the CLI subcommands.
//!
//! Each driver returns a [`Report`]: pass/fail checks, free-form summary
//! lines and the CSV tables to write. Reports carry no timings, so reruns of
//! the same configuration produce identical files.

mod convergence;
mod flux_map;
mod suite;
mod verify;

use std::fmt::Write as _;
use std::path::Path;

pub use convergence::convergence_study;
pub use flux_map::{flux_map, region_label};
pub use suite::{property_suite, property_suite_with};
pub use verify::{front_position, riemann_verify};

use crate::config::{ExperimentKind, ExperimentSpec};
use crate::ctm::{JunctionRecord, Trajectory};
use crate::Result;

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub config_hash: String,
    pub lines: Vec<String>,
    pub checks: Vec<Check>,
    pub files: Vec<OutputFile>,
}

impl Report {
    fn new(spec: &ExperimentSpec) -> Self {
        Report {
            kind: spec.kind,
            seed: spec.seed,
            config_hash: spec.config_hash.clone(),
            lines: Vec::new(),
            checks: Vec::new(),
            files: Vec::new(),
        }
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn file(&mut self, name: impl Into<String>, contents: String) {
        self.files.push(OutputFile {
            name: name.into(),
            contents,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check_named(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Text of report.txt.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment: {}", self.kind);
        let _ = writeln!(s, "config sha256: {}", self.config_hash);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "verdict: {}", if self.passed() { "PASS" } else { "FAIL" });
        if !self.lines.is_empty() {
            s.push('\n');
            for l in &self.lines {
                let _ = writeln!(s, "{l}");
            }
        }
        if !self.checks.is_empty() {
            s.push('\n');
            for c in &self.checks {
                let _ = writeln!(s, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
        }
        if !self.files.is_empty() {
            s.push_str("\nfiles:\n");
            for f in &self.files {
                let _ = writeln!(s, "  {}", f.name);
            }
        }
        s
    }

    /// Writes every table plus report.txt into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for f in &self.files {
            std::fs::write(dir.join(&f.name), &f.contents)?;
        }
        std::fs::write(dir.join("report.txt"), self.render())?;
        Ok(())
    }
}

pub fn run(spec: &ExperimentSpec) -> Result<Report> {
    match spec.kind {
        ExperimentKind::RiemannVerify => riemann_verify(spec),
        ExperimentKind::Convergence => convergence_study(spec),
        ExperimentKind::FluxMap => flux_map(spec),
        ExperimentKind::PropertySuite => property_suite(spec),
    }
}

/// `step,link,cell,density,xi1,xi2`; proportions only on link 0.
pub fn fields_csv(traj: &Trajectory) -> String {
    let mut s = String::from("step,link,cell,density,xi1,xi2\n");
    for snap in &traj.snapshots {
        for link in 0..3 {
            for (cell, rho) in snap.densities[link].iter().enumerate() {
                let _ = write!(s, "{},{link},{cell},{}", snap.step, num(*rho));
                if link == 0 {
                    let xi = snap.proportions[cell];
                    let _ = writeln!(s, ",{},{}", num(xi[0]), num(xi[1]));
                } else {
                    s.push_str(",,\n");
                }
            }
        }
    }
    s
}

/// `step,q0,q1,q2,d0,s0,d1,s1,d2,s2,xi1,xi2`: junction fluxes and the
/// states of the cells next to the junction.
pub fn junction_csv(records: &[JunctionRecord]) -> String {
    let mut s = String::from("step,q0,q1,q2,d0,s0,d1,s1,d2,s2,xi1,xi2\n");
    for r in records {
        let q = r.fluxes;
        let _ = write!(s, "{},{},{},{}", r.step, num(q.q0), num(q.q1), num(q.q2));
        for u in r.states {
            let _ = write!(s, ",{},{}", num(u.demand), num(u.supply));
        }
        let _ = writeln!(s, ",{},{}", num(r.proportions[0]), num(r.proportions[1]));
    }
    s
}
