//! Experiment configurations and the runs behind each command-line subcommand.
//!
//! A run computes named checks into a [`RunReport`] and collects text artifacts (surface, field
//! and measure tables, SVG plots). Pass/fail logic reads only the numbers; plots are derived.

mod catalog;
mod defect;
mod entropy;
mod geometry;
mod wente;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::convergence::check_ladder;
use crate::error::{Error, Result};
use crate::files;
use crate::report::{Check, RunReport};

pub use catalog::{surface, REVOLVED};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Generate,
    Residuals,
    #[default]
    Entropy,
    Wente,
    Riesz,
    Defect,
    Dual,
    Convergence,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Residuals => "residuals",
            Command::Entropy => "entropy",
            Command::Wente => "wente",
            Command::Riesz => "riesz",
            Command::Defect => "defect",
            Command::Dual => "dual",
            Command::Convergence => "convergence",
        }
    }

    /// Targets accepted by the command; the first is the default where one exists.
    pub fn targets(self) -> &'static [&'static str] {
        match self {
            Command::Residuals => &["weingarten", "isothermic", "willmore"],
            Command::Defect => &["atom", "transport"],
            Command::Convergence => &["poisson", "entropy", "willmore", "codazzi"],
            _ => &[],
        }
    }
}

/// Everything a run depends on. Unset options take command-specific defaults, which are
/// filled in before the configuration is echoed into the report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Sub-experiment of `residuals`, `defect` or `convergence`; all of them when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    /// Restricts surface-based runs to one generator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<usize>>,
    /// Concentration or oscillation indices of a family.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks: Option<Vec<u32>>,
    /// Oscillation amplitude of curve families.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Boxes per axis of measure grids.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boxes: Option<usize>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Generator parameters.
    pub params: BTreeMap<String, f64>,
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configurations serialize")
    }

    /// Fills unset options with the defaults of the command, so the echoed configuration
    /// reproduces the run on its own.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        let (grid, ladder, ks, boxes): (usize, &[usize], &[u32], usize) = match (c.command, c.target.as_deref()) {
            (Command::Generate, _) => (128, &[], &[], 0),
            (Command::Defect, Some("atom")) => (512, &[], &[1, 2, 4, 8], 31),
            (Command::Defect, Some("transport")) => (512, &[], &[8, 16, 32], 8),
            (Command::Entropy | Command::Convergence | Command::Residuals, _) => (256, &[64, 128, 256], &[], 0),
            _ => (256, &[], &[], 0),
        };
        c.grid.get_or_insert(grid);
        if !ladder.is_empty() {
            c.ladder.get_or_insert_with(|| ladder.to_vec());
        }
        if !ks.is_empty() {
            c.ks.get_or_insert_with(|| ks.to_vec());
        }
        if boxes > 0 {
            c.boxes.get_or_insert(boxes);
        }
        if matches!((c.command, c.target.as_deref()), (Command::Defect, Some("transport"))) {
            c.amplitude.get_or_insert(1.0);
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        let targets = self.command.targets();
        if let Some(t) = &self.target {
            if !targets.contains(&t.as_str()) {
                return Err(Error::Config(format!(
                    "`{t}` is not a target of `{}` (expected one of {targets:?})",
                    self.command.name()
                )));
            }
        }
        if let Some(l) = &self.ladder {
            check_ladder(l).map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.grid.is_some_and(|g| g < 16) {
            return Err(Error::Config("grid needs at least 16 nodes per axis".into()));
        }
        if self.boxes == Some(0) || self.ks.as_ref().is_some_and(|k| k.is_empty() || k.contains(&0)) {
            return Err(Error::Config("boxes and ks must be positive".into()));
        }
        if let Some(g) = &self.generator {
            if !catalog::known(g) {
                return Err(Error::UnknownGenerator(g.clone()));
            }
        }
        let t = &self.tolerances;
        let positive = [
            ("conformal_analytic", t.conformal_analytic),
            ("conformal_curve", t.conformal_curve),
            ("conformal_discretization", t.conformal_discretization),
            ("rank_eps", t.rank_eps),
            ("isothermic_gate", t.isothermic_gate),
            ("closure", t.closure),
            ("curve_speed", t.curve_speed),
            ("r_min", t.r_min),
            ("integrability", t.integrability),
            ("solver_rel", t.solver_rel),
            ("kernel_paths", t.kernel_paths),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::Config(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        if t.solver_max_iter == 0 {
            return Err(Error::Config("tolerance `solver_max_iter` must be positive".into()));
        }
        Ok(())
    }
}

/// A text file produced by a run, named relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: RunReport,
    pub artifacts: Vec<Artifact>,
}

impl RunOutput {
    /// Writes `report.json` and every artifact under `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        files::write(&dir.join("report.json"), &self.report.to_json())?;
        for a in &self.artifacts {
            files::write(&dir.join(&a.name), &a.contents)?;
        }
        Ok(())
    }
}

/// Report and artifacts under construction.
struct Run<'a> {
    cfg: &'a ExperimentConfig,
    report: RunReport,
    artifacts: Vec<Artifact>,
}

impl<'a> Run<'a> {
    fn tol(&self) -> &'a Tolerances {
        &self.cfg.tolerances
    }

    fn grid_or(&self, default: usize) -> usize {
        self.cfg.grid.unwrap_or(default)
    }

    fn ladder_or(&self, default: &[usize]) -> Vec<usize> {
        self.cfg.ladder.clone().unwrap_or_else(|| default.to_vec())
    }

    fn ks_or(&self, default: &[u32]) -> Vec<u32> {
        self.cfg.ks.clone().unwrap_or_else(|| default.to_vec())
    }

    fn boxes_or(&self, default: usize) -> usize {
        self.cfg.boxes.unwrap_or(default)
    }

    fn check(&mut self, c: Check) {
        self.report.push(c);
    }

    /// Unwraps a module result, recording a failed check named `name` on error.
    fn attempt<T>(&mut self, name: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                log::error!("{name}: {e}");
                self.report.push(Check::error(name, &e));
                None
            }
        }
    }

    fn artifact(&mut self, name: impl Into<String>, contents: String) {
        self.artifacts.push(Artifact {
            name: name.into(),
            contents,
        });
    }

    fn wants(&self, target: &str) -> bool {
        self.cfg.target.as_deref().is_none_or(|t| t == target)
    }
}

/// Runs the configured command. Configuration errors are returned; module errors inside a run
/// become failed checks so that the remaining checks still execute.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let cfg = config.resolved();
    let mut run = Run {
        cfg: &cfg,
        report: RunReport::new(cfg.command.name(), cfg.to_toml()),
        artifacts: Vec::new(),
    };
    match cfg.command {
        Command::Generate => geometry::generate(&mut run),
        Command::Residuals => geometry::residuals(&mut run),
        Command::Dual => geometry::dual(&mut run),
        Command::Entropy => entropy::entropy(&mut run),
        Command::Convergence => entropy::convergence(&mut run),
        Command::Wente => wente::wente(&mut run),
        Command::Riesz => wente::riesz(&mut run),
        Command::Defect => defect::defect(&mut run),
    }
    let Run { report, artifacts, .. } = run;
    Ok(RunOutput { report, artifacts })
}
