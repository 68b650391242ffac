//! TOML experiment configuration.
//!
//! ```toml
//! [meta]
//! name = "example1-strangI"
//! reproduces = "Example 1: solitary wave, Strang splitting, grid I"
//!
//! [equation]
//! nonlinearity = "logarithmic"   # or "power"
//! lambda = -3.0
//! omega = 2.0
//! epsilon = 1e-15                # logarithmic only
//! # sigma = 3.0                  # power only
//!
//! [initial]
//! profile = "gaussian"           # gaussian | sech | sech-sin | gaussian-sum
//! amplitude = 2.0
//! alpha = 0.7639320225002102
//!
//! [grid]
//! a = -10.0
//! b = 10.0
//! h = 0.001953125                # or points = 10240
//!
//! [time]
//! final_time = 2.5
//! steps = 10000                  # or tau = 0.00025
//! grid = "I"                     # I: uniform in t, II: uniform in s
//!
//! [scheme]
//! splitting = "strang"           # or "lie"
//!
//! [output]
//! observables = ["mass", "h1", "error"]
//! reference = "gaussian"         # none | gaussian | self
//! ```
//!
//! Every section rejects unknown keys. See the README for the full key list.

use std::path::Path;
use std::sync::Arc;

use lenssplit::flows::CutoffSpec;
use lenssplit::gaussian::{GaussianState, PortraitBox};
use lenssplit::{
    Complex64, Observable, PhysParams, SolverConfig, SpatialGrid, SpectralField, Splitting, TimeGridKind, TimeGrids,
};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub meta: MetaSection,
    pub equation: EquationSection,
    pub initial: Option<InitialSection>,
    pub grid: Option<GridSection>,
    pub time: Option<TimeSection>,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub study: StudySection,
    pub portrait: Option<PortraitSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MetaSection {
    #[serde(default)]
    pub name: String,
    /// Which numerical example the configuration reproduces.
    #[serde(default)]
    pub reproduces: String,
    #[serde(default)]
    pub notes: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearityKind {
    Logarithmic,
    Power,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSection {
    pub nonlinearity: NonlinearityKind,
    pub lambda: f64,
    pub omega: f64,
    pub epsilon: Option<f64>,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `A e^{-(α - iβ)x²/2}`
    Gaussian,
    /// `A sech(x²/2)`
    Sech,
    /// `A sech(x²/2) sin x`
    SechSin,
    /// `Σ A_k e^{-(x - c_k)²/w_k}`
    GaussianSum,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianComponent {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub profile: Profile,
    #[serde(default = "one")]
    pub amplitude: f64,
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub components: Vec<GaussianComponent>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub a: f64,
    pub b: f64,
    pub h: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub final_time: f64,
    pub steps: Option<usize>,
    pub tau: Option<f64>,
    #[serde(default = "grid_one")]
    pub grid: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplittingKind {
    Lie,
    #[default]
    Strang,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default)]
    pub splitting: SplittingKind,
    #[serde(default)]
    pub cutoff: bool,
    /// Cut-off scale; defaults to `T/N`.
    pub cutoff_tau: Option<f64>,
    #[serde(default = "twenty")]
    pub gauge_subpanels: usize,
    #[serde(default = "twenty")]
    pub sech_subpanels: usize,
    /// Forces the gradient monitor on or off; by default it runs for
    /// focusing power nonlinearities only.
    pub blowup_monitor: Option<bool>,
    #[serde(default = "thousand")]
    pub blowup_factor: f64,
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            splitting: SplittingKind::Strang,
            cutoff: false,
            cutoff_tau: None,
            gauge_subpanels: 20,
            sech_subpanels: 20,
            blowup_monitor: None,
            blowup_factor: 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    #[default]
    None,
    /// Exact Gaussian dynamics (logarithmic equation, Gaussian data).
    Gaussian,
    /// A run with `reference_factor` times more steps.
    #[serde(rename = "self")]
    SelfRefined,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_observables")]
    pub observables: Vec<String>,
    #[serde(default = "one_usize")]
    pub observe_every: usize,
    /// Snapped to the nearest grid time.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Evenly spaced snapshots in step index, including both ends.
    #[serde(default)]
    pub snapshot_count: usize,
    /// Write every `snapshot_stride`-th spatial point of a snapshot.
    #[serde(default = "one_usize")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub reference: ReferenceKind,
    /// RK4 step of the Gaussian reference; defaults to `τ/10`.
    pub reference_dt: Option<f64>,
    /// Physical grid for reconstructed fields; defaults to the solver grid.
    pub x_a: Option<f64>,
    pub x_b: Option<f64>,
    pub x_points: Option<usize>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            observables: default_observables(),
            observe_every: 1,
            snapshot_times: Vec::new(),
            snapshot_count: 0,
            snapshot_stride: 1,
            reference: ReferenceKind::None,
            reference_dt: None,
            x_a: None,
            x_b: None,
            x_points: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    /// Step counts of a convergence study; the error-growth study uses the first.
    #[serde(default)]
    pub steps: Vec<usize>,
    #[serde(default = "eight")]
    pub reference_factor: usize,
    /// Splitting of the self reference; defaults to the scheme's.
    pub reference_splitting: Option<SplittingKind>,
    /// Whether the self reference applies the cut-off; defaults to the scheme's.
    pub reference_cutoff: Option<bool>,
    /// Time grids compared by the error-growth study.
    #[serde(default = "both_grids")]
    pub grids: Vec<String>,
    /// Error samples per error-growth series, spaced uniformly in `t`.
    #[serde(default = "hundred")]
    pub samples: usize,
    pub workers: Option<usize>,
}

impl Default for StudySection {
    fn default() -> Self {
        Self {
            steps: Vec::new(),
            reference_factor: 8,
            reference_splitting: None,
            reference_cutoff: None,
            grids: both_grids(),
            samples: 100,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PortraitSection {
    pub mu_min: f64,
    pub mu_max: f64,
    pub mudot_min: f64,
    pub mudot_max: f64,
    #[serde(default = "sixteen")]
    pub trajectories: usize,
    #[serde(default = "four_hundred")]
    pub samples: usize,
    /// Explicit `[μ, μ̇]` seeds; replace the default seeds when present.
    #[serde(default)]
    pub seeds: Vec<[f64; 2]>,
}

fn one() -> f64 {
    1.0
}
fn thousand() -> f64 {
    1e3
}
fn one_usize() -> usize {
    1
}
fn eight() -> usize {
    8
}
fn sixteen() -> usize {
    16
}
fn twenty() -> usize {
    20
}
fn hundred() -> usize {
    100
}
fn four_hundred() -> usize {
    400
}
fn grid_one() -> String {
    "I".into()
}
fn both_grids() -> Vec<String> {
    vec!["I".into(), "II".into()]
}
fn default_observables() -> Vec<String> {
    vec!["mass".into(), "h1".into()]
}

/// A parsed configuration together with its source text, kept for error
/// locations and the run manifest.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub source: String,
    pub origin: String,
}

impl LoadedConfig {
    pub fn parse(source: &str, origin: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig =
            toml::from_str(source).map_err(|e| HarnessError::Config(format!("{origin}: {e}")))?;
        let loaded = Self { config, source: source.to_string(), origin: origin.to_string() };
        loaded.check()?;
        Ok(loaded)
    }

    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&source, &path.display().to_string())
    }

    pub fn name(&self) -> &str {
        &self.config.meta.name
    }

    /// Error pointing at `section.key` in the source.
    fn invalid(&self, section: &str, key: &str, msg: impl std::fmt::Display) -> HarnessError {
        match locate(&self.source, section, key) {
            Some(line) => HarnessError::Config(format!("{}: line {line}: [{section}] {key}: {msg}", self.origin)),
            None => HarnessError::Config(format!("{}: [{section}] {key}: {msg}", self.origin)),
        }
    }

    fn require<'a, T>(&self, section: &'a Option<T>, name: &str) -> Result<&'a T, HarnessError> {
        section.as_ref().ok_or_else(|| HarnessError::Config(format!("{}: missing [{name}] section", self.origin)))
    }

    /// Consistency checks beyond the schema.
    fn check(&self) -> Result<(), HarnessError> {
        let c = &self.config;
        let eq = &c.equation;
        if !(eq.omega > 0.0) {
            return Err(self.invalid("equation", "omega", "must be positive"));
        }
        if !eq.lambda.is_finite() {
            return Err(self.invalid("equation", "lambda", "must be finite"));
        }
        match eq.nonlinearity {
            NonlinearityKind::Logarithmic => {
                if eq.sigma.is_some() {
                    return Err(self.invalid("equation", "sigma", "only valid for the power nonlinearity"));
                }
                if !(eq.epsilon.unwrap_or(1e-15) > 0.0) {
                    return Err(self.invalid("equation", "epsilon", "must be positive"));
                }
            }
            NonlinearityKind::Power => {
                if eq.epsilon.is_some() {
                    return Err(self.invalid("equation", "epsilon", "only valid for the logarithmic nonlinearity"));
                }
                match eq.sigma {
                    Some(s) if s > 0.0 => {}
                    _ => return Err(self.invalid("equation", "sigma", "the power nonlinearity needs sigma > 0")),
                }
            }
        }
        if let Some(g) = &c.grid {
            if !(g.a < g.b) {
                return Err(self.invalid("grid", "b", format!("domain ({}, {}) is empty", g.a, g.b)));
            }
            match (g.h, g.points) {
                (Some(_), Some(_)) => return Err(self.invalid("grid", "points", "give either h or points, not both")),
                (None, None) => return Err(self.invalid("grid", "h", "give either h or points")),
                _ => {}
            }
        }
        if let Some(t) = &c.time {
            if !(t.final_time >= 0.0) {
                return Err(self.invalid("time", "final_time", "must be non-negative"));
            }
            if (t.final_time * eq.omega).tanh() >= 1.0 {
                return Err(self.invalid(
                    "time",
                    "final_time",
                    "tanh(omega T) rounds to 1; the transformed time leaves its domain",
                ));
            }
            match (t.steps, t.tau) {
                (Some(_), Some(_)) => return Err(self.invalid("time", "tau", "give either steps or tau, not both")),
                (None, None) => return Err(self.invalid("time", "steps", "give either steps or tau")),
                (None, Some(tau)) if !(tau > 0.0) => return Err(self.invalid("time", "tau", "must be positive")),
                _ => {}
            }
            time_grid_kind(&t.grid).ok_or_else(|| self.invalid("time", "grid", "must be \"I\" or \"II\""))?;
        }
        if let Some(init) = &c.initial {
            match init.profile {
                Profile::Gaussian => match init.alpha {
                    Some(a) if a > 0.0 => {}
                    _ => return Err(self.invalid("initial", "alpha", "a Gaussian profile needs alpha > 0")),
                },
                Profile::GaussianSum
                    if init.components.is_empty() || init.components.iter().any(|k| !(k.width > 0.0)) =>
                {
                    return Err(self.invalid(
                        "initial",
                        "components",
                        "need at least one component, each with width > 0",
                    ));
                }
                _ => {}
            }
        }
        for name in &c.output.observables {
            if Observable::from_name(name).is_none() {
                return Err(self.invalid(
                    "output",
                    "observables",
                    format!("unknown observable {name:?} (mass, h1, weighted, error)"),
                ));
            }
        }
        if c.output.snapshot_stride == 0 {
            return Err(self.invalid("output", "snapshot_stride", "must be at least 1"));
        }
        if c.output.observe_every == 0 {
            return Err(self.invalid("output", "observe_every", "must be at least 1"));
        }
        match (c.output.x_a, c.output.x_b, c.output.x_points) {
            (None, None, None) => {}
            (Some(a), Some(b), Some(m)) => {
                if !(a < b) || m < 2 || m % 2 == 1 {
                    return Err(self.invalid(
                        "output",
                        "x_points",
                        "the physical grid needs x_a < x_b and an even point count",
                    ));
                }
            }
            _ => return Err(self.invalid("output", "x_a", "x_a, x_b and x_points go together")),
        }
        if c.output.reference == ReferenceKind::Gaussian {
            let gaussian = c.initial.as_ref().is_some_and(|i| i.profile == Profile::Gaussian);
            if eq.nonlinearity != NonlinearityKind::Logarithmic || !gaussian {
                return Err(self.invalid(
                    "output",
                    "reference",
                    "the Gaussian reference needs the logarithmic equation and Gaussian data",
                ));
            }
        }
        if c.study.reference_factor < 2 {
            return Err(self.invalid("study", "reference_factor", "must be at least 2"));
        }
        for g in &c.study.grids {
            time_grid_kind(g).ok_or_else(|| self.invalid("study", "grids", format!("unknown grid {g:?}")))?;
        }
        if let Some(p) = &c.portrait {
            if !(p.mu_min > 0.0 && p.mu_max > p.mu_min && p.mudot_max > p.mudot_min) {
                return Err(self.invalid("portrait", "mu_min", "need 0 < mu_min < mu_max and mudot_min < mudot_max"));
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<PhysParams, HarnessError> {
        let eq = &self.config.equation;
        let p = match eq.nonlinearity {
            NonlinearityKind::Logarithmic => PhysParams::logarithmic(eq.lambda, eq.omega, eq.epsilon.unwrap_or(1e-15)),
            NonlinearityKind::Power => PhysParams::power(eq.lambda, eq.omega, eq.sigma.unwrap_or(0.0)),
        };
        p.map_err(|e| HarnessError::Config(format!("{}: [equation] {e}", self.origin)))
    }

    pub fn spatial_grid(&self) -> Result<Arc<SpatialGrid>, HarnessError> {
        let g = self.require(&self.config.grid, "grid")?;
        let grid = match (g.h, g.points) {
            (Some(h), None) => SpatialGrid::with_mesh(g.a, g.b, h),
            (None, Some(m)) => SpatialGrid::new(g.a, g.b, m),
            _ => unreachable!("checked on load"),
        };
        grid.map_err(|e| self.invalid("grid", if g.h.is_some() { "h" } else { "points" }, e))
    }

    pub fn xgrid(&self) -> Result<Option<Arc<SpatialGrid>>, HarnessError> {
        let o = &self.config.output;
        match (o.x_a, o.x_b, o.x_points) {
            (Some(a), Some(b), Some(m)) => {
                SpatialGrid::new(a, b, m).map(Some).map_err(|e| self.invalid("output", "x_points", e))
            }
            _ => Ok(None),
        }
    }

    pub fn final_time(&self) -> Result<f64, HarnessError> {
        Ok(self.require(&self.config.time, "time")?.final_time)
    }

    /// Step count from `steps`, or from `tau` when it divides the final time.
    pub fn steps(&self) -> Result<usize, HarnessError> {
        let t = self.require(&self.config.time, "time")?;
        match (t.steps, t.tau) {
            (Some(n), None) => Ok(n),
            (None, Some(tau)) => {
                let n = (t.final_time / tau).round();
                if (n * tau - t.final_time).abs() > 1e-9 * t.final_time.max(1.0) {
                    return Err(self.invalid("time", "tau", format!("does not divide final_time = {}", t.final_time)));
                }
                Ok(n as usize)
            }
            _ => unreachable!("checked on load"),
        }
    }

    pub fn time_grid_kind(&self) -> Result<TimeGridKind, HarnessError> {
        let t = self.require(&self.config.time, "time")?;
        Ok(time_grid_kind(&t.grid).expect("checked on load"))
    }

    pub fn splitting(&self) -> Splitting {
        splitting_of(self.config.scheme.splitting)
    }

    /// Configuration of the self reference of a convergence study.
    pub fn reference_config(&self, steps: usize, kind: TimeGridKind) -> Result<SolverConfig, HarnessError> {
        let mut cfg = self.solver_config(steps, kind)?;
        let study = &self.config.study;
        if let Some(s) = study.reference_splitting {
            cfg.splitting = splitting_of(s);
        }
        if study.reference_cutoff == Some(false) {
            cfg.cutoff = None;
        } else if study.reference_cutoff == Some(true) && cfg.cutoff.is_none() {
            let final_time = self.final_time()?;
            cfg.cutoff = Some(
                CutoffSpec::new(final_time / steps.max(1) as f64)
                    .map_err(|e| self.invalid("study", "reference_cutoff", e))?,
            );
        }
        Ok(cfg)
    }

    pub fn observables(&self) -> Vec<Observable> {
        self.config.output.observables.iter().filter_map(|n| Observable::from_name(n)).collect()
    }

    /// Solver configuration for `steps` steps on the given time grid.
    pub fn solver_config(&self, steps: usize, kind: TimeGridKind) -> Result<SolverConfig, HarnessError> {
        let params = self.params()?;
        let final_time = self.final_time()?;
        let grids =
            TimeGrids::new(final_time, steps, params.omega, kind).map_err(|e| self.invalid("time", "final_time", e))?;
        let scheme = &self.config.scheme;
        let mut cfg = SolverConfig::new(params, grids, self.spatial_grid()?, self.splitting());
        if scheme.cutoff {
            let tau = scheme.cutoff_tau.unwrap_or(if steps == 0 { final_time } else { final_time / steps as f64 });
            cfg.cutoff = Some(CutoffSpec::new(tau).map_err(|e| self.invalid("scheme", "cutoff_tau", e))?);
        }
        cfg.gauge_subpanels = scheme.gauge_subpanels.max(2);
        cfg.sech_subpanels = scheme.sech_subpanels.max(2);
        match scheme.blowup_monitor {
            Some(true) => cfg.blowup_factor = Some(scheme.blowup_factor),
            Some(false) => cfg.blowup_factor = None,
            None => cfg.blowup_factor = cfg.blowup_factor.map(|_| scheme.blowup_factor),
        }
        cfg.observers = self.observables();
        cfg.observe_every = self.config.output.observe_every;
        cfg.xgrid = self.xgrid()?;
        Ok(cfg)
    }

    pub fn initial_field(&self, grid: &Arc<SpatialGrid>) -> Result<SpectralField, HarnessError> {
        let init = self.require(&self.config.initial, "initial")?;
        let a = init.amplitude;
        let field = match init.profile {
            Profile::Gaussian => {
                let w = Complex64::new(init.alpha.expect("checked on load"), -init.beta);
                SpectralField::from_fn(grid, |x| a * (-0.5 * w * x * x).exp())
            }
            Profile::Sech => SpectralField::from_fn(grid, |x| Complex64::new(a / (0.5 * x * x).cosh(), 0.0)),
            Profile::SechSin => {
                SpectralField::from_fn(grid, |x| Complex64::new(a * x.sin() / (0.5 * x * x).cosh(), 0.0))
            }
            Profile::GaussianSum => SpectralField::from_fn(grid, |x| {
                let v: f64 = init
                    .components
                    .iter()
                    .map(|k| k.amplitude * (-(x - k.center) * (x - k.center) / k.width).exp())
                    .sum();
                Complex64::new(v, 0.0)
            }),
        };
        Ok(field)
    }

    /// Oracle state of Gaussian data.
    pub fn gaussian_state(&self) -> Result<GaussianState, HarnessError> {
        let init = self.require(&self.config.initial, "initial")?;
        if init.profile != Profile::Gaussian {
            return Err(self.invalid("initial", "profile", "not a Gaussian profile"));
        }
        GaussianState::from_initial_data(Complex64::new(init.amplitude, 0.0), init.alpha.unwrap_or(0.0), init.beta)
            .map_err(|e| self.invalid("initial", "alpha", e))
    }

    pub fn portrait(&self) -> Result<(PortraitBox, &PortraitSection), HarnessError> {
        let p = self.require(&self.config.portrait, "portrait")?;
        let bx = PortraitBox { mu_min: p.mu_min, mu_max: p.mu_max, mudot_min: p.mudot_min, mudot_max: p.mudot_max };
        Ok((bx, p))
    }

    pub fn study_grids(&self) -> Vec<TimeGridKind> {
        self.config.study.grids.iter().filter_map(|g| time_grid_kind(g)).collect()
    }

    pub fn study_steps(&self) -> Result<Vec<usize>, HarnessError> {
        if self.config.study.steps.is_empty() {
            return Err(self.invalid("study", "steps", "a study needs a list of step counts"));
        }
        Ok(self.config.study.steps.clone())
    }
}

fn splitting_of(kind: SplittingKind) -> Splitting {
    match kind {
        SplittingKind::Lie => Splitting::Lie,
        SplittingKind::Strang => Splitting::Strang,
    }
}

pub fn time_grid_kind(label: &str) -> Option<TimeGridKind> {
    match label {
        "I" | "i" | "uniform-t" => Some(TimeGridKind::UniformT),
        "II" | "ii" | "uniform-s" => Some(TimeGridKind::UniformS),
        _ => None,
    }
}

/// 1-based line of `key = ...` inside `[section]`.
fn locate(source: &str, section: &str, key: &str) -> Option<usize> {
    let header = format!("[{section}]");
    let mut inside = false;
    let mut section_line = None;
    for (i, line) in source.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            inside = t == header;
            if inside {
                section_line = Some(i + 1);
            }
            continue;
        }
        if inside {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    section_line
}
