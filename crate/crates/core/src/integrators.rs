//! Lie-Trotter and Strang compositions of the exact sub-flows, on either
//! time grid, and the stepping driver.
//!
//! The unknown is the transformed field on the `y`-grid: `κ_ε` in the
//! logarithmic case, `v` in the power case. The nonlinear sub-step over
//! `[s_n, s_{n+1}]` is a pointwise phase rotation whose coefficient depends
//! only on `n`, so the driver tabulates those coefficients once per run.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::flows::{log_phase_in_place, log_phase_integral, power_phase_in_place, sech_power_integral, CutoffSpec};
use crate::grid::{h1_from_coeffs, SpatialGrid, SpectralField};
use crate::record::{BlowUpEvent, ExperimentRecord, Observable, SeriesRow, Snapshot};
use crate::transforms::{reconstruct_u, GaugeMode, Nonlinearity, PhysParams, TimeGrids};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitting {
    /// `Φ_A^{δ_n} ∘ Φ_B^{δ_n}`
    Lie,
    /// `Φ_A^{δ_n/2} ∘ Φ_B^{δ_n} ∘ Φ_A^{δ_n/2}`
    Strang,
}

impl Splitting {
    pub fn label(&self) -> &'static str {
        match self {
            Splitting::Lie => "Lie",
            Splitting::Strang => "Strang",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub params: PhysParams,
    pub grids: TimeGrids,
    /// The `y`-grid carrying the transformed unknown.
    pub spatial: Arc<SpatialGrid>,
    pub splitting: Splitting,
    /// Applied with every linear sub-step when set.
    pub cutoff: Option<CutoffSpec>,
    pub observers: Vec<Observable>,
    /// Record observables every `observe_every` steps (and at the last step).
    pub observe_every: usize,
    /// Physical grid for reconstructed snapshots and error measurement;
    /// defaults to `spatial`.
    pub xgrid: Option<Arc<SpatialGrid>>,
    /// Simpson panels per step for the gauge table.
    pub gauge_subpanels: usize,
    /// Minimum Simpson panels per step for `∫ sech^σ`.
    pub sech_subpanels: usize,
    /// Abort once `‖∂_y field‖` exceeds this multiple of its initial value.
    pub blowup_factor: Option<f64>,
}

impl SolverConfig {
    pub fn new(params: PhysParams, grids: TimeGrids, spatial: Arc<SpatialGrid>, splitting: Splitting) -> Self {
        let blowup_factor = match params.nonlinearity {
            Nonlinearity::Power { .. } if params.lambda < 0.0 => Some(1e3),
            _ => None,
        };
        Self {
            params,
            grids,
            spatial,
            splitting,
            cutoff: None,
            observers: Vec::new(),
            observe_every: 1,
            xgrid: None,
            gauge_subpanels: 20,
            sech_subpanels: 20,
            blowup_factor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validated()?;
        if (self.grids.omega - self.params.omega).abs() > 0.0 {
            return Err(Error::InvalidParams(format!(
                "time grids built for omega = {}, equation has omega = {}",
                self.grids.omega, self.params.omega
            )));
        }
        if let Nonlinearity::Logarithmic { epsilon } = self.params.nonlinearity {
            if !(epsilon > 0.0) {
                return Err(Error::InvalidParams("the logarithmic flow needs epsilon > 0".into()));
            }
        }
        let limit = self.params.s_limit();
        if let Some(&s_end) = self.grids.s.last() {
            if !(s_end < limit) {
                return Err(Error::TransformDomain { s: s_end, limit });
            }
        }
        if self.observe_every == 0 {
            return Err(Error::InvalidParams("observe_every must be at least 1".into()));
        }
        Ok(())
    }

    fn xgrid(&self) -> &Arc<SpatialGrid> {
        self.xgrid.as_ref().unwrap_or(&self.spatial)
    }
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub n: usize,
    pub s_n: f64,
    pub t_n: f64,
    pub field: SpectralField,
}

impl SolverState {
    pub fn initial(u0: SpectralField) -> Self {
        Self { n: 0, s_n: 0.0, t_n: 0.0, field: u0 }
    }
}

/// Pointwise phase coefficient of the nonlinear sub-step.
#[derive(Debug, Clone, Copy)]
enum PhaseKind {
    Log { epsilon: f64 },
    Power { sigma: f64 },
}

fn phase_kind(params: &PhysParams) -> PhaseKind {
    match params.nonlinearity {
        Nonlinearity::Logarithmic { epsilon } => PhaseKind::Log { epsilon },
        Nonlinearity::Power { sigma } => PhaseKind::Power { sigma },
    }
}

fn apply_phase(values: &mut [Complex64], kind: PhaseKind, coef: f64) {
    if coef == 0.0 {
        return;
    }
    match kind {
        PhaseKind::Log { epsilon } => log_phase_in_place(values, coef, epsilon),
        PhaseKind::Power { sigma } => power_phase_in_place(values, coef, sigma),
    }
}

/// Phase coefficient for step `n`: `-2λ ∫ dp/(1-ω²p²)` or `-λ ∫ sech^σ`.
fn step_coefficient(params: &PhysParams, grids: &TimeGrids, n: usize, sech_panels: usize) -> Result<f64> {
    Ok(match params.nonlinearity {
        Nonlinearity::Logarithmic { .. } => {
            -2.0 * params.lambda * log_phase_integral(grids.s[n], grids.delta[n], params.omega)?
        }
        Nonlinearity::Power { sigma } => {
            -params.lambda * sech_power_integral(grids.t[n], grids.t[n + 1], params.omega, sigma, sech_panels)
        }
    })
}

/// FFT buffers and the cached free-flow multiplier.
struct LinearWorkspace {
    grid: Arc<SpatialGrid>,
    scratch: Vec<Complex64>,
    xi2: Vec<f64>,
    cutoff: Option<Vec<f64>>,
    multiplier: Vec<Complex64>,
    cached: Option<f64>,
}

impl LinearWorkspace {
    fn new(grid: &Arc<SpatialGrid>, cutoff: Option<&CutoffSpec>) -> Self {
        let m = grid.len();
        Self {
            grid: Arc::clone(grid),
            scratch: vec![Complex64::new(0.0, 0.0); grid.scratch_len()],
            xi2: grid.wavenumbers().iter().map(|xi| xi * xi).collect(),
            cutoff: cutoff.map(|c| grid.wavenumbers().iter().map(|&xi| c.symbol(xi)).collect()),
            multiplier: vec![Complex64::new(0.0, 0.0); m],
            cached: None,
        }
    }

    /// Applies `Φ_A^s` (and the cut-off) in place; returns `‖∂ result‖`.
    fn apply(&mut self, values: &mut [Complex64], s: f64) -> f64 {
        if self.cached != Some(s) {
            let scale = 1.0 / self.grid.len() as f64;
            for (k, (m, &x2)) in self.multiplier.iter_mut().zip(&self.xi2).enumerate() {
                let amp = self.cutoff.as_ref().map_or(1.0, |c| c[k]) * scale;
                *m = Complex64::from_polar(amp, -0.5 * s * x2);
            }
            self.cached = Some(s);
        }
        self.grid.forward(values, &mut self.scratch);
        for (v, m) in values.iter_mut().zip(&self.multiplier) {
            *v *= m;
        }
        let h1 = h1_from_coeffs(values, self.grid.wavenumbers(), self.grid.length());
        self.grid.inverse(values, &mut self.scratch);
        h1
    }
}

fn compose(
    ws: &mut LinearWorkspace,
    values: &mut [Complex64],
    splitting: Splitting,
    delta: f64,
    kind: PhaseKind,
    coef: f64,
) -> f64 {
    match splitting {
        Splitting::Lie => {
            apply_phase(values, kind, coef);
            ws.apply(values, delta)
        }
        Splitting::Strang => {
            ws.apply(values, 0.5 * delta);
            apply_phase(values, kind, coef);
            ws.apply(values, 0.5 * delta)
        }
    }
}

fn single_step(state: &SolverState, cfg: &SolverConfig, splitting: Splitting) -> Result<SolverState> {
    cfg.validate()?;
    let n = state.n;
    if n >= cfg.grids.steps {
        return Err(Error::InvalidParams(format!("step index {n} is past the last step {}", cfg.grids.steps)));
    }
    let coef = step_coefficient(&cfg.params, &cfg.grids, n, cfg.sech_subpanels)?;
    let mut ws = LinearWorkspace::new(&cfg.spatial, cfg.cutoff.as_ref());
    let mut field = state.field.clone();
    compose(&mut ws, field.values_mut(), splitting, cfg.grids.delta[n], phase_kind(&cfg.params), coef);
    if !field.is_finite() {
        return Err(Error::NonFinite { step: n + 1, t: cfg.grids.t[n + 1] });
    }
    Ok(SolverState { n: n + 1, s_n: cfg.grids.s[n + 1], t_n: cfg.grids.t[n + 1], field })
}

/// One Lie-Trotter step from `state.n` to `state.n + 1`.
pub fn step_lie(state: &SolverState, cfg: &SolverConfig) -> Result<SolverState> {
    single_step(state, cfg, Splitting::Lie)
}

/// One Strang step from `state.n` to `state.n + 1`.
pub fn step_strang(state: &SolverState, cfg: &SolverConfig) -> Result<SolverState> {
    single_step(state, cfg, Splitting::Strang)
}

/// Result of [`run`]. A detected blow-up stops the run early; `record` then
/// holds everything observed up to the abort.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: SolverState,
    pub record: ExperimentRecord,
    pub blowup: Option<BlowUpEvent>,
}

/// Reference solution `t ↦ u(t, ·)` on the physical grid.
pub type Reference<'a> = &'a (dyn Fn(f64) -> Result<SpectralField> + Sync);

pub fn run(cfg: &SolverConfig, u0: SpectralField, snapshot_times: &[f64]) -> Result<RunOutput> {
    run_with_reference(cfg, u0, snapshot_times, None)
}

/// Precomputed per-run tables plus the linear workspace.
pub struct SplitStepper {
    splitting: Splitting,
    kind: PhaseKind,
    coefficients: Vec<f64>,
    deltas: Vec<f64>,
    ws: LinearWorkspace,
}

impl SplitStepper {
    pub fn new(cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let coefficients = (0..cfg.grids.steps)
            .map(|n| step_coefficient(&cfg.params, &cfg.grids, n, cfg.sech_subpanels))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            splitting: cfg.splitting,
            kind: phase_kind(&cfg.params),
            coefficients,
            deltas: cfg.grids.delta.clone(),
            ws: LinearWorkspace::new(&cfg.spatial, cfg.cutoff.as_ref()),
        })
    }

    /// Advances `values` by step `n`; returns `‖∂ result‖`.
    pub fn advance(&mut self, values: &mut [Complex64], n: usize) -> f64 {
        compose(&mut self.ws, values, self.splitting, self.deltas[n], self.kind, self.coefficients[n])
    }
}

pub fn run_with_reference(
    cfg: &SolverConfig,
    u0: SpectralField,
    snapshot_times: &[f64],
    reference: Option<Reference<'_>>,
) -> Result<RunOutput> {
    cfg.validate()?;
    if !u0.grid().same_as(&cfg.spatial) {
        return Err(Error::InvalidGrid("initial data is not on the solver grid".into()));
    }
    if !u0.is_finite() {
        return Err(Error::NonFinite { step: 0, t: 0.0 });
    }
    if cfg.observers.contains(&Observable::Error) && reference.is_none() {
        return Err(Error::InvalidParams("error observable requested without a reference solution".into()));
    }
    let grids = &cfg.grids;
    let n_steps = grids.steps;
    let tol = 1e-9 * grids.final_time.max(1.0);
    let mut snapshot_steps = Vec::with_capacity(snapshot_times.len());
    for &ts in snapshot_times {
        let idx = grids
            .t
            .iter()
            .position(|&t| (t - ts).abs() <= tol)
            .ok_or_else(|| Error::InvalidParams(format!("snapshot time {ts} is not a grid time")))?;
        snapshot_steps.push(idx);
    }

    let gauge = if cfg.params.is_logarithmic() { Some(grids.gauge_table(cfg.gauge_subpanels)) } else { None };
    let mut stepper = SplitStepper::new(cfg)?;
    let mut record = ExperimentRecord::default();
    let mut state = SolverState::initial(u0);
    let initial_h1 = state.field.h1_seminorm();
    let threshold = cfg.blowup_factor.map(|f| f * initial_h1.max(f64::MIN_POSITIVE));

    let observe = |state: &SolverState, h1: f64, record: &mut ExperimentRecord| -> Result<()> {
        let n = state.n;
        if !cfg.observers.is_empty() && (n.is_multiple_of(cfg.observe_every) || n == n_steps) {
            for obs in &cfg.observers {
                let value = match obs {
                    Observable::Mass => state.field.l2_norm(),
                    Observable::H1Seminorm => h1,
                    Observable::WeightedL2 => state.field.norms().weighted_l2,
                    Observable::Error => {
                        let u = reconstruct_state(cfg, state, gauge.as_deref())?;
                        let exact = (reference.expect("checked above"))(state.t_n)?;
                        u.l2_distance(&exact)?
                    }
                };
                record.series.push(SeriesRow { step: n, t: state.t_n, s: state.s_n, observable: *obs, value });
            }
        }
        for _ in snapshot_steps.iter().filter(|&&k| k == n) {
            let u = reconstruct_state(cfg, state, gauge.as_deref())?;
            record.snapshots_u.push(Snapshot::new(state.t_n, u));
            record.snapshots_field.push(Snapshot::new(state.s_n, state.field.clone()));
        }
        Ok(())
    };

    observe(&state, initial_h1, &mut record)?;
    let mut blowup = None;
    while state.n < n_steps {
        let n = state.n;
        let h1 = stepper.advance(state.field.values_mut(), n);
        state.n = n + 1;
        state.t_n = grids.t[n + 1];
        state.s_n = grids.s[n + 1];
        if !h1.is_finite() || !state.field.is_finite() {
            return Err(Error::NonFinite { step: n + 1, t: state.t_n });
        }
        if let Some(limit) = threshold {
            if h1 > limit {
                let event = BlowUpEvent {
                    step: n + 1,
                    t_lo: grids.t[n],
                    t_hi: grids.t[n + 1],
                    s_lo: grids.s[n],
                    s_hi: grids.s[n + 1],
                    grad_norm: h1,
                    threshold: limit,
                };
                if cfg.observers.contains(&Observable::H1Seminorm) {
                    record.series.push(SeriesRow {
                        step: n + 1,
                        t: state.t_n,
                        s: state.s_n,
                        observable: Observable::H1Seminorm,
                        value: h1,
                    });
                }
                blowup = Some(event);
                break;
            }
        }
        observe(&state, h1, &mut record)?;
    }
    record.blowup = blowup;
    Ok(RunOutput { final_state: state, record, blowup })
}

/// `u(t_n, ·)` on the configured physical grid.
pub fn reconstruct_state(
    cfg: &SolverConfig,
    state: &SolverState,
    gauge_table: Option<&[f64]>,
) -> Result<SpectralField> {
    let gauge = match (cfg.params.nonlinearity, gauge_table) {
        (Nonlinearity::Power { .. }, _) => GaugeMode::Omit,
        (Nonlinearity::Logarithmic { .. }, Some(table)) => GaugeMode::Tabulated(table[state.n]),
        (Nonlinearity::Logarithmic { .. }, None) => GaugeMode::Compute,
    };
    reconstruct_u(&state.field, state.t_n, &cfg.params, gauge, cfg.xgrid())
}
