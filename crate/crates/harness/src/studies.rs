//! Simulation, convergence and error-growth studies built on the solver.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use lenssplit::gaussian::{exact_field, GaussianPropagator, GaussianState};
use lenssplit::integrators::{reconstruct_state, SplitStepper};
use lenssplit::{
    run_with_reference, Observable, RunOutput, SolverConfig, SolverState, SpatialGrid, SpectralField, Splitting,
    TimeGridKind,
};

use crate::config::{LoadedConfig, ReferenceKind};
use crate::fit::{fit_order, linear_fit, LinearFit, OrderFit};
use crate::HarnessError;

/// Applies `f` to every item on up to `workers` threads; results keep the
/// input order.
pub fn parallel_map<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every item processed")).collect()
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Exact Gaussian solution sampled on a physical grid. Requests must be
/// non-decreasing in time for efficiency; earlier times restart the ODE.
pub struct GaussianReference {
    init: GaussianState,
    lambda: f64,
    omega: f64,
    dt: f64,
    grid: Arc<SpatialGrid>,
    prop: Mutex<GaussianPropagator>,
}

impl GaussianReference {
    pub fn new(
        init: GaussianState,
        lambda: f64,
        omega: f64,
        dt: f64,
        grid: Arc<SpatialGrid>,
    ) -> Result<Self, HarnessError> {
        let prop = GaussianPropagator::new(init, lambda, omega)?;
        Ok(Self { init, lambda, omega, dt, grid, prop: Mutex::new(prop) })
    }

    pub fn at(&self, t: f64) -> lenssplit::Result<SpectralField> {
        let mut prop = self.prop.lock().expect("reference lock");
        if t < prop.time() {
            *prop = GaussianPropagator::new(self.init, self.lambda, self.omega)?;
        }
        let state = prop.advance_to(t, self.dt)?;
        Ok(exact_field(&state, &self.grid))
    }
}

fn gaussian_reference(c: &LoadedConfig, cfg: &SolverConfig) -> Result<GaussianReference, HarnessError> {
    let tau = cfg.grids.tau();
    let dt = c.config.output.reference_dt.unwrap_or(if tau > 0.0 { tau / 10.0 } else { 1e-4 });
    let xgrid = cfg.xgrid.clone().unwrap_or_else(|| Arc::clone(&cfg.spatial));
    GaussianReference::new(c.gaussian_state()?, cfg.params.lambda, cfg.params.omega, dt, xgrid)
}

/// Grid indices of the requested snapshots: each listed time snapped to the
/// nearest grid time, then `snapshot_count` indices evenly spaced in `n`.
fn snapshot_indices(c: &LoadedConfig, cfg: &SolverConfig) -> Vec<usize> {
    let t = &cfg.grids.t;
    let n_steps = cfg.grids.steps;
    let mut idx: Vec<usize> = c
        .config
        .output
        .snapshot_times
        .iter()
        .map(|&ts| {
            let k = t.partition_point(|&x| x < ts).min(n_steps);
            if k > 0 && (ts - t[k - 1]).abs() <= (t[k] - ts).abs() {
                k - 1
            } else {
                k
            }
        })
        .collect();
    let count = c.config.output.snapshot_count;
    if count == 1 {
        idx.push(n_steps);
    } else if count > 1 {
        idx.extend((0..count).map(|k| ((k * n_steps) as f64 / (count - 1) as f64).round() as usize));
    }
    idx.sort_unstable();
    idx.dedup();
    idx
}

pub struct Simulation {
    pub cfg: SolverConfig,
    pub output: RunOutput,
}

pub fn simulate(c: &LoadedConfig) -> Result<Simulation, HarnessError> {
    let cfg = c.solver_config(c.steps()?, c.time_grid_kind()?)?;
    let u0 = c.initial_field(&cfg.spatial)?;
    let snapshot_times: Vec<f64> = snapshot_indices(c, &cfg).into_iter().map(|k| cfg.grids.t[k]).collect();
    let wants_error = cfg.observers.contains(&Observable::Error);
    let output = match c.config.output.reference {
        ReferenceKind::Gaussian => {
            let reference = gaussian_reference(c, &cfg)?;
            let f = |t: f64| reference.at(t);
            run_with_reference(&cfg, u0, &snapshot_times, Some(&f))?
        }
        ReferenceKind::SelfRefined if wants_error => {
            return Err(HarnessError::Config(format!(
                "{}: the self reference is only available to the convergence study",
                c.origin
            )))
        }
        ReferenceKind::None if wants_error => {
            return Err(HarnessError::Config(format!("{}: observable \"error\" needs [output] reference", c.origin)))
        }
        _ => run_with_reference(&cfg, u0, &snapshot_times, None)?,
    };
    Ok(Simulation { cfg, output })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub splitting: Splitting,
    pub grid: TimeGridKind,
    pub steps: usize,
    /// `T/N`.
    pub tau: f64,
    /// Largest step in the transformed time.
    pub delta_max: f64,
    /// `‖u^N - u(T)‖_{L²}`; NaN when the run stopped at a blow-up.
    pub error: f64,
    pub blowup: bool,
}

#[derive(Debug, Clone)]
pub struct Convergence {
    pub rows: Vec<ConvergenceRow>,
    pub fit: Result<OrderFit, String>,
    pub reference: ReferenceKind,
    /// Step count of the self reference.
    pub reference_steps: Option<usize>,
}

fn final_field(cfg: &SolverConfig, u0: &SpectralField) -> Result<(SpectralField, bool), HarnessError> {
    let out = run_with_reference(cfg, u0.clone(), &[], None)?;
    let u = reconstruct_state(cfg, &out.final_state, None)?;
    Ok((u, out.blowup.is_some()))
}

fn quiet(mut cfg: SolverConfig) -> SolverConfig {
    cfg.observers.clear();
    cfg
}

/// Error at the final time for every `[study] steps` entry, with a
/// least-squares order fit over all rows.
pub fn convergence(c: &LoadedConfig, workers: usize) -> Result<Convergence, HarnessError> {
    let steps = c.study_steps()?;
    let kind = c.time_grid_kind()?;
    let max_steps = *steps.iter().max().expect("non-empty");
    let probe = quiet(c.solver_config(max_steps, kind)?);
    let u0 = c.initial_field(&probe.spatial)?;
    let final_time = c.final_time()?;
    let (reference, reference_steps) = match c.config.output.reference {
        ReferenceKind::Gaussian => (gaussian_reference(c, &probe)?.at(final_time)?, None),
        ReferenceKind::SelfRefined => {
            let n_ref = max_steps * c.config.study.reference_factor;
            let cfg = quiet(c.reference_config(n_ref, kind)?);
            let (u, blowup) = final_field(&cfg, &u0)?;
            if blowup {
                return Err(HarnessError::Numerical("the reference run stopped at a blow-up".into()));
            }
            (u, Some(n_ref))
        }
        ReferenceKind::None => {
            return Err(HarnessError::Config(format!("{}: a convergence study needs [output] reference", c.origin)))
        }
    };
    let rows = parallel_map(&steps, workers, |&n| -> Result<ConvergenceRow, HarnessError> {
        let cfg = quiet(c.solver_config(n, kind)?);
        let (u, blowup) = final_field(&cfg, &u0)?;
        let error = if blowup { f64::NAN } else { u.l2_distance(&reference)? };
        Ok(ConvergenceRow {
            splitting: cfg.splitting,
            grid: kind,
            steps: n,
            tau: if n == 0 { f64::NAN } else { final_time / n as f64 },
            delta_max: cfg.grids.delta.iter().copied().fold(0.0, f64::max),
            error,
            blowup,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let taus: Vec<f64> = rows.iter().map(|r| r.tau).collect();
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let fit = fit_order(&taus, &errors).map_err(|e| e.to_string());
    Ok(Convergence { rows, fit, reference: c.config.output.reference, reference_steps })
}

#[derive(Debug, Clone)]
pub struct GrowthSeries {
    pub grid: TimeGridKind,
    pub splitting: Splitting,
    pub steps: usize,
    /// `(n, t_n, ‖u^n - u(t_n)‖)`.
    pub samples: Vec<(usize, f64, f64)>,
    /// `error ≈ a t + b`.
    pub linear: Option<LinearFit>,
    /// `ln error ≈ a t + b`, over samples after step 0 with positive error.
    pub exponential: Option<LinearFit>,
}

/// Steps whose times first reach `k T / samples`, `k = 1..=samples`, plus 0.
fn sample_steps(t: &[f64], samples: usize) -> Vec<usize> {
    let n_steps = t.len() - 1;
    let final_time = t[n_steps];
    let mut out = vec![0];
    for k in 1..=samples {
        let target = final_time * k as f64 / samples as f64;
        let idx = t.partition_point(|&x| x < target * (1.0 - 1e-12)).min(n_steps);
        out.push(idx);
    }
    out.dedup();
    out
}

/// Error history on each configured time grid at the first `[study] steps`
/// entry, against the Gaussian reference.
pub fn error_growth(c: &LoadedConfig, workers: usize) -> Result<Vec<GrowthSeries>, HarnessError> {
    if c.config.output.reference != ReferenceKind::Gaussian {
        return Err(HarnessError::Config(format!(
            "{}: the error-growth study needs reference = \"gaussian\"",
            c.origin
        )));
    }
    let steps = c.study_steps()?[0];
    if steps == 0 {
        return Err(HarnessError::Config(format!("{}: [study] steps must be positive", c.origin)));
    }
    let grids = c.study_grids();
    let samples = c.config.study.samples.max(2);
    parallel_map(&grids, workers, |&kind| -> Result<GrowthSeries, HarnessError> {
        let cfg = quiet(c.solver_config(steps, kind)?);
        let reference = gaussian_reference(c, &cfg)?;
        let u0 = c.initial_field(&cfg.spatial)?;
        let wanted = sample_steps(&cfg.grids.t, samples);
        let mut stepper = SplitStepper::new(&cfg)?;
        let mut state = SolverState::initial(u0);
        let mut out = Vec::with_capacity(wanted.len());
        let mut next = 0;
        loop {
            if next < wanted.len() && wanted[next] == state.n {
                if !state.field.is_finite() {
                    return Err(lenssplit::Error::NonFinite { step: state.n, t: state.t_n }.into());
                }
                let u = reconstruct_state(&cfg, &state, None)?;
                let err = u.l2_distance(&reference.at(state.t_n)?)?;
                out.push((state.n, state.t_n, err));
                next += 1;
            }
            if state.n == steps {
                break;
            }
            let n = state.n;
            stepper.advance(state.field.values_mut(), n);
            state.n = n + 1;
            state.t_n = cfg.grids.t[n + 1];
            state.s_n = cfg.grids.s[n + 1];
        }
        let ts: Vec<f64> = out.iter().map(|r| r.1).collect();
        let es: Vec<f64> = out.iter().map(|r| r.2).collect();
        // the initial data are exact: step 0 carries only round-off
        let positive: Vec<(f64, f64)> = out.iter().filter(|r| r.0 > 0 && r.2 > 0.0).map(|r| (r.1, r.2.ln())).collect();
        let (pt, pe): (Vec<f64>, Vec<f64>) = positive.into_iter().unzip();
        Ok(GrowthSeries {
            grid: kind,
            splitting: cfg.splitting,
            steps,
            linear: linear_fit(&ts, &es),
            exponential: linear_fit(&pt, &pe),
            samples: out,
        })
    })
    .into_iter()
    .collect()
}
