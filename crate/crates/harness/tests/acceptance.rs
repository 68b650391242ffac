//! Acceptance checks. Prints one `PASS`/`FAIL` line per criterion, with the
//! measured quantities, and exits non-zero if a criterion fails that is not
//! listed in `RECORDED_RED`.
//!
//! Run alone with `cargo test --release -p lenssplit-harness --test acceptance`;
//! `ACCEPTANCE_ONLY=structure,blow-up` selects criteria by id.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use lenssplit::flows::{linear_flow, log_nonlinear_flow, power_nonlinear_flow};
use lenssplit::gaussian::{
    classify, exact_field, first_integral, mu_rhs, GaussianPropagator, GaussianState, OdeParams,
};
use lenssplit::integrators::reconstruct_state;
use lenssplit::transforms::{reconstruct_u, s_of_t, virial_blowup_check, GaugeMode};
use lenssplit::{
    run, Complex64, Observable, PhysParams, SolverConfig, SpatialGrid, SpectralField, Splitting, TimeGridKind,
    TimeGrids,
};
use lenssplit_harness::config::LoadedConfig;
use lenssplit_harness::presets;
use lenssplit_harness::studies::{convergence, default_workers, error_growth, simulate};

// ---- pinned tolerances -------------------------------------------------

const SOLITARY_STEPS: usize = 10_000;
const SOLITARY_MAX_ERROR: f64 = 1e-4;
const LIE_ORDER: (f64, f64) = (0.85, 1.15);
const STRANG_ORDER: (f64, f64) = (1.8, 2.2);
const GROWTH_MIN_CORRELATION: f64 = 0.99;
const VIRIAL_LHS: f64 = -37.60;
const VIRIAL_RHS: f64 = -2.507;
const VIRIAL_REL_TOL: f64 = 0.01;
const BLOWUP_WINDOW: (f64, f64) = (0.022, 0.027);
const STATIONARY_RESIDUAL: f64 = 1e-12;
const ENERGY_DRIFT: f64 = 1e-8;
const PDE_RESIDUAL: f64 = 1e-5;
const MASS_DRIFT: f64 = 1e-10;
const MODULUS_TOL: f64 = 1e-15;
const GROUP_TOL: f64 = 1e-12;
const SCALING_TOL: f64 = 1e-6;
const J_NORM_TOL: f64 = 1e-6;
const TELESCOPE_TOL: f64 = 1e-13;
const OFFGRID_TOL: f64 = 1e-12;
const CUTOFF_MIN_ORDER: f64 = 0.5;
const EPSILON_SPREAD: f64 = 1e-6;

/// Criteria that fail for a documented reason (see the README).
const RECORDED_RED: &[(&str, &str)] =
    &[("convergence-orders", "grid II is pre-asymptotic for N < 20000: its t-steps grow like cosh^2(wt) near T")];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

type Check = fn() -> Result<(bool, String), String>;

fn main() -> ExitCode {
    let checks: Vec<(&'static str, Check)> = vec![
        ("solitary-wave", solitary_wave),
        ("convergence-orders", convergence_orders),
        ("error-growth", error_growth_models),
        ("blow-up", blow_up),
        ("gaussian-oracle", gaussian_oracle),
        ("structure", structure),
        ("rate-consistency", rate_consistency),
    ];
    // ACCEPTANCE_ONLY=id1,id2 restricts the run
    let only: Option<Vec<String>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|v| v.split(',').map(|s| s.trim().to_string()).collect());
    let mut outcomes = Vec::new();
    for (id, check) in checks {
        if only.as_ref().is_some_and(|ids| !ids.iter().any(|x| x == id)) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        let secs = start.elapsed().as_secs_f64();
        let line = Outcome { id, pass, detail: format!("{detail} [{secs:.1} s]") };
        print_line(&line);
        outcomes.push(line);
    }
    let unexpected: Vec<&Outcome> =
        outcomes.iter().filter(|o| !o.pass && !RECORDED_RED.iter().any(|(id, _)| *id == o.id)).collect();
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn print_line(o: &Outcome) {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    let note = match RECORDED_RED.iter().find(|(id, _)| *id == o.id) {
        Some((_, why)) if !o.pass => format!(" (recorded: {why})"),
        _ => String::new(),
    };
    println!("{verdict} {}: {}{note}", o.id, o.detail);
}

fn load(name: &str) -> Result<LoadedConfig, String> {
    presets::load(name).map_err(|e| e.to_string())
}

fn s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn workers() -> usize {
    default_workers()
}

fn within(x: f64, (lo, hi): (f64, f64)) -> bool {
    x >= lo && x <= hi
}

/// Exact Gaussian solution at `t`, by RK4 with step `dt`.
fn gaussian_at(init: GaussianState, lambda: f64, omega: f64, t: f64, dt: f64) -> Result<GaussianState, String> {
    let mut p = GaussianPropagator::new(init, lambda, omega).map_err(s)?;
    p.advance_to(t, dt).map_err(s)
}

fn final_u(cfg: &SolverConfig, u0: SpectralField) -> Result<SpectralField, String> {
    let out = run(cfg, u0, &[]).map_err(s)?;
    reconstruct_state(cfg, &out.final_state, None).map_err(s)
}

// ---- criteria ----------------------------------------------------------

fn solitary_wave() -> Result<(bool, String), String> {
    let mut c = load("example1-strangI")?;
    c.config.study.steps = vec![SOLITARY_STEPS];
    let conv = convergence(&c, 1).map_err(s)?;
    let err = conv.rows[0].error;
    Ok((
        err <= SOLITARY_MAX_ERROR,
        format!("Strang I, N = {SOLITARY_STEPS}: error(T) = {err:.3e} <= {SOLITARY_MAX_ERROR:e}"),
    ))
}

fn convergence_orders() -> Result<(bool, String), String> {
    let mut all = true;
    let mut parts = Vec::new();
    for (name, band) in [
        ("example1-lieI", LIE_ORDER),
        ("example1-lieII", LIE_ORDER),
        ("example1-strangI", STRANG_ORDER),
        ("example1-strangII", STRANG_ORDER),
    ] {
        let c = load(name)?;
        let conv = convergence(&c, workers()).map_err(s)?;
        let errors: Vec<String> = conv.rows.iter().map(|r| format!("{:.3e}", r.error)).collect();
        let label = name.trim_start_matches("example1-");
        match conv.fit {
            Ok(f) => {
                let ok = within(f.order, band);
                all &= ok;
                parts.push(format!(
                    "{label} order {:.3} in [{}, {}] {} (errors {})",
                    f.order,
                    band.0,
                    band.1,
                    if ok { "ok" } else { "out" },
                    errors.join(" ")
                ));
            }
            Err(e) => {
                all = false;
                parts.push(format!("{label} no fit: {e}"));
            }
        }
    }
    Ok((all, format!("N in {{1250..20000}}: {}", parts.join("; "))))
}

fn error_growth_models() -> Result<(bool, String), String> {
    let c = load("example1-error-growth")?;
    let series = error_growth(&c, workers()).map_err(s)?;
    let find = |kind: TimeGridKind| series.iter().find(|g| g.grid == kind).ok_or("missing grid series");
    let g1 = find(TimeGridKind::UniformT)?;
    let g2 = find(TimeGridKind::UniformS)?;
    let lin = g1.linear.as_ref().map(|f| f.correlation).unwrap_or(f64::NAN);
    let exp = g2.exponential.as_ref().map(|f| f.correlation).unwrap_or(f64::NAN);
    let e1 = g1.samples.last().map(|r| r.2).unwrap_or(f64::NAN);
    let e2 = g2.samples.last().map(|r| r.2).unwrap_or(f64::NAN);
    let pass = lin >= GROWTH_MIN_CORRELATION && exp >= GROWTH_MIN_CORRELATION && e1 < e2;
    Ok((
        pass,
        format!(
            "N = 25000: Strang I linear r = {lin:.5}, Strang II log-linear r = {exp:.5} (>= {GROWTH_MIN_CORRELATION}); error(T) I {e1:.3e} < II {e2:.3e}"
        ),
    ))
}

fn blow_up() -> Result<(bool, String), String> {
    let c3 = load("example6-sigma3")?;
    let params = c3.params().map_err(s)?;
    let grid = c3.spatial_grid().map_err(s)?;
    let u0 = c3.initial_field(&grid).map_err(s)?;
    let v = virial_blowup_check(&u0, &params).map_err(s)?;
    let rel = |x: f64, want: f64| ((x - want) / want).abs();
    let virial_ok = v.holds && rel(v.lhs, VIRIAL_LHS) <= VIRIAL_REL_TOL && rel(v.rhs, VIRIAL_RHS) <= VIRIAL_REL_TOL;

    let sim3 = simulate(&c3).map_err(s)?;
    let (detect_ok, detect) = match &sim3.output.blowup {
        Some(e) => (within(e.time(), BLOWUP_WINDOW), format!("flagged in [{:.5}, {:.5}]", e.t_lo, e.t_hi)),
        None => (false, "not flagged".into()),
    };

    let mut c1 = load("example6-sigma1")?;
    c1.config.output.observables = vec!["h1".into()];
    c1.config.output.observe_every = 100;
    c1.config.output.snapshot_count = 0;
    c1.config.output.snapshot_times.clear();
    let sim1 = simulate(&c1).map_err(s)?;
    let t_end = sim1.output.final_state.t_n;
    let sigma1_ok = sim1.output.blowup.is_none() && t_end == sim1.cfg.grids.final_time;

    Ok((
        virial_ok && detect_ok && sigma1_ok,
        format!(
            "virial lhs {:.4} rhs {:.4} holds {} (1% of {VIRIAL_LHS}, {VIRIAL_RHS}); sigma = 3 {detect} within {BLOWUP_WINDOW:?}; sigma = 1 reached t = {t_end} {}",
            v.lhs,
            v.rhs,
            v.holds,
            if sim1.output.blowup.is_none() { "unflagged" } else { "flagged" }
        ),
    ))
}

fn gaussian_oracle() -> Result<(bool, String), String> {
    // stationary widths annihilate the right-hand side
    let mut stat = 0.0f64;
    for (lambda, omega) in [(-3.0, 2.0), (-2.0, 1.0), (-5.0, 0.5), (-2.0, 2.0)] {
        for mu in classify(lambda, omega).map_err(s)?.stationary_points() {
            let p = OdeParams { lambda, omega, c0: 0.0 };
            let scale = 2.0 * lambda.abs() / mu + 1.0 / mu.powi(3) + omega * omega * mu;
            stat = stat.max(mu_rhs(mu, &p).map_err(s)?.abs() / scale);
        }
    }

    // first integral along the periodic orbit of alpha = 2
    let (lambda, omega) = (-3.0, 2.0);
    let init = GaussianState::from_initial_data(Complex64::new(1.0, 0.0), 2.0, 0.0).map_err(s)?;
    let mut p = GaussianPropagator::new(init, lambda, omega).map_err(s)?;
    let f0 = first_integral(init.mu, init.mudot, lambda, omega);
    let dt = 1e-4;
    let mut drift = 0.0f64;
    for k in 1..=50_000 {
        let st = p.advance_to(k as f64 * dt, dt).map_err(s)?;
        drift = drift.max((first_integral(st.mu, st.mudot, lambda, omega) - f0).abs());
    }

    // the sampled Gaussian solves the equation
    let grid = SpatialGrid::new(-10.0, 10.0, 2048).map_err(s)?;
    let t0 = 0.7;
    let ht = 1e-3;
    let at = |t: f64| -> Result<SpectralField, String> {
        Ok(exact_field(&gaussian_at(init, lambda, omega, t, 1e-5)?, &grid))
    };
    let stencil: Vec<SpectralField> = (-2..=2).map(|k| at(t0 + k as f64 * ht)).collect::<Result<_, _>>()?;
    let u = &stencil[2];
    let uxx = u.derivative().derivative();
    let r: Vec<Complex64> = (0..grid.len())
        .map(|j| {
            let v = |k: usize| stencil[k].values()[j];
            let ut = (v(0) - 8.0 * v(1) + 8.0 * v(3) - v(4)) / (12.0 * ht);
            let x = grid.points()[j];
            let uj = u.values()[j];
            let m2 = uj.norm_sqr();
            let log_term = if m2 > 0.0 { uj * (lambda * m2.ln()) } else { Complex64::new(0.0, 0.0) };
            Complex64::i() * ut + 0.5 * uxx.values()[j] + 0.5 * omega * omega * x * x * uj - log_term
        })
        .collect();
    let residual = SpectralField::new(&grid, r).map_err(s)?.l2_norm();

    Ok((
        stat <= STATIONARY_RESIDUAL && drift <= ENERGY_DRIFT && residual <= PDE_RESIDUAL,
        format!(
            "stationary residual {stat:.1e} <= {STATIONARY_RESIDUAL:e}; first-integral drift {drift:.1e} <= {ENERGY_DRIFT:e} over [0, 5]; PDE residual {residual:.1e} <= {PDE_RESIDUAL:e}"
        ),
    ))
}

fn structure() -> Result<(bool, String), String> {
    let mut parts = Vec::new();
    let mut all = true;
    let mut record = |ok: bool, text: String| {
        all &= ok;
        parts.push(text);
    };

    // mass of the transformed unknown over 25000 Strang steps
    let mut c = load("example1-strangI")?;
    let g = c.config.grid.as_mut().ok_or("grid")?;
    g.h = None;
    g.points = Some(1024);
    c.config.output.observables = vec!["mass".into()];
    c.config.output.observe_every = 1;
    let cfg = c.solver_config(25_000, TimeGridKind::UniformT).map_err(s)?;
    let u0 = c.initial_field(&cfg.spatial).map_err(s)?;
    let out = run(&cfg, u0, &[]).map_err(s)?;
    let mass = out.record.series_of(Observable::Mass);
    let m0 = mass.first().map(|r| r.1).ok_or("no mass series")?;
    let drift = mass.iter().map(|r| (r.1 - m0).abs()).fold(0.0, f64::max);
    record(drift <= MASS_DRIFT, format!("mass drift {drift:.1e}"));

    // nonlinear sub-flows rotate each value
    let grid = SpatialGrid::new(-8.0, 8.0, 512).map_err(s)?;
    let z = SpectralField::from_fn(&grid, |x| {
        Complex64::new((1.3 * x).sin() * 0.8, 0.6 * (0.7 * x).cos() * (-0.1 * x * x).exp())
    });
    let log = PhysParams::logarithmic(-3.0, 2.0, 1e-15).map_err(s)?;
    let pow = PhysParams::power(-1.0, 2.0, 3.0).map_err(s)?;
    let z_log = log_nonlinear_flow(&z, 0.1, 0.3, &log).map_err(s)?;
    let z_pow = power_nonlinear_flow(&z, 0.2, 1.1, &pow).map_err(s)?;
    let modulus = [z_log, z_pow]
        .iter()
        .flat_map(|w| w.values().iter().zip(z.values()).map(|(a, b)| (a.norm() - b.norm()).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    record(modulus <= MODULUS_TOL, format!("modulus change {modulus:.1e}"));

    // linear flow is a one-parameter group
    let composed = linear_flow(&linear_flow(&z, 0.13), 0.29);
    let direct = linear_flow(&z, 0.42);
    let group = composed.sup_distance(&direct);
    record(group <= GROUP_TOL, format!("group defect {group:.1e}"));

    // u0 -> 2 u0 maps u to 2 e^{-i lambda t ln 4} u
    let mut c = load("example2-casei")?;
    let g = c.config.grid.as_mut().ok_or("grid")?;
    g.h = None;
    g.points = Some(1024);
    let t = c.config.time.as_mut().ok_or("time")?;
    t.final_time = 1.0;
    t.tau = None;
    t.steps = Some(500);
    let mut cfg = c.solver_config(500, TimeGridKind::UniformT).map_err(s)?;
    cfg.observers.clear();
    let u0 = c.initial_field(&cfg.spatial).map_err(s)?;
    let k = 2.0;
    let u1 = final_u(&cfg, u0.clone())?;
    let uk = final_u(&cfg, u0.scaled(Complex64::new(k, 0.0)))?;
    let phase = Complex64::from_polar(k, -cfg.params.lambda * 1.0 * (k * k).ln());
    let scaling = uk.l2_distance(&u1.scaled(phase)).map_err(s)?;
    record(scaling <= SCALING_TOL, format!("scaling defect {scaling:.1e}"));

    // |(wx sinh + i cosh d/dx) u| = |d/dy v|
    let omega = 2.0;
    let t_end = 0.5;
    let params = PhysParams::power(1.0, omega, 1.0).map_err(s)?;
    let ygrid = SpatialGrid::new(-16.0, 16.0, 2048).map_err(s)?;
    let grids = TimeGrids::new(t_end, 200, omega, TimeGridKind::UniformT).map_err(s)?;
    let cfg = SolverConfig::new(params, grids, Arc::clone(&ygrid), Splitting::Strang);
    let v0 = SpectralField::from_fn(&ygrid, |x| Complex64::new(2.0 * (-x * x).exp(), 0.0));
    let out = run(&cfg, v0, &[]).map_err(s)?;
    let v = out.final_state.field;
    let ch = (omega * t_end).cosh();
    let sh = (omega * t_end).sinh();
    // 3000 points: the targets x/cosh do not align with the y-nodes
    let xgrid = SpatialGrid::new(-16.0 * ch, 16.0 * ch, 3000).map_err(s)?;
    let u = reconstruct_u(&v, t_end, &params, GaugeMode::Omit, &xgrid).map_err(s)?;
    let ux = u.derivative();
    let ju: Vec<Complex64> = (0..xgrid.len())
        .map(|j| omega * xgrid.points()[j] * sh * u.values()[j] + Complex64::i() * ch * ux.values()[j])
        .collect();
    let j_norm = SpectralField::new(&xgrid, ju).map_err(s)?.l2_norm();
    let j_defect = (j_norm - v.h1_seminorm()).abs();
    record(j_defect <= J_NORM_TOL, format!("J-norm defect {j_defect:.1e}"));

    // sum of s-steps telescopes to s(T)
    let mut tele = 0.0f64;
    for kind in [TimeGridKind::UniformT, TimeGridKind::UniformS] {
        let tg = TimeGrids::new(2.5, 25_000, 2.0, kind).map_err(s)?;
        let sum: f64 = tg.delta.iter().sum();
        tele = tele.max((sum - s_of_t(2.5, 2.0)).abs());
    }
    record(tele <= TELESCOPE_TOL, format!("telescoping defect {tele:.1e}"));

    // off-grid evaluation reproduces nodal values
    let nodes = grid.points().to_vec();
    let at_nodes = z.eval_offgrid(&nodes);
    let offgrid = at_nodes.iter().zip(z.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    record(offgrid <= OFFGRID_TOL, format!("off-grid nodal defect {offgrid:.1e}"));

    Ok((
        all,
        format!(
            "{} (tolerances {MASS_DRIFT:e}, {MODULUS_TOL:e}, {GROUP_TOL:e}, {SCALING_TOL:e}, {J_NORM_TOL:e}, {TELESCOPE_TOL:e}, {OFFGRID_TOL:e})",
            parts.join(", ")
        ),
    ))
}

fn rate_consistency() -> Result<(bool, String), String> {
    let c = load("rate-cutoff")?;
    let conv = convergence(&c, workers()).map_err(s)?;
    let order = conv.fit.as_ref().map(|f| f.order).unwrap_or(f64::NAN);
    let order_ok = order >= CUTOFF_MIN_ORDER;

    let mut errors = Vec::new();
    for eps in [1e-10, 1e-12, 1e-15] {
        let mut c = load("example1-strangI")?;
        c.config.equation.epsilon = Some(eps);
        c.config.study.steps = vec![1250];
        errors.push(convergence(&c, 1).map_err(s)?.rows[0].error);
    }
    let hi = errors.iter().copied().fold(f64::MIN, f64::max);
    let lo = errors.iter().copied().fold(f64::MAX, f64::min);
    let spread = hi - lo;
    Ok((
        order_ok && spread <= EPSILON_SPREAD,
        format!(
            "Lie with cut-off, sigma = 1: order {order:.3} >= {CUTOFF_MIN_ORDER}; epsilon in {{1e-10, 1e-12, 1e-15}} error spread {spread:.1e} <= {EPSILON_SPREAD:e} (errors {:.6e} {:.6e} {:.6e})",
            errors[0], errors[1], errors[2]
        ),
    ))
}
