//! Public-API checks of the solver against the exact Gaussian solutions.

use std::sync::Arc;

use lenssplit::gaussian::{exact_field, GaussianPropagator, GaussianState};
use lenssplit::integrators::{reconstruct_state, SplitStepper};
use lenssplit::{
    run, run_with_reference, step_lie, step_strang, Complex64, Observable, PhysParams, SolverConfig, SolverState,
    SpatialGrid, SpectralField, Splitting, TimeGridKind, TimeGrids,
};

const LAMBDA: f64 = -3.0;
const OMEGA: f64 = 2.0;
const T: f64 = 0.5;

fn grid() -> Arc<SpatialGrid> {
    SpatialGrid::new(-8.0, 8.0, 256).unwrap()
}

fn init() -> GaussianState {
    GaussianState::from_initial_data(Complex64::new(2.0, 0.0), 2.0, 0.0).unwrap()
}

fn exact_at(t: f64, grid: &Arc<SpatialGrid>) -> SpectralField {
    let mut p = GaussianPropagator::new(init(), LAMBDA, OMEGA).unwrap();
    exact_field(&p.advance_to(t, 1e-5).unwrap(), grid)
}

fn config(steps: usize, kind: TimeGridKind, splitting: Splitting) -> SolverConfig {
    let params = PhysParams::logarithmic(LAMBDA, OMEGA, 1e-15).unwrap();
    let grids = TimeGrids::new(T, steps, OMEGA, kind).unwrap();
    SolverConfig::new(params, grids, grid(), splitting)
}

fn final_error(steps: usize, kind: TimeGridKind, splitting: Splitting) -> f64 {
    let cfg = config(steps, kind, splitting);
    let u0 = exact_field(&init(), &cfg.spatial);
    let out = run(&cfg, u0, &[]).unwrap();
    let u = reconstruct_state(&cfg, &out.final_state, None).unwrap();
    u.l2_distance(&exact_at(T, &cfg.spatial)).unwrap()
}

fn observed_order(kind: TimeGridKind, splitting: Splitting) -> f64 {
    let coarse = final_error(200, kind, splitting);
    let fine = final_error(400, kind, splitting);
    (coarse / fine).log2()
}

#[test]
fn strang_grid_one_is_second_order() {
    let p = observed_order(TimeGridKind::UniformT, Splitting::Strang);
    assert!((p - 2.0).abs() < 0.15, "order {p}");
}

#[test]
fn lie_grid_one_is_first_order() {
    let p = observed_order(TimeGridKind::UniformT, Splitting::Lie);
    assert!((p - 1.0).abs() < 0.15, "order {p}");
}

#[test]
fn strang_grid_two_is_second_order_on_a_short_horizon() {
    let p = observed_order(TimeGridKind::UniformS, Splitting::Strang);
    assert!((p - 2.0).abs() < 0.2, "order {p}");
}

#[test]
fn single_steps_match_the_driver() {
    for (splitting, step) in [
        (Splitting::Lie, step_lie as fn(&SolverState, &SolverConfig) -> lenssplit::Result<SolverState>),
        (Splitting::Strang, step_strang),
    ] {
        let cfg = config(20, TimeGridKind::UniformT, splitting);
        let u0 = exact_field(&init(), &cfg.spatial);
        let mut state = SolverState::initial(u0.clone());
        for _ in 0..20 {
            state = step(&state, &cfg).unwrap();
        }
        let driven = run(&cfg, u0.clone(), &[]).unwrap().final_state;
        assert_eq!(state.n, 20);
        assert!(state.field.sup_distance(&driven.field) < 1e-13);
        assert_eq!(state.t_n, T);

        let mut stepper = SplitStepper::new(&cfg).unwrap();
        let mut values = u0.into_values();
        for n in 0..20 {
            stepper.advance(&mut values, n);
        }
        let stepped = SpectralField::new(&cfg.spatial, values).unwrap();
        assert!(stepped.sup_distance(&driven.field) < 1e-13);
    }
}

#[test]
fn error_observable_matches_reference_distance() {
    let mut cfg = config(100, TimeGridKind::UniformT, Splitting::Strang);
    cfg.observers = vec![Observable::Error, Observable::Mass];
    cfg.observe_every = 25;
    let xgrid = Arc::clone(&cfg.spatial);
    let reference = move |t: f64| Ok(exact_at(t, &xgrid));
    let u0 = exact_field(&init(), &cfg.spatial);
    let out = run_with_reference(&cfg, u0, &[0.25], Some(&reference)).unwrap();
    let errors = out.record.series_of(Observable::Error);
    assert_eq!(errors.iter().map(|e| e.0).collect::<Vec<_>>(), vec![0.0, 0.125, 0.25, 0.375, 0.5]);
    assert!(errors[0].1 < 1e-12);
    let direct = final_error(100, TimeGridKind::UniformT, Splitting::Strang);
    assert!((errors[4].1 - direct).abs() < 1e-12);
    assert_eq!(out.record.snapshots_u.len(), 1);
    assert_eq!(out.record.snapshots_u[0].time, 0.25);
}

#[test]
fn focusing_power_run_stops_at_the_monitor() {
    let params = PhysParams::power(-1.0, OMEGA, 3.0).unwrap();
    let spatial = SpatialGrid::new(-10.0, 10.0, 2048).unwrap();
    let grids = TimeGrids::new(0.1, 500, OMEGA, TimeGridKind::UniformT).unwrap();
    let mut cfg = SolverConfig::new(params, grids, Arc::clone(&spatial), Splitting::Strang);
    assert_eq!(cfg.blowup_factor, Some(1e3));
    cfg.blowup_factor = Some(10.0);
    let u0 = SpectralField::from_fn(&spatial, |x| Complex64::new(2.0 * (-x * x).exp(), 0.0));
    let out = run(&cfg, u0, &[]).unwrap();
    let event = out.blowup.expect("monitor fires");
    assert!(event.t_lo < event.t_hi && event.t_hi <= 0.1);
    assert_eq!(out.final_state.n, event.step);
    assert!(event.grad_norm > event.threshold);
}
