//! Exact Gaussian solutions of the logarithmic equation with a repulsive
//! harmonic potential.
//!
//! Gaussian data `u₀ = b₀ e^{-a₀x²/2}` stay Gaussian, `u = b(t) e^{-a(t)x²/2}`,
//! with `a = 1/μ² - iμ̇/μ`. The width obeys
//!
//! ```text
//! μ̈ = 2λ/μ + 1/μ³ + ω²μ
//! ```
//!
//! with first integral `F(μ, μ̇) = μ̇² - 4λ ln μ + 1/μ² - ω²μ²`. The modulus of
//! `b` follows from `|b|²μ = const`, and its phase from
//! `θ̇ = -(1/(2μ²) + λ ln|b|²)`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mu: f64,
    pub mudot: f64,
    pub bmod: f64,
    pub theta: f64,
}

impl GaussianState {
    /// State of `u₀(x) = amplitude · e^{-(α - iβ)x²/2}`.
    pub fn from_initial_data(amplitude: Complex64, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::InvalidParams(format!("Gaussian data need alpha > 0, got {alpha}")));
        }
        let mu = 1.0 / alpha.sqrt();
        Ok(Self { mu, mudot: beta / alpha.sqrt(), bmod: amplitude.norm(), theta: amplitude.arg() })
    }

    /// `a = 1/μ² - iμ̇/μ`.
    pub fn a(&self) -> Complex64 {
        Complex64::new(1.0 / (self.mu * self.mu), -self.mudot / self.mu)
    }

    pub fn b(&self) -> Complex64 {
        Complex64::from_polar(self.bmod, self.theta)
    }

    /// `|b|² μ`, constant along trajectories.
    pub fn mass_constant(&self) -> f64 {
        self.bmod * self.bmod * self.mu
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeParams {
    pub lambda: f64,
    pub omega: f64,
    /// Value of the first integral on the trajectory.
    pub c0: f64,
}

impl OdeParams {
    pub fn for_state(lambda: f64, omega: f64, state: &GaussianState) -> Self {
        Self { lambda, omega, c0: first_integral(state.mu, state.mudot, lambda, omega) }
    }
}

/// `F(μ, μ̇) = μ̇² - 4λ ln μ + 1/μ² - ω²μ²`.
pub fn first_integral(mu: f64, mudot: f64, lambda: f64, omega: f64) -> f64 {
    mudot * mudot - 4.0 * lambda * mu.ln() + 1.0 / (mu * mu) - omega * omega * mu * mu
}

fn rhs(mu: f64, lambda: f64, omega: f64) -> f64 {
    2.0 * lambda / mu + 1.0 / (mu * mu * mu) + omega * omega * mu
}

/// `μ̈ = 2λ/μ + 1/μ³ + ω²μ`.
pub fn mu_rhs(mu: f64, params: &OdeParams) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParams(format!("mu must be positive, got {mu}")));
    }
    Ok(rhs(mu, params.lambda, params.omega))
}

/// Fixed-step classical RK4 for `(μ, μ̇, θ)`; `|b|` follows algebraically.
#[derive(Debug, Clone)]
pub struct GaussianPropagator {
    lambda: f64,
    omega: f64,
    mass: f64,
    t: f64,
    state: GaussianState,
}

impl GaussianPropagator {
    pub fn new(init: GaussianState, lambda: f64, omega: f64) -> Result<Self> {
        if !(init.mu > 0.0) {
            return Err(Error::NonPositiveWidth { mu: init.mu, t: 0.0 });
        }
        Ok(Self { lambda, omega, mass: init.mass_constant(), t: 0.0, state: init })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> GaussianState {
        self.state
    }

    fn deriv(&self, y: [f64; 3]) -> [f64; 3] {
        let [mu, mudot, _] = y;
        let b2 = self.mass / mu;
        [mudot, rhs(mu, self.lambda, self.omega), -(0.5 / (mu * mu) + self.lambda * b2.ln())]
    }

    fn rk4(&mut self, dt: f64) -> Result<()> {
        let y = [self.state.mu, self.state.mudot, self.state.theta];
        let add = |y: [f64; 3], k: [f64; 3], h: f64| [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]];
        let k1 = self.deriv(y);
        let y2 = add(y, k1, 0.5 * dt);
        if !(y2[0] > 0.0) {
            return Err(Error::NonPositiveWidth { mu: y2[0], t: self.t + 0.5 * dt });
        }
        let k2 = self.deriv(y2);
        let y3 = add(y, k2, 0.5 * dt);
        if !(y3[0] > 0.0) {
            return Err(Error::NonPositiveWidth { mu: y3[0], t: self.t + 0.5 * dt });
        }
        let k3 = self.deriv(y3);
        let y4 = add(y, k3, dt);
        if !(y4[0] > 0.0) {
            return Err(Error::NonPositiveWidth { mu: y4[0], t: self.t + dt });
        }
        let k4 = self.deriv(y4);
        let mut next = [0.0; 3];
        for i in 0..3 {
            next[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !(next[0] > 0.0) || !next.iter().all(|v| v.is_finite()) {
            return Err(Error::NonPositiveWidth { mu: next[0], t: self.t + dt });
        }
        self.state = GaussianState { mu: next[0], mudot: next[1], bmod: (self.mass / next[0]).sqrt(), theta: next[2] };
        self.t += dt;
        Ok(())
    }

    /// Integrates forward to `t_target` with equal substeps no longer than `dt_max`.
    pub fn advance_to(&mut self, t_target: f64, dt_max: f64) -> Result<GaussianState> {
        let span = t_target - self.t;
        if span < 0.0 {
            return Err(Error::InvalidParams(format!("cannot integrate backwards from {} to {t_target}", self.t)));
        }
        if span > 0.0 {
            let n = (span / dt_max).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                self.rk4(h)?;
            }
            self.t = t_target;
        }
        Ok(self.state)
    }
}

/// Trajectory samples `(t_k, state_k)`, `t_k = k·dt'` with `dt' ≤ dt` dividing `t_end`.
pub fn integrate_gaussian(
    init: GaussianState,
    params: &OdeParams,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, GaussianState)>> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(Error::InvalidParams(format!("need dt > 0 and t_end >= 0, got dt = {dt}, t_end = {t_end}")));
    }
    let mut prop = GaussianPropagator::new(init, params.lambda, params.omega)?;
    let n = (t_end / dt).ceil() as usize;
    let h = if n == 0 { 0.0 } else { t_end / n as f64 };
    let mut out = Vec::with_capacity(n + 1);
    out.push((0.0, init));
    for k in 1..=n {
        prop.rk4(h)?;
        out.push((k as f64 * h, prop.state));
    }
    Ok(out)
}

/// Samples `b e^{-a x²/2}` on `grid`.
pub fn exact_field(state: &GaussianState, grid: &Arc<SpatialGrid>) -> SpectralField {
    let a = state.a();
    let b = state.b();
    SpectralField::from_fn(grid, |x| b * (-0.5 * a * x * x).exp())
}

/// Stationary-solution regime of the width equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `λ < -ω`: `μ± = 1/√k±`, `k± = -λ ± √(λ² - ω²)`.
    TwoStationary { mu_plus: f64, mu_minus: f64 },
    /// `λ = -ω`: `μ₀ = 1/√ω`.
    OneStationary { mu0: f64 },
    /// `-ω < λ < 0`: every width grows exponentially.
    AllUnbounded,
    /// `λ ≥ 0`: no stationary Gaussian.
    Dispersive,
}

impl Regime {
    pub fn stationary_points(&self) -> Vec<f64> {
        match *self {
            Regime::TwoStationary { mu_plus, mu_minus } => vec![mu_plus, mu_minus],
            Regime::OneStationary { mu0 } => vec![mu0],
            _ => Vec::new(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::TwoStationary { .. } => "two-stationary",
            Regime::OneStationary { .. } => "one-stationary",
            Regime::AllUnbounded => "all-unbounded",
            Regime::Dispersive => "dispersive",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Regime::TwoStationary { .. } => "two stationary Gaussians; other orbits periodic or unbounded",
            Regime::OneStationary { .. } => "one stationary Gaussian; every other Gaussian disperses",
            Regime::AllUnbounded => "no stationary Gaussian; every Gaussian disperses exponentially",
            Regime::Dispersive => "no stationary Gaussian (defocusing); dispersive",
        }
    }
}

pub fn classify(lambda: f64, omega: f64) -> Result<Regime> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParams(format!("omega must be positive, got {omega}")));
    }
    if lambda >= 0.0 {
        return Ok(Regime::Dispersive);
    }
    if (lambda + omega).abs() <= 1e-12 * omega {
        return Ok(Regime::OneStationary { mu0: 1.0 / omega.sqrt() });
    }
    if lambda < -omega {
        let root = (lambda * lambda - omega * omega).sqrt();
        let k_plus = -lambda + root;
        // k₋ = ω²/k₊ avoids cancellation
        let k_minus = omega * omega / k_plus;
        return Ok(Regime::TwoStationary { mu_plus: 1.0 / k_plus.sqrt(), mu_minus: 1.0 / k_minus.sqrt() });
    }
    Ok(Regime::AllUnbounded)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryKind {
    Center,
    Saddle,
    /// Vanishing linearization (`λ = -ω`).
    Degenerate,
}

impl StationaryKind {
    pub fn label(&self) -> &'static str {
        match self {
            StationaryKind::Center => "center",
            StationaryKind::Saddle => "saddle",
            StationaryKind::Degenerate => "degenerate",
        }
    }
}

/// Type of the equilibrium `(μ, 0)` from the sign of `d(μ̈)/dμ`.
pub fn stationary_kind(mu: f64, lambda: f64, omega: f64) -> StationaryKind {
    let slope = -2.0 * lambda / (mu * mu) - 3.0 / mu.powi(4) + omega * omega;
    let scale = 2.0 * lambda.abs() / (mu * mu) + 3.0 / mu.powi(4) + omega * omega;
    if slope.abs() <= 1e-10 * scale {
        StationaryKind::Degenerate
    } else if slope < 0.0 {
        StationaryKind::Center
    } else {
        StationaryKind::Saddle
    }
}

/// Rectangle `[μ_min, μ_max] × [μ̇_min, μ̇_max]` of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitBox {
    pub mu_min: f64,
    pub mu_max: f64,
    pub mudot_min: f64,
    pub mudot_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCurve {
    pub seed: (f64, f64),
    pub level: f64,
    /// Both turning points lie inside the box.
    pub closed: bool,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePortrait {
    pub lambda: f64,
    pub omega: f64,
    pub curves: Vec<LevelCurve>,
    pub stationary: Vec<(f64, f64)>,
}

/// Seeds on the `μ̇ = 0` axis spread over the box, plus the stationary points.
pub fn default_seeds(lambda: f64, omega: f64, bx: &PortraitBox, n_trajectories: usize) -> Result<Vec<(f64, f64)>> {
    let mut seeds: Vec<(f64, f64)> = classify(lambda, omega)?
        .stationary_points()
        .into_iter()
        .filter(|mu| *mu > bx.mu_min && *mu < bx.mu_max)
        .map(|mu| (mu, 0.0))
        .collect();
    let n = n_trajectories.saturating_sub(seeds.len()).max(1);
    let span = bx.mu_max - bx.mu_min;
    seeds.extend((0..n).map(|k| (bx.mu_min + span * (k as f64 + 0.5) / n as f64, 0.0)));
    Ok(seeds)
}

/// Level curves of `F` through default seeds.
pub fn phase_portrait(
    lambda: f64,
    omega: f64,
    bx: &PortraitBox,
    n_trajectories: usize,
    samples: usize,
) -> Result<PhasePortrait> {
    let seeds = default_seeds(lambda, omega, bx, n_trajectories)?;
    level_curves(lambda, omega, bx, &seeds, samples)
}

/// The connected component of `{F = F(seed)}` containing each seed, sampled
/// as a polyline. Stationary seeds give single-point curves.
pub fn level_curves(
    lambda: f64,
    omega: f64,
    bx: &PortraitBox,
    seeds: &[(f64, f64)],
    samples: usize,
) -> Result<PhasePortrait> {
    if !(bx.mu_min > 0.0 && bx.mu_max > bx.mu_min && bx.mudot_max > bx.mudot_min) {
        return Err(Error::InvalidParams("phase-portrait box must satisfy 0 < mu_min < mu_max".into()));
    }
    let regime = classify(lambda, omega)?;
    let stationary: Vec<(f64, f64)> = regime.stationary_points().into_iter().map(|m| (m, 0.0)).collect();
    let samples = samples.max(8);
    let mut curves = Vec::with_capacity(seeds.len());
    for &(mu_s, mudot_s) in seeds {
        if !(mu_s > 0.0) {
            return Err(Error::InvalidParams(format!("seed mu must be positive, got {mu_s}")));
        }
        let level = first_integral(mu_s, mudot_s, lambda, omega);
        let scale = 1.0 + level.abs();
        let is_stationary = mudot_s == 0.0 && rhs(mu_s, lambda, omega).abs() <= 1e-9 * scale;
        if is_stationary {
            curves.push(LevelCurve { seed: (mu_s, mudot_s), level, closed: true, points: vec![(mu_s, 0.0)] });
            continue;
        }
        let radicand = |mu: f64| level + 4.0 * lambda * mu.ln() - 1.0 / (mu * mu) + omega * omega * mu * mu;
        let scan = (bx.mu_max - bx.mu_min) / (4 * samples) as f64;
        let find_end = |dir: f64, bound: f64| -> (f64, bool) {
            let mut inside = mu_s;
            loop {
                let next = inside + dir * scan;
                if (dir < 0.0 && next <= bound) || (dir > 0.0 && next >= bound) {
                    if radicand(bound) >= 0.0 {
                        return (bound, false);
                    }
                    return (bisect(&radicand, inside, bound), true);
                }
                if radicand(next) < 0.0 {
                    return (bisect(&radicand, inside, next), true);
                }
                inside = next;
            }
        };
        let (left, left_root) = find_end(-1.0, bx.mu_min);
        let (right, right_root) = find_end(1.0, bx.mu_max);
        let branch = |sign: f64| -> Vec<(f64, f64)> {
            (0..samples)
                .map(|i| {
                    let c = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (samples - 1) as f64).cos());
                    let mu = left + (right - left) * c;
                    (mu, sign * radicand(mu).max(0.0).sqrt())
                })
                .collect()
        };
        let upper = branch(1.0);
        let lower = branch(-1.0);
        let closed = left_root && right_root;
        let points = match (left_root, right_root) {
            (true, true) => {
                let mut p = upper;
                p.extend(lower.into_iter().rev().skip(1));
                p.push(p[0]);
                p
            }
            (true, false) => {
                let mut p: Vec<_> = upper.into_iter().rev().collect();
                p.extend(lower.into_iter().skip(1));
                p
            }
            (false, true) => {
                let mut p = upper;
                p.extend(lower.into_iter().rev().skip(1));
                p
            }
            (false, false) => {
                if mudot_s >= 0.0 {
                    upper
                } else {
                    lower
                }
            }
        };
        curves.push(LevelCurve { seed: (mu_s, mudot_s), level, closed, points });
    }
    Ok(PhasePortrait { lambda, omega, curves, stationary })
}

/// Root of `f` between `inside` (`f ≥ 0`) and `outside` (`f < 0`).
fn bisect(f: &impl Fn(f64) -> f64, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if f(mid) >= 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}
