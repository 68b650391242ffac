//! Equation parameters, the `t ↔ s` time maps, the lens transform with its
//! gauge phase, and the virial blow-up test for the power nonlinearity.
//!
//! The physical unknown `u(t, x)` and the transformed unknown `v(s, y)` are
//! related by
//!
//! ```text
//! u(t, x) = cosh(ωt)^{-1/2} v(s, y) exp(i ω x² tanh(ωt) / 2),
//! s = tanh(ωt) / ω,   y = x / cosh(ωt),
//! ```
//!
//! and in the logarithmic case `v = κ e^{-iλ g(s)}` removes the purely
//! time-dependent part of the nonlinearity.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, SpectralField};
use crate::quadrature::{ln_cosh, simpson};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `λ u ln|u|²`, regularized as `2λ u ln(|u| + ε)`.
    Logarithmic { epsilon: f64 },
    /// `λ |u|^{2σ} u`.
    Power { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub lambda: f64,
    pub omega: f64,
    pub nonlinearity: Nonlinearity,
}

impl PhysParams {
    pub fn logarithmic(lambda: f64, omega: f64, epsilon: f64) -> Result<Self> {
        Self { lambda, omega, nonlinearity: Nonlinearity::Logarithmic { epsilon } }.validated()
    }

    pub fn power(lambda: f64, omega: f64, sigma: f64) -> Result<Self> {
        Self { lambda, omega, nonlinearity: Nonlinearity::Power { sigma } }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParams(format!("lambda must be finite, got {}", self.lambda)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParams(format!("omega must be positive, got {}", self.omega)));
        }
        match self.nonlinearity {
            Nonlinearity::Logarithmic { epsilon } if !(epsilon >= 0.0 && epsilon.is_finite()) => {
                Err(Error::InvalidParams(format!("epsilon must be nonnegative, got {epsilon}")))
            }
            Nonlinearity::Power { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidParams(format!("sigma must be positive, got {sigma}")))
            }
            _ => Ok(self),
        }
    }

    pub fn is_logarithmic(&self) -> bool {
        matches!(self.nonlinearity, Nonlinearity::Logarithmic { .. })
    }

    /// Upper end `1/ω` of the transformed time interval.
    pub fn s_limit(&self) -> f64 {
        1.0 / self.omega
    }
}

/// `s = tanh(ωt)/ω`.
pub fn s_of_t(t: f64, omega: f64) -> f64 {
    (omega * t).tanh() / omega
}

/// `t = artanh(ωs)/ω`, the inverse of [`s_of_t`].
pub fn t_of_s(s: f64, omega: f64) -> f64 {
    (omega * s).atanh() / omega
}

/// Gauge primitive `g(s) = ½ ∫₀^s ln(1-ω²p²)/(1-ω²p²) dp`.
///
/// Evaluated as `-∫₀^{t(s)} ln cosh(ωt') dt'`, whose integrand is smooth.
pub fn gauge_g(s: f64, omega: f64) -> Result<f64> {
    let limit = 1.0 / omega;
    if !(s >= 0.0 && s < limit) {
        return Err(Error::TransformDomain { s, limit });
    }
    let t = t_of_s(s, omega);
    let panels = 64 + 2 * (200.0 * omega * t).ceil() as usize;
    Ok(-simpson(|tp| ln_cosh(omega * tp), 0.0, t, panels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeGridKind {
    /// Uniform in `t`; the `s`-steps shrink as `s → 1/ω`.
    UniformT,
    /// Uniform in `s`; the matching `t_n` are nonuniform.
    UniformS,
}

impl TimeGridKind {
    pub fn label(&self) -> &'static str {
        match self {
            TimeGridKind::UniformT => "I",
            TimeGridKind::UniformS => "II",
        }
    }
}

/// Paired `t_n` / `s_n` sequences with `δ_n = s_{n+1} - s_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrids {
    pub final_time: f64,
    pub steps: usize,
    pub omega: f64,
    pub kind: TimeGridKind,
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub delta: Vec<f64>,
}

impl TimeGrids {
    pub fn new(final_time: f64, steps: usize, omega: f64, kind: TimeGridKind) -> Result<Self> {
        if !(final_time > 0.0 && final_time.is_finite()) {
            return Err(Error::InvalidParams(format!("final time must be positive, got {final_time}")));
        }
        if !(omega > 0.0) {
            return Err(Error::InvalidParams(format!("omega must be positive, got {omega}")));
        }
        let n = steps;
        let (t, s, delta) = match kind {
            TimeGridKind::UniformT => {
                let tau = final_time / n.max(1) as f64;
                let mut t: Vec<f64> = (0..=n).map(|k| k as f64 * tau).collect();
                if n > 0 {
                    t[n] = final_time;
                }
                let s: Vec<f64> = t.iter().map(|&tk| s_of_t(tk, omega)).collect();
                // tanh(b) - tanh(a) = sinh(b - a) / (cosh a cosh b), free of cancellation
                let delta = t
                    .windows(2)
                    .map(|w| (omega * (w[1] - w[0])).sinh() / (omega * (omega * w[0]).cosh() * (omega * w[1]).cosh()))
                    .collect();
                (t, s, delta)
            }
            TimeGridKind::UniformS => {
                let s_end = s_of_t(final_time, omega);
                let step = s_end / n.max(1) as f64;
                let mut s: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
                if n > 0 {
                    s[n] = s_end;
                }
                let mut t: Vec<f64> = s.iter().map(|&sk| t_of_s(sk, omega)).collect();
                if n > 0 {
                    t[n] = final_time;
                }
                let delta = s.windows(2).map(|w| w[1] - w[0]).collect();
                (t, s, delta)
            }
        };
        Ok(Self { final_time, steps, omega, kind, t, s, delta })
    }

    /// Reference step `τ = T/N` (zero for an empty grid).
    pub fn tau(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.final_time / self.steps as f64
        }
    }

    /// `g(s_n)` for every grid node by cumulative Simpson quadrature in `t`
    /// with `subpanels` panels per step.
    pub fn gauge_table(&self, subpanels: usize) -> Vec<f64> {
        let w = self.omega;
        let mut out = Vec::with_capacity(self.t.len());
        let mut acc = 0.0;
        out.push(0.0);
        for pair in self.t.windows(2) {
            acc -= simpson(|tp| ln_cosh(w * tp), pair[0], pair[1], subpanels);
            out.push(acc);
        }
        out
    }
}

/// How the gauge phase `e^{-iλ g(s)}` enters [`reconstruct_u`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaugeMode {
    /// Power case: no gauge.
    Omit,
    /// Evaluate `g(s)` on the fly.
    Compute,
    /// Use a precomputed `g(s_n)`.
    Tabulated(f64),
}

/// Maps a transformed field on the `y`-grid back to `u(t_n, ·)` on `xgrid`.
///
/// Fails if some `x_j / cosh(ωt_n)` falls outside the `y`-domain.
pub fn reconstruct_u(
    field_in_y: &SpectralField,
    t_n: f64,
    params: &PhysParams,
    gauge: GaugeMode,
    xgrid: &Arc<SpatialGrid>,
) -> Result<SpectralField> {
    let w = params.omega;
    let c = (w * t_n).cosh();
    let th = (w * t_n).tanh();
    let ygrid = field_in_y.grid();
    let start = xgrid.a() / c;
    let step = xgrid.spacing() / c;
    let last = start + (xgrid.len() - 1) as f64 * step;
    for target in [start, last] {
        if !ygrid.contains(target) {
            return Err(Error::OutOfDomain { target, a: ygrid.a(), b: ygrid.b() });
        }
    }
    let g = match gauge {
        GaugeMode::Omit => 0.0,
        GaugeMode::Compute => gauge_g(s_of_t(t_n, w), w)?,
        GaugeMode::Tabulated(g) => g,
    };
    let inner = field_in_y.eval_equispaced(start, step, xgrid.len());
    let amp = 1.0 / c.sqrt();
    let values = inner
        .iter()
        .zip(xgrid.points())
        .map(|(k, &x)| k * Complex64::from_polar(amp, 0.5 * w * x * x * th - params.lambda * g))
        .collect();
    SpectralField::new(xgrid, values)
}

/// Terms of the virial sufficient condition for blow-up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialCheck {
    pub holds: bool,
    /// `½‖∂u₀‖² + λ/(σ+1) ‖u₀‖_{2σ+2}^{2σ+2}`
    pub lhs: f64,
    /// `-(ω²/2)‖x u₀‖² - ω |Im ∫ ū₀ x ∂u₀|`
    pub rhs: f64,
}

/// Power nonlinearity only: evaluates the sign condition on `u0` that
/// guarantees gradient blow-up in finite time, forward and backward.
pub fn virial_blowup_check(u0: &SpectralField, params: &PhysParams) -> Result<VirialCheck> {
    let sigma = match params.nonlinearity {
        Nonlinearity::Power { sigma } => sigma,
        Nonlinearity::Logarithmic { .. } => {
            return Err(Error::Unsupported("the virial blow-up test applies to the power nonlinearity".into()))
        }
    };
    let grid = u0.grid();
    let h = grid.spacing();
    let norms = u0.norms();
    let p = 2.0 * sigma + 2.0;
    let lp: f64 = h * u0.values().iter().map(|z| z.norm().powf(p)).sum::<f64>();
    let du = u0.derivative();
    let im_moment: f64 = h * u0
        .values()
        .iter()
        .zip(du.values())
        .zip(grid.points())
        .map(|((u, d), &x)| (u.conj() * x * d).im)
        .sum::<f64>();
    let w = params.omega;
    let lhs = 0.5 * norms.h1_seminorm.powi(2) + params.lambda / (sigma + 1.0) * lp;
    let rhs = -0.5 * w * w * norms.weighted_l2.powi(2) - w * im_moment.abs();
    Ok(VirialCheck { holds: lhs < rhs, lhs, rhs })
}
