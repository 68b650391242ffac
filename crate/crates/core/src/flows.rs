//! Exact flows of the split sub-problems.
//!
//! * the free flow `exp((is/2)∂²)`, a Fourier multiplier;
//! * the frequency cut-off `Π_τ` with symbol `χ(τ^{1/2} ξ)`;
//! * the pointwise phase rotations solving the nonlinear sub-problems.
//!
//! The slice kernels (`*_in_place`) are shared with the integrators; the
//! field-level functions are thin wrappers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::SpectralField;
use crate::quadrature::{sech_pow, simpson};
use crate::transforms::{Nonlinearity, PhysParams};

/// Frequency cut-off `Π_τ`.
///
/// The profile `χ` is the C¹ raised cosine: 1 on `[-1, 1]`,
/// `cos²(π(|r| - 1)/2)` on `1 ≤ |r| ≤ 2`, 0 beyond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    pub tau: f64,
}

impl CutoffSpec {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParams(format!("cut-off step must be positive, got {tau}")));
        }
        Ok(Self { tau })
    }

    pub fn chi(r: f64) -> f64 {
        let r = r.abs();
        if r <= 1.0 {
            1.0
        } else if r >= 2.0 {
            0.0
        } else {
            let c = (0.5 * std::f64::consts::PI * (r - 1.0)).cos();
            c * c
        }
    }

    pub fn symbol(&self, xi: f64) -> f64 {
        Self::chi(self.tau.sqrt() * xi)
    }
}

/// `Φ_A^s = exp((is/2)∂²)`: multiplies mode `ξ` by `e^{-isξ²/2}`.
pub fn linear_flow(f: &SpectralField, s: f64) -> SpectralField {
    f.apply_multiplier(|xi| Complex64::from_polar(1.0, -0.5 * s * xi * xi))
}

pub fn apply_cutoff(f: &SpectralField, spec: &CutoffSpec) -> SpectralField {
    f.apply_multiplier(|xi| Complex64::new(spec.symbol(xi), 0.0))
}

/// `∫₀^s dp / (1 - ω²(s_n + p)²)` in closed form.
pub fn log_phase_integral(s_n: f64, s: f64, omega: f64) -> Result<f64> {
    let limit = 1.0 / omega;
    let s_end = s_n + s;
    if !(s_n >= 0.0 && s_n < limit) {
        return Err(Error::TransformDomain { s: s_n, limit });
    }
    if !(s_end < limit) || s_end < 0.0 {
        return Err(Error::TransformDomain { s: s_end, limit });
    }
    // (1/2ω) ln[(1-ωs_n)(1+ω(s_n+s)) / ((1+ωs_n)(1-ω(s_n+s)))], split so that
    // small steps near s = 1/ω keep their relative accuracy
    let ws = omega * s;
    let up = (ws / (1.0 + omega * s_n)).ln_1p();
    let down = (-ws / (1.0 - omega * s_n)).ln_1p();
    Ok((up - down) / (2.0 * omega))
}

/// Rotates `z` by `coef · ln(|z| + ε)`.
pub(crate) fn log_phase_in_place(values: &mut [Complex64], coef: f64, epsilon: f64) {
    for z in values.iter_mut() {
        let r = z.norm();
        let (sin, cos) = (coef * (r + epsilon).ln()).sin_cos();
        *z *= Complex64::new(cos, sin);
    }
}

/// Rotates `z` by `coef · |z|^{2σ}`.
pub(crate) fn power_phase_in_place(values: &mut [Complex64], coef: f64, sigma: f64) {
    let int_sigma = (sigma.fract() == 0.0 && sigma <= 8.0).then_some(sigma as i32);
    for z in values.iter_mut() {
        let r2 = z.norm_sqr();
        let p = match int_sigma {
            Some(k) => r2.powi(k),
            None => r2.powf(sigma),
        };
        let (sin, cos) = (coef * p).sin_cos();
        *z *= Complex64::new(cos, sin);
    }
}

/// Nonlinear flow of the regularized logarithmic problem from `s_n` over a
/// step of length `s`.
pub fn log_nonlinear_flow(z: &SpectralField, s_n: f64, s: f64, params: &PhysParams) -> Result<SpectralField> {
    let epsilon = match params.nonlinearity {
        Nonlinearity::Logarithmic { epsilon } => epsilon,
        Nonlinearity::Power { .. } => return Err(Error::Unsupported("expected a logarithmic nonlinearity".into())),
    };
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParams("the logarithmic flow needs epsilon > 0".into()));
    }
    let integral = log_phase_integral(s_n, s, params.omega)?;
    let mut out = z.clone();
    log_phase_in_place(out.values_mut(), -2.0 * params.lambda * integral, epsilon);
    Ok(out)
}

/// `∫_{t0}^{t1} sech^σ(ωζ) dζ` by composite Simpson with at least `panels` panels.
pub fn sech_power_integral(t0: f64, t1: f64, omega: f64, sigma: f64, panels: usize) -> f64 {
    if sigma == 2.0 {
        // exact: tanh(ωt1)/ω - tanh(ωt0)/ω, written without cancellation
        return (omega * (t1 - t0)).sinh() / (omega * (omega * t0).cosh() * (omega * t1).cosh());
    }
    let n = panels.max((200.0 * omega * (t1 - t0).abs()).ceil() as usize).max(20);
    simpson(|z| sech_pow(omega * z, sigma), t0, t1, n)
}

/// Nonlinear flow of the power problem over `[t_n, t_{n+1}]` (physical time).
pub fn power_nonlinear_flow(z: &SpectralField, t_n: f64, t_np1: f64, params: &PhysParams) -> Result<SpectralField> {
    let sigma = match params.nonlinearity {
        Nonlinearity::Power { sigma } => sigma,
        Nonlinearity::Logarithmic { .. } => return Err(Error::Unsupported("expected a power nonlinearity".into())),
    };
    if !(t_n >= 0.0 && t_np1 >= t_n) {
        return Err(Error::InvalidParams(format!("need 0 <= t_n <= t_n+1, got [{t_n}, {t_np1}]")));
    }
    let q = sech_power_integral(t_n, t_np1, params.omega, sigma, 20);
    let mut out = z.clone();
    power_phase_in_place(out.values_mut(), -params.lambda * q, sigma);
    Ok(out)
}
