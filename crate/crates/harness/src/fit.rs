//! Least-squares fits used by the studies.

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation of the samples.
    pub correlation: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n || xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let correlation = if syy == 0.0 { 1.0 } else { sxy / (sxx * syy).sqrt() };
    Some(LinearFit { slope, intercept: my - slope * mx, correlation, points: n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    /// Slope of `ln error` against `ln τ`.
    pub order: f64,
    /// `ln C` in `error ≈ C τ^order`.
    pub log_constant: f64,
    pub points: usize,
}

/// Fits `error ≈ C τ^p` by least squares in log-log coordinates.
pub fn fit_order(taus: &[f64], errors: &[f64]) -> Result<OrderFit, HarnessError> {
    if taus.len() != errors.len() {
        return Err(HarnessError::Numerical("step sizes and errors differ in length".into()));
    }
    if taus.len() < 3 {
        return Err(HarnessError::Numerical(format!("an order fit needs at least 3 points, got {}", taus.len())));
    }
    if taus.iter().chain(errors).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(HarnessError::Numerical("an order fit needs positive finite step sizes and errors".into()));
    }
    let lx: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let fit = linear_fit(&lx, &ly).ok_or_else(|| HarnessError::Numerical("degenerate step sizes".into()))?;
    Ok(OrderFit { order: fit.slope, log_constant: fit.intercept, points: taus.len() })
}
