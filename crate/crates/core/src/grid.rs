//! Uniform periodic grids and the grid functions that live on them.
//!
//! Coefficient arrays returned by [`SpectralField::analyze`] are stored in the
//! usual FFT order: modes `0, 1, …, M/2-1, -M/2, …, -1`. The wavenumber array
//! of a [`SpatialGrid`] uses the same order, so `coeffs[k]` belongs to
//! `grid.wavenumbers()[k]`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[a, b)` with `M` points.
pub struct SpatialGrid {
    a: f64,
    b: f64,
    points: Vec<f64>,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpatialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpatialGrid").field("a", &self.a).field("b", &self.b).field("m", &self.points.len()).finish()
    }
}

impl SpatialGrid {
    /// Builds the grid `x_j = a + j (b - a) / M`, `j = 0..M`.
    ///
    /// `M` must be even so that the mode range `-M/2..M/2` is well defined.
    pub fn new(a: f64, b: f64, m: usize) -> Result<Arc<Self>> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return Err(Error::InvalidGrid(format!("need a < b, got a = {a}, b = {b}")));
        }
        if m < 2 || !m.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("point count must be even and >= 2, got {m}")));
        }
        let len = b - a;
        let h = len / m as f64;
        let points = (0..m).map(|j| a + j as f64 * h).collect();
        let wavenumbers = (0..m).map(|k| 2.0 * PI * mode_index(k, m) as f64 / len).collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            a,
            b,
            points,
            wavenumbers,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }))
    }

    /// Builds a grid from a mesh size; `(b - a) / h` must be an integer.
    pub fn with_mesh(a: f64, b: f64, h: f64) -> Result<Arc<Self>> {
        if !(h > 0.0) {
            return Err(Error::InvalidGrid(format!("mesh size must be positive, got {h}")));
        }
        let ratio = (b - a) / h;
        let m = ratio.round();
        if (ratio - m).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidGrid(format!("domain length {} is not a multiple of the mesh size {h}", b - a)));
        }
        Self::new(a, b, m as usize)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Period `b - a`.
    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn spacing(&self) -> f64 {
        self.length() / self.len() as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Wavenumbers in FFT order (see module docs).
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Integer mode index of FFT slot `k`.
    pub fn mode(&self, k: usize) -> i64 {
        mode_index(k, self.len())
    }

    /// Whether `x` lies in the closed interval `[a, b]`.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.forward.get_inplace_scratch_len().max(self.inverse.get_inplace_scratch_len())
    }

    /// Unnormalized forward DFT in place.
    pub(crate) fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
    }

    /// Unnormalized inverse DFT in place.
    pub(crate) fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
    }

    /// Same size and domain (plans are not compared).
    pub fn same_as(&self, other: &SpatialGrid) -> bool {
        self.a == other.a && self.b == other.b && self.len() == other.len()
    }
}

fn mode_index(k: usize, m: usize) -> i64 {
    if k < m / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

/// `exp(2πi · frac(x · n))`, with the product formed exactly so that large
/// integer multipliers keep full phase accuracy.
pub(crate) fn cis_cycles(x: f64, n: f64) -> Complex64 {
    let p = x * n;
    let err = x.mul_add(n, -p);
    let frac = (p - p.round()) + err;
    Complex64::from_polar(1.0, 2.0 * PI * frac)
}

/// Quadrature norms of a grid function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l2: f64,
    pub l1: f64,
    /// `‖∂f‖_{L²}` with a spectral derivative.
    pub h1_seminorm: f64,
    /// `‖x f‖_{L²}` with the physical coordinate `x`.
    pub weighted_l2: f64,
}

/// Complex samples of a wavefunction on a [`SpatialGrid`].
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Arc<SpatialGrid>,
    values: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: &Arc<SpatialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { len: values.len(), expected: grid.len() });
        }
        Ok(Self { grid: Arc::clone(grid), values })
    }

    pub fn from_fn(grid: &Arc<SpatialGrid>, mut f: impl FnMut(f64) -> Complex64) -> Self {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Self { grid: Arc::clone(grid), values }
    }

    pub fn zeros(grid: &Arc<SpatialGrid>) -> Self {
        Self { grid: Arc::clone(grid), values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scaled(&self, k: Complex64) -> Self {
        Self { grid: Arc::clone(&self.grid), values: self.values.iter().map(|z| z * k).collect() }
    }

    /// Fourier coefficients `ĉ_m = (1/M) Σ_j f_j e^{-iξ_m (x_j - a)}`, FFT order.
    pub fn analyze(&self) -> Vec<Complex64> {
        let mut buf = self.values.clone();
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.grid.scratch_len()];
        self.grid.forward(&mut buf, &mut scratch);
        let scale = 1.0 / self.grid.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Inverse of [`analyze`](Self::analyze).
    pub fn synthesize(grid: &Arc<SpatialGrid>, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch { len: coeffs.len(), expected: grid.len() });
        }
        let mut buf = coeffs.to_vec();
        let mut scratch = vec![Complex64::new(0.0, 0.0); grid.scratch_len()];
        grid.inverse(&mut buf, &mut scratch);
        Ok(Self { grid: Arc::clone(grid), values: buf })
    }

    /// Multiplies every Fourier coefficient by `m(ξ)`.
    pub fn apply_multiplier(&self, m: impl Fn(f64) -> Complex64) -> Self {
        let mut coeffs = self.analyze();
        for (c, &xi) in coeffs.iter_mut().zip(self.grid.wavenumbers()) {
            *c *= m(xi);
        }
        Self::synthesize(&self.grid, &coeffs).expect("length preserved")
    }

    /// Spectral derivative `∂f`.
    pub fn derivative(&self) -> Self {
        self.apply_multiplier(|xi| Complex64::new(0.0, xi))
    }

    /// Evaluates the trigonometric interpolant `Σ_m ĉ_m e^{iξ_m (x - a)}` at
    /// arbitrary points by direct summation. Targets are wrapped into the period.
    pub fn eval_offgrid(&self, targets: &[f64]) -> Vec<Complex64> {
        let coeffs = self.analyze();
        let m = self.grid.len();
        let half = m / 2;
        let len = self.grid.length();
        let a = self.grid.a();
        // Natural order -M/2..M/2-1 so chunks of consecutive modes are contiguous.
        let ordered: Vec<Complex64> = (0..m).map(|k| coeffs[(k + half) % m]).collect();
        const CHUNK: usize = 32;
        targets
            .iter()
            .map(|&x| {
                let cycles = (x - a).rem_euclid(len) / len;
                let step = cis_cycles(cycles, 1.0);
                let mut acc = Complex64::new(0.0, 0.0);
                for (c, chunk) in ordered.chunks(CHUNK).enumerate() {
                    let first_mode = (c * CHUNK) as f64 - half as f64;
                    let mut w = cis_cycles(cycles, first_mode);
                    for coef in chunk {
                        acc += coef * w;
                        w *= step;
                    }
                }
                acc
            })
            .collect()
    }

    /// Evaluates the trigonometric interpolant at the equispaced targets
    /// `start + j·step`, `j = 0..count`, with a chirp-z transform.
    ///
    /// Targets are not wrapped; callers are expected to keep them inside the
    /// domain.
    pub fn eval_equispaced(&self, start: f64, step: f64, count: usize) -> Vec<Complex64> {
        if count == 0 {
            return Vec::new();
        }
        let coeffs = self.analyze();
        let m = self.grid.len();
        let half = m / 2;
        let len = self.grid.length();
        let u = (start - self.grid.a()) / len;
        let v = step / len;
        let p = (m + count - 1).next_power_of_two();

        // a_k = A_k e^{2πi k u} e^{iπ v k²}, A_k = ĉ_{k - M/2}
        let mut work = vec![Complex64::new(0.0, 0.0); p];
        for k in 0..m {
            let kf = k as f64;
            work[k] = coeffs[(k + half) % m] * cis_cycles(u, kf) * cis_cycles(0.5 * v, kf * kf);
        }
        // c_n = e^{-iπ v n²}, n in [-(M-1), K-1], stored circularly
        let mut chirp = vec![Complex64::new(0.0, 0.0); p];
        for n in 0..count.max(m) {
            let nf = n as f64;
            let c = cis_cycles(-0.5 * v, nf * nf);
            if n < count {
                chirp[n] = c;
            }
            if n > 0 && n < m {
                chirp[p - n] = c;
            }
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(p);
        let inv = planner.plan_fft_inverse(p);
        fwd.process(&mut work);
        fwd.process(&mut chirp);
        for (w, c) in work.iter_mut().zip(&chirp) {
            *w *= c;
        }
        inv.process(&mut work);
        let scale = 1.0 / p as f64;
        let global = cis_cycles(-0.5 * u, m as f64);
        (0..count)
            .map(|j| {
                let jf = j as f64;
                work[j] * scale * global * cis_cycles(-0.5 * v, (m * j) as f64) * cis_cycles(0.5 * v, jf * jf)
            })
            .collect()
    }

    pub fn norms(&self) -> Norms {
        let h = self.grid.spacing();
        let mut l2 = 0.0;
        let mut l1 = 0.0;
        let mut weighted = 0.0;
        for (z, &x) in self.values.iter().zip(self.grid.points()) {
            let n2 = z.norm_sqr();
            l2 += n2;
            l1 += n2.sqrt();
            weighted += x * x * n2;
        }
        Norms { l2: (h * l2).sqrt(), l1: h * l1, h1_seminorm: self.h1_seminorm(), weighted_l2: (h * weighted).sqrt() }
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `‖∂f‖_{L²}` from the coefficients via Parseval.
    pub fn h1_seminorm(&self) -> f64 {
        let coeffs = self.analyze();
        h1_from_coeffs(&coeffs, self.grid.wavenumbers(), self.grid.length())
    }

    /// Discrete `L²` distance; both fields must share a grid.
    pub fn l2_distance(&self, other: &SpectralField) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::InvalidGrid("fields live on different grids".into()));
        }
        let sum: f64 = self.values.iter().zip(&other.values).map(|(p, q)| (p - q).norm_sqr()).sum();
        Ok((self.grid.spacing() * sum).sqrt())
    }

    /// Largest pointwise modulus difference.
    pub fn sup_distance(&self, other: &SpectralField) -> f64 {
        self.values.iter().zip(&other.values).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
    }
}

/// `sqrt(L Σ ξ²|ĉ|²)` for normalized coefficients.
pub(crate) fn h1_from_coeffs(coeffs: &[Complex64], wavenumbers: &[f64], length: f64) -> f64 {
    let s: f64 = coeffs.iter().zip(wavenumbers).map(|(c, xi)| xi * xi * c.norm_sqr()).sum();
    (length * s).sqrt()
}
