use num_complex::Complex64;

use crate::grid::SpectralField;

/// Quantities the driver can record along a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    /// `‖field‖_{L²}` of the transformed unknown.
    Mass,
    /// `‖∂_y field‖_{L²}`.
    H1Seminorm,
    /// `‖y field‖_{L²}`.
    WeightedL2,
    /// `‖u^n - u(t_n)‖_{L²(x)}` against a reference solution.
    Error,
}

impl Observable {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::Mass => "mass",
            Observable::H1Seminorm => "h1",
            Observable::WeightedL2 => "weighted",
            Observable::Error => "error",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Observable::Mass, Observable::H1Seminorm, Observable::WeightedL2, Observable::Error]
            .into_iter()
            .find(|o| o.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub step: usize,
    pub t: f64,
    pub s: f64,
    pub observable: Observable,
    pub value: f64,
}

/// A field sampled at one time, together with its coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub coords: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl Snapshot {
    pub fn new(time: f64, field: SpectralField) -> Self {
        let coords = field.grid().points().to_vec();
        Self { time, coords, values: field.into_values() }
    }
}

/// Gradient growth past the configured threshold between two grid times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUpEvent {
    pub step: usize,
    pub t_lo: f64,
    pub t_hi: f64,
    pub s_lo: f64,
    pub s_hi: f64,
    pub grad_norm: f64,
    pub threshold: f64,
}

impl BlowUpEvent {
    /// Midpoint of the bracketing interval.
    pub fn time(&self) -> f64 {
        0.5 * (self.t_lo + self.t_hi)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentRecord {
    /// Configuration echo, in insertion order.
    pub meta: Vec<(String, String)>,
    pub series: Vec<SeriesRow>,
    /// Reconstructed `u(t, x)`; `time` is `t`.
    pub snapshots_u: Vec<Snapshot>,
    /// The transformed unknown on the `y`-grid; `time` is `s`.
    pub snapshots_field: Vec<Snapshot>,
    pub blowup: Option<BlowUpEvent>,
}

impl ExperimentRecord {
    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    /// `(t, value)` pairs of one observable.
    pub fn series_of(&self, obs: Observable) -> Vec<(f64, f64)> {
        self.series.iter().filter(|r| r.observable == obs).map(|r| (r.t, r.value)).collect()
    }
}
