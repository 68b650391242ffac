//! Split-step Fourier solvers for the one-dimensional Schrödinger equation
//! with a repulsive harmonic potential `-ω²x²/2` and either a logarithmic
//! (`λ u ln|u|²`) or a power (`λ |u|^{2σ} u`) nonlinearity.
//!
//! Solutions of these equations spread exponentially fast in time. The
//! solvers therefore work with a generalized lens transform: the unknown is
//! rescaled in space by `cosh(ωt)` and time is mapped to `s = tanh(ωt)/ω`,
//! which turns the problem into a potential-free equation on the bounded
//! interval `s ∈ [0, 1/ω)` whose solutions stay localized. The transformed
//! problem is integrated on a fixed periodic box with Lie-Trotter or Strang
//! splitting, on a time grid uniform in either `t` or `s`, and mapped back.
//!
//! * [`grid`]: periodic grids, Fourier analysis, off-grid evaluation, norms.
//! * [`transforms`]: parameters, time maps, the lens transform and gauge.
//! * [`flows`]: exact sub-flows and the frequency cut-off.
//! * [`integrators`]: splitting steps and the run driver.
//! * [`gaussian`]: exact Gaussian dynamics of the logarithmic equation.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod flows;
pub mod gaussian;
pub mod grid;
pub mod integrators;
pub mod quadrature;
pub mod record;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{Norms, SpatialGrid, SpectralField};
pub use integrators::{
    run, run_with_reference, step_lie, step_strang, RunOutput, SolverConfig, SolverState, Splitting,
};
pub use record::{BlowUpEvent, ExperimentRecord, Observable, SeriesRow, Snapshot};
pub use transforms::{GaugeMode, Nonlinearity, PhysParams, TimeGridKind, TimeGrids};

pub use num_complex::Complex64;
