//! Experiment runner for the `lenssplit` solvers.
//!
//! Experiments are described by TOML files (see [`config`]); the numerical
//! examples ship as embedded [`presets`]. Every command writes CSV files and
//! a `manifest.txt` into its output directory; [`output`] fixes the layouts.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod fit;
pub mod output;
pub mod presets;
pub mod studies;

pub use config::{ExperimentConfig, LoadedConfig};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl HarnessError {
    /// 1 for configuration errors, 2 for numerical failures, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Numerical(_) => 2,
            HarnessError::Io(_) => 3,
        }
    }
}

impl From<lenssplit::Error> for HarnessError {
    fn from(e: lenssplit::Error) -> Self {
        use lenssplit::Error as E;
        match e {
            E::NonFinite { .. } | E::NonPositiveWidth { .. } => HarnessError::Numerical(e.to_string()),
            _ => HarnessError::Config(e.to_string()),
        }
    }
}
