//! Monte Carlo threshold sweeps, moment computations and scaling fits.

pub mod csv;
pub mod events;
pub mod moments;
pub mod scaling;
pub mod stats;
pub mod sweep;

pub use events::{robust_expander_events, EventFrequency, EventParams, EventsReport};
pub use moments::{isolated_vertex_moments, uncovered_vertex_expectation, MomentReport, UncoveredReport};
pub use scaling::{scaling_fit, ScalingOptions, ScalingPoint, ScalingReport};
pub use stats::{fit_monotone_logistic, wilson, LogisticFit};
pub use sweep::{threshold_sweep, CurvePoint, Instance, PGrid, Property, SweepOptions, ThresholdCurve};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("{property} cannot be evaluated at n = {n} (limit {cap})")]
    Scale { property: Property, n: usize, cap: usize },
    #[error("trial {trial} succeeded at p = {lower} but failed at p = {upper}")]
    NotMonotone { trial: u64, lower: f64, upper: f64 },
    #[error("evaluator failed at p = {p}: {reason}")]
    Evaluator { p: f64, reason: String },
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("spectrum: {0}")]
    Spectral(#[from] crate::spectral::SpectralError),
    #[error("csv: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("schema: {0}")]
    Schema(String),
}
