//! Multiplicative deconvolution with Mellin transforms.
//!
//! Observations are `Y = X·U` with `X` and `U` independent and positive.
//! The crate estimates the density or survival function of `X` by spectral
//! cut-off in the Mellin domain, chooses the cut-off by a penalised contrast
//! and runs Monte Carlo experiments to measure the resulting risk.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod empirical;
pub mod error;
pub mod estimators;
pub mod mellin;
pub mod oracle;
pub mod selection;
pub mod simulation;
pub mod special;

pub use distributions::{sample, sample_product, DistSpec, Family, Sample};
pub use empirical::{empirical_mellin, mx_hat, sigma_hat_sq, threshold_mask, ThresholdMask};
pub use error::{DeconvError, Result};
pub use estimators::{density_known, density_unknown, survival_known, survival_unknown, CurveEstimate, EstimateKind};
pub use mellin::{l2_norm_sq, mellin_inverse, mellin_numeric, Interval, MellinFn, TGrid, Weight, WeightFn, XGrid};
pub use selection::{select_known, select_unknown, PenaltyConfig, Regime, SelectionResult};
pub use simulation::{preset, run_experiment, run_replication, ExperimentReport, ExperimentSpec};
