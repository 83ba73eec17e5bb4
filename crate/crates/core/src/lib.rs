//! Interval-conditioned time-series forecasting.
//!
//! Models take a history window plus a covariate interval `[lo, hi]` of the
//! normalized value domain and learn to forecast well where the truth falls
//! inside that interval. Five training policies are provided (baseline,
//! task-specific, continuous-interval, discretized, and discretized with
//! decay weighting plus a classification head). Models trained on a
//! discrete partition can be patched together at inference time to serve
//! arbitrary query intervals. An energy-saving simulator measures how
//! forecast quality inside a region of interest changes sleep decisions of
//! a capacity cell.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod energy;
pub mod error;
pub mod eval;
pub mod gradcheck;
pub mod interval;
pub mod matrix;
pub mod model;
pub mod patch;
pub mod train;

pub use error::{Error, Result};
pub use interval::{DecayRate, DiscretePartition, Interval};
pub use matrix::Matrix;
pub use model::{DualForecast, ModelKind, ModelParams};
pub use train::{PolicyConfig, PolicyKind, TrainConfig};
