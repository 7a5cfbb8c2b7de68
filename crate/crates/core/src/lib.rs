//! Reference-free isochrony evaluation for machine translation.
//!
//! The toolkit predicts how long a source sentence and its translation take to speak,
//! scores their relative duration mismatch (ICM), combines it with a reference-free quality
//! estimate into an adjusted score (A-ICM), and renders per-system leaderboards.
//!
//! The metric math is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix the
//! scalar to `f64`, which is what the pipeline and the CLI use.

pub mod bridge;
pub mod cli;
pub mod corpus;
pub mod duration;
pub mod evaluation;
pub mod metrics;
pub mod qe;
pub mod report;
mod scalar;
pub mod tokenize;
pub mod validation;

pub use scalar::Scalar;

pub use corpus::{FilterPolicy, LanguagePair, Segment, Submission};
pub use duration::{DurationPredictor, PredictError, UnitKind};
pub use evaluation::{Flag, FlagPolicy, SystemReport};
pub use metrics::{compute_aicm, compute_icm, IcmMode, MetricsError};
pub use qe::QeProvider;

pub type DurationEstimate = metrics::DurationEstimate<f64>;
pub type SegmentMetrics = metrics::SegmentMetrics<f64>;
pub type AggregateMetrics = metrics::AggregateMetrics<f64>;
pub type RateProfile = duration::RateProfile<f64>;
pub type RatePredictor = duration::RatePredictor<f64>;
pub type ErrorCurve = validation::ErrorCurve<f64>;
pub type DurationPair = validation::DurationPair<f64>;
pub type ReferenceDuration = validation::ReferenceDuration<f64>;
