//! Isochrony and adjusted-isochrony metrics.
//!
//! ICM is the relative absolute deviation of the predicted translation duration from the
//! predicted source duration, normalised by the source duration:
//!
//! ```text
//! icm  = |source − translation| / source
//! aicm = (1 − icm) × qe
//! ```
//!
//! The normalisation is deliberately asymmetric: only the source duration is used as the
//! denominator. Values above 1 are legal and make `aicm` negative for positive `qe`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{order_free_sum, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("source duration is zero; isochrony is undefined")]
    ZeroSourceDuration,
    #[error("duration must be finite and nonnegative, got {0}")]
    InvalidDuration(String),
    #[error("predictor id must be nonempty")]
    EmptyPredictorId,
    #[error("non-finite metric input: {0}")]
    NonFinite(&'static str),
    #[error("cannot aggregate an empty list of segment metrics")]
    EmptyAggregate,
}

/// Predicted spoken duration of one text.
#[derive(Debug, Clone, PartialEq)]
pub struct DurationEstimate<T> {
    seconds: T,
    predictor_id: String,
    text_units: usize,
}

impl<T: Scalar> DurationEstimate<T> {
    pub fn new(seconds: T, predictor_id: impl Into<String>, text_units: usize) -> Result<Self, MetricsError> {
        if !seconds.is_finite() || seconds < T::zero() {
            return Err(MetricsError::InvalidDuration(format!("{seconds}")));
        }
        let predictor_id = predictor_id.into();
        if predictor_id.is_empty() {
            return Err(MetricsError::EmptyPredictorId);
        }
        Ok(Self {
            seconds,
            predictor_id,
            text_units,
        })
    }

    pub fn seconds(&self) -> T {
        self.seconds
    }

    pub fn predictor_id(&self) -> &str {
        &self.predictor_id
    }

    /// Token count of the text the estimate was made for.
    pub fn text_units(&self) -> usize {
        self.text_units
    }
}

/// Which form of the deviation to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcmMode {
    /// `|Δ| / source`. The default, and the form the published tables are consistent with.
    #[default]
    Absolute,
    /// `(Δ / source)²`, kept only for comparison.
    Squared,
}

pub fn compute_icm<T: Scalar>(
    original: &DurationEstimate<T>,
    translated: &DurationEstimate<T>,
) -> Result<T, MetricsError> {
    compute_icm_with(IcmMode::Absolute, original, translated)
}

pub fn compute_icm_with<T: Scalar>(
    mode: IcmMode,
    original: &DurationEstimate<T>,
    translated: &DurationEstimate<T>,
) -> Result<T, MetricsError> {
    icm_from_seconds(mode, original.seconds, translated.seconds)
}

pub(crate) fn icm_from_seconds<T: Scalar>(mode: IcmMode, original: T, translated: T) -> Result<T, MetricsError> {
    if original == T::zero() {
        return Err(MetricsError::ZeroSourceDuration);
    }
    let ratio = (original - translated) / original;
    Ok(match mode {
        IcmMode::Absolute => ratio.abs(),
        IcmMode::Squared => ratio * ratio,
    })
}

/// `(1 − icm) × qe`. Not clamped.
pub fn compute_aicm<T: Scalar>(icm: T, qe: T) -> Result<T, MetricsError> {
    if !icm.is_finite() {
        return Err(MetricsError::NonFinite("icm"));
    }
    if !qe.is_finite() {
        return Err(MetricsError::NonFinite("qe"));
    }
    Ok((T::one() - icm) * qe)
}

/// ICM, QE and A-ICM of one translated segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentMetrics<T> {
    icm: T,
    qe: T,
    aicm: T,
}

impl<T: Scalar> SegmentMetrics<T> {
    pub fn new(icm: T, qe: T) -> Result<Self, MetricsError> {
        if icm.is_finite() && icm < T::zero() {
            return Err(MetricsError::InvalidDuration(format!("icm {icm} < 0")));
        }
        let aicm = compute_aicm(icm, qe)?;
        Ok(Self { icm, qe, aicm })
    }

    pub fn icm(&self) -> T {
        self.icm
    }

    pub fn qe(&self) -> T {
        self.qe
    }

    pub fn aicm(&self) -> T {
        self.aicm
    }
}

/// One system's metrics over a set of segments.
///
/// `aicm_from_means` combines the mean ICM and mean QE and is the headline value;
/// `mean_segment_aicm` is the plain mean of per-segment A-ICM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics<T> {
    pub mean_icm: T,
    pub mean_qe: T,
    pub aicm_from_means: T,
    pub mean_segment_aicm: T,
    pub n_segments: usize,
}

impl<T: Scalar> AggregateMetrics<T> {
    /// Aggregate built directly from system-level means, e.g. a published table row.
    pub fn from_means(mean_icm: T, mean_qe: T, n_segments: usize) -> Result<Self, MetricsError> {
        if n_segments == 0 {
            return Err(MetricsError::EmptyAggregate);
        }
        let aicm = compute_aicm(mean_icm, mean_qe)?;
        Ok(Self {
            mean_icm,
            mean_qe,
            aicm_from_means: aicm,
            mean_segment_aicm: aicm,
            n_segments,
        })
    }
}

/// Means over `per_segment`. The result is independent of the order of the input.
pub fn aggregate<T: Scalar>(per_segment: &[SegmentMetrics<T>]) -> Result<AggregateMetrics<T>, MetricsError> {
    if per_segment.is_empty() {
        return Err(MetricsError::EmptyAggregate);
    }
    if per_segment
        .iter()
        .any(|m| !(m.icm.is_finite() && m.qe.is_finite() && m.aicm.is_finite()))
    {
        return Err(MetricsError::NonFinite("segment metrics"));
    }
    let n = T::from_count(per_segment.len());
    let mean = |f: fn(&SegmentMetrics<T>) -> T| {
        let mut values: Vec<T> = per_segment.iter().map(f).collect();
        order_free_sum(&mut values) / n
    };
    let mean_icm = mean(|m| m.icm);
    let mean_qe = mean(|m| m.qe);
    let mean_segment_aicm = mean(|m| m.aicm);
    Ok(AggregateMetrics {
        mean_icm,
        mean_qe,
        aicm_from_means: compute_aicm(mean_icm, mean_qe)?,
        mean_segment_aicm,
        n_segments: per_segment.len(),
    })
}
