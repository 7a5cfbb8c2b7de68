//! Duration predictors: anything that maps a text in a language to predicted speech seconds.

mod calibrate;
mod rate;
mod remote;
mod table;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::bridge::BridgeError;
use crate::metrics::{DurationEstimate, MetricsError};
use crate::scalar::Scalar;

pub use calibrate::{calibrate_rate, CalibrationError};
pub use rate::{rate_predict, ProfileConfigError, RatePredictor, RateProfile, UnitKind};
pub use remote::{bridge_predict, BridgePredictor};
pub use table::TablePredictor;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PredictError {
    #[error("text is empty")]
    EmptyText,
    #[error("language {0:?} is not supported by this predictor")]
    UnsupportedLanguage(String),
    #[error("no duration available for this text")]
    Missing,
    #[error("remote predictor error {code}: {message}")]
    Remote { code: String, message: String },
    #[error(transparent)]
    Transport(#[from] BridgeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl PredictError {
    pub fn is_transport(&self) -> bool {
        matches!(self, PredictError::Transport(_))
    }
}

/// Text-to-duration model.
///
/// Implementations must be deterministic: the same instance returns the same estimate for
/// the same `(text, language)`, and two predictors sharing an [`id`](Self::id) agree.
pub trait DurationPredictor<T: Scalar = f64>: Send + Sync {
    fn id(&self) -> &str;

    fn supported_languages(&self) -> BTreeSet<String>;

    fn predict(&self, text: &str, language: &str) -> Result<DurationEstimate<T>, PredictError>;

    /// Predict many items; one result per input, in input order.
    fn predict_batch(&self, items: &[(&str, &str)]) -> Vec<Result<DurationEstimate<T>, PredictError>> {
        items
            .iter()
            .map(|(text, language)| self.predict(text, language))
            .collect()
    }
}

impl<T: Scalar, P: DurationPredictor<T> + ?Sized> DurationPredictor<T> for &P {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn supported_languages(&self) -> BTreeSet<String> {
        (**self).supported_languages()
    }

    fn predict(&self, text: &str, language: &str) -> Result<DurationEstimate<T>, PredictError> {
        (**self).predict(text, language)
    }

    fn predict_batch(&self, items: &[(&str, &str)]) -> Vec<Result<DurationEstimate<T>, PredictError>> {
        (**self).predict_batch(items)
    }
}

impl<T: Scalar, P: DurationPredictor<T> + ?Sized> DurationPredictor<T> for Box<P> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn supported_languages(&self) -> BTreeSet<String> {
        (**self).supported_languages()
    }

    fn predict(&self, text: &str, language: &str) -> Result<DurationEstimate<T>, PredictError> {
        (**self).predict(text, language)
    }

    fn predict_batch(&self, items: &[(&str, &str)]) -> Vec<Result<DurationEstimate<T>, PredictError>> {
        (**self).predict_batch(items)
    }
}
